#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include "factgpt/domain.hpp"
#include "factgpt/evalkit.hpp"
#include "factgpt/io.hpp"

namespace factgpt {

enum class Decision { Confirm, Override };

std::string_view to_string(Decision d) noexcept;

struct Adjudication {
  std::string pair_id;
  Decision decision = Decision::Confirm;
  Label label = Label::Entailment;  // resulting gold label
  std::string reviewer;
  std::optional<Label> model_label;
  std::string at;

  friend bool operator==(const Adjudication&, const Adjudication&) = default;
};

OrderedJson to_json_value(const Adjudication& a);
void from_json_value(const Json& j, Adjudication& out);

struct StoredReport {
  EvalReport report;
  OrderedJson manifest;
};

// Single-directory persistence: one JSON-lines file per record type, an
// append-only adjudication log and numbered report files. Readers share a
// lock; each mutation holds it exclusively while it appends.
class Store {
 public:
  // Loads whatever exists under `dir`; creates the directory if missing. An
  // empty path keeps everything in memory.
  explicit Store(std::filesystem::path dir = {});

  const std::filesystem::path& dir() const noexcept { return dir_; }

  struct UpsertResult {
    std::size_t ingested = 0;
    std::size_t skipped_duplicates = 0;
  };

  UpsertResult upsert_claims(std::span<const Claim> claims);
  UpsertResult upsert_posts(std::span<const Post> posts);
  UpsertResult upsert_pairs(std::span<const PairCandidate> pairs);
  // Replaces any earlier prediction for the same pair.
  void put_predictions(std::span<const Prediction> predictions);

  std::vector<Claim> claims() const;
  std::vector<PairCandidate> pairs() const;
  std::optional<Claim> claim(const std::string& id) const;
  std::optional<Post> post(const std::string& id) const;
  std::optional<PairCandidate> pair(const std::string& id) const;
  std::optional<Prediction> prediction(const std::string& pair_id) const;
  std::vector<Prediction> predictions() const;

  void append_adjudication(const Adjudication& a);
  // Full history for a pair, oldest first.
  std::vector<Adjudication> adjudications(const std::string& pair_id) const;
  std::optional<Adjudication> latest_adjudication(const std::string& pair_id) const;
  // One Decided gold label per adjudicated pair, in pair_id order.
  std::vector<GoldLabel> adjudicated_gold() const;

  void persist_report(const StoredReport& report);
  std::optional<StoredReport> latest_report() const;

 private:
  void load();
  void append_line(const char* file, const OrderedJson& record);

  std::filesystem::path dir_;
  mutable std::shared_mutex mutex_;
  std::vector<std::string> claim_order_;
  std::map<std::string, Claim> claims_;
  std::map<std::string, Post> posts_;
  std::vector<std::string> pair_order_;
  std::map<std::string, PairCandidate> pairs_;
  std::map<std::string, Prediction> predictions_;
  std::map<std::string, std::vector<Adjudication>> adjudications_;
  std::vector<StoredReport> reports_;
};

}  // namespace factgpt
