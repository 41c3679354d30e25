#pragma once

#include <array>
#include <chrono>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "factgpt/error.hpp"

namespace factgpt {

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Labels

enum class Label : int { Entailment = 0, Neutral = 1, Contradiction = 2 };

inline constexpr std::array<Label, 3> kAllLabels = {Label::Entailment, Label::Neutral,
                                                     Label::Contradiction};

constexpr std::size_t label_index(Label label) noexcept { return static_cast<std::size_t>(label); }

std::string_view label_token(Label label) noexcept;

// Exact uppercase token only. Anything else (including "entailment") is rejected.
std::optional<Label> label_from_token(std::string_view token) noexcept;

// ---------------------------------------------------------------------------
// Calendar date in ISO form (YYYY-MM-DD).

class Date {
 public:
  explicit Date(std::chrono::year_month_day ymd);
  static std::optional<Date> parse(std::string_view text);

  std::chrono::year_month_day ymd() const noexcept { return ymd_; }
  std::string to_string() const;

  friend bool operator==(const Date&, const Date&) = default;

 private:
  std::chrono::year_month_day ymd_;
};

// ---------------------------------------------------------------------------
// Records

struct Claim {
  std::string id;
  std::string text;
  std::optional<std::string> source;
  std::optional<Date> debunked_on;

  friend bool operator==(const Claim&, const Claim&) = default;
};

struct Post {
  std::string id;
  std::string text;
  std::optional<std::string> created_at;
  std::optional<std::string> origin;

  friend bool operator==(const Post&, const Post&) = default;
};

struct PairCandidate {
  std::string pair_id;
  std::string post_id;
  std::string claim_id;
  double token_score = 0.0;
  double semantic_score = 0.0;
  double combined_score = 0.0;

  friend bool operator==(const PairCandidate&, const PairCandidate&) = default;
};

struct SyntheticExample {
  std::string claim_id;
  Label target_label = Label::Entailment;
  std::string tweet_text;
  std::string generator_model;
  std::string created_at;

  friend bool operator==(const SyntheticExample&, const SyntheticExample&) = default;
};

// label is empty when the response held no label token (or the provider call
// failed); it is serialized as null.
struct Prediction {
  std::string pair_id;
  std::string model_id;
  std::optional<Label> label;
  std::string raw_response;
  bool ambiguous = false;

  friend bool operator==(const Prediction&, const Prediction&) = default;
};

struct Vote {
  std::string annotator_id;
  Label label = Label::Entailment;

  friend bool operator==(const Vote&, const Vote&) = default;
};

struct VoteSet {
  std::string pair_id;
  std::vector<Vote> votes;

  friend bool operator==(const VoteSet&, const VoteSet&) = default;
};

struct Decided {
  Label label;
  friend bool operator==(const Decided&, const Decided&) = default;
};

// Labels sharing the maximal vote count, kept in canonical label order.
struct Tie {
  std::vector<Label> labels;
  friend bool operator==(const Tie&, const Tie&) = default;
};

struct GoldLabel {
  std::string pair_id;
  std::variant<Decided, Tie> outcome;

  bool is_tie() const noexcept { return std::holds_alternative<Tie>(outcome); }
  friend bool operator==(const GoldLabel&, const GoldLabel&) = default;
};

// ---------------------------------------------------------------------------
// Helpers

// Whitespace-only strings count as empty.
bool is_blank(std::string_view text) noexcept;

// Content-derived id: prefix + first 16 hex digits of SHA-256(text).
std::string content_id(std::string_view prefix, std::string_view text);

// ---------------------------------------------------------------------------
// JSON conversion. from_json_value throws Error{SchemaViolation} on any
// invariant violation.

OrderedJson to_json_value(const Claim& r);
OrderedJson to_json_value(const Post& r);
OrderedJson to_json_value(const PairCandidate& r);
OrderedJson to_json_value(const SyntheticExample& r);
OrderedJson to_json_value(const Prediction& r);
OrderedJson to_json_value(const VoteSet& r);
OrderedJson to_json_value(const GoldLabel& r);

// Claims and posts without an "id" receive a content-derived one.
void from_json_value(const Json& j, Claim& out);
void from_json_value(const Json& j, Post& out);
void from_json_value(const Json& j, PairCandidate& out);
void from_json_value(const Json& j, SyntheticExample& out);
void from_json_value(const Json& j, Prediction& out);
void from_json_value(const Json& j, VoteSet& out);
void from_json_value(const Json& j, GoldLabel& out);

// ---------------------------------------------------------------------------
// JSON-lines codec

struct LineError {
  std::size_t line = 0;  // 1-based
  ErrorCode kind = ErrorCode::MalformedJson;
  std::string message;

  friend bool operator==(const LineError&, const LineError&) = default;
};

template <class T>
struct Decoded {
  std::vector<T> records;
  std::vector<LineError> errors;

  bool ok() const noexcept { return errors.empty(); }
};

template <class T>
std::string encode_records(std::span<const T> records) {
  std::string out;
  for (const auto& r : records) {
    out += to_json_value(r).dump(-1, ' ', false, OrderedJson::error_handler_t::replace);
    out += '\n';
  }
  return out;
}

template <class T>
std::string encode_records(const std::vector<T>& records) {
  return encode_records(std::span<const T>(records));
}

std::vector<std::string_view> split_lines(std::string_view text);

template <class T>
Decoded<T> decode_records(std::string_view text) {
  Decoded<T> result;
  std::size_t line_no = 0;
  for (std::string_view line : split_lines(text)) {
    ++line_no;
    if (is_blank(line)) continue;
    Json j = Json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded() || !j.is_object()) {
      result.errors.push_back({line_no, ErrorCode::MalformedJson, "line is not a JSON object"});
      continue;
    }
    try {
      T record;
      from_json_value(j, record);
      result.records.push_back(std::move(record));
    } catch (const Error& e) {
      result.errors.push_back({line_no, e.code(), e.what()});
    }
  }
  return result;
}

// Decodes and throws Error{ValidationError} naming the first bad line.
template <class T>
std::vector<T> decode_records_strict(std::string_view text, std::string_view what) {
  auto decoded = decode_records<T>(text);
  if (!decoded.ok()) {
    const auto& e = decoded.errors.front();
    throw Error(ErrorCode::ValidationError, std::string(what) + ": line " + std::to_string(e.line) +
                                                ": " + e.message);
  }
  return std::move(decoded.records);
}

}  // namespace factgpt
