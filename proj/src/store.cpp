#include "factgpt/store.hpp"

#include <algorithm>
#include <cstdio>
#include <mutex>

namespace factgpt {

namespace fs = std::filesystem;

namespace {

constexpr const char* kClaims = "claims.jsonl";
constexpr const char* kPosts = "posts.jsonl";
constexpr const char* kPairs = "pairs.jsonl";
constexpr const char* kPredictions = "predictions.jsonl";
constexpr const char* kAdjudications = "adjudications.jsonl";
constexpr const char* kReports = "reports";

template <class T>
std::vector<T> load_jsonl(const fs::path& path) {
  if (!fs::exists(path)) return {};
  return decode_records_strict<T>(read_file(path), path.filename().string());
}

}  // namespace

std::string_view to_string(Decision d) noexcept { return d == Decision::Confirm ? "confirm" : "override"; }

OrderedJson to_json_value(const Adjudication& a) {
  OrderedJson j;
  j["pair_id"] = a.pair_id;
  j["decision"] = to_string(a.decision);
  j["label"] = label_token(a.label);
  j["reviewer"] = a.reviewer;
  if (a.model_label) {
    j["model_label"] = label_token(*a.model_label);
  } else {
    j["model_label"] = nullptr;
  }
  j["at"] = a.at;
  return j;
}

void from_json_value(const Json& j, Adjudication& out) {
  try {
    out.pair_id = j.at("pair_id").get<std::string>();
    const auto decision = j.at("decision").get<std::string>();
    if (decision == "confirm") {
      out.decision = Decision::Confirm;
    } else if (decision == "override") {
      out.decision = Decision::Override;
    } else {
      throw Error(ErrorCode::SchemaViolation, "unknown decision \"" + decision + "\"");
    }
    auto label = label_from_token(j.at("label").get<std::string>());
    if (!label) throw Error(ErrorCode::SchemaViolation, "adjudication label must be a label token");
    out.label = *label;
    out.reviewer = j.at("reviewer").get<std::string>();
    out.model_label.reset();
    if (j.contains("model_label") && !j["model_label"].is_null()) {
      out.model_label = label_from_token(j["model_label"].get<std::string>());
    }
    out.at = j.value("at", "");
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::SchemaViolation, std::string("adjudication: ") + e.what());
  }
}

Store::Store(fs::path dir) : dir_(std::move(dir)) {
  if (!dir_.empty()) {
    fs::create_directories(dir_);
    load();
  }
}

void Store::load() {
  for (auto& c : load_jsonl<Claim>(dir_ / kClaims)) {
    if (claims_.emplace(c.id, c).second) claim_order_.push_back(c.id);
  }
  for (auto& p : load_jsonl<Post>(dir_ / kPosts)) posts_.emplace(p.id, p);
  for (auto& pc : load_jsonl<PairCandidate>(dir_ / kPairs)) {
    if (pairs_.emplace(pc.pair_id, pc).second) pair_order_.push_back(pc.pair_id);
  }
  for (auto& p : load_jsonl<Prediction>(dir_ / kPredictions)) predictions_.insert_or_assign(p.pair_id, p);

  const auto adj_path = dir_ / kAdjudications;
  if (fs::exists(adj_path)) {
    std::size_t line_no = 0;
    const auto text = read_file(adj_path);
    for (auto line : split_lines(text)) {
      ++line_no;
      if (is_blank(line)) continue;
      Json j = Json::parse(line, nullptr, false);
      if (j.is_discarded()) {
        throw Error(ErrorCode::ValidationError, std::string(kAdjudications) + ": line " +
                                                    std::to_string(line_no) + " is not JSON");
      }
      Adjudication a;
      from_json_value(j, a);
      adjudications_[a.pair_id].push_back(std::move(a));
    }
  }

  const auto reports_dir = dir_ / kReports;
  if (fs::exists(reports_dir)) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(reports_dir)) {
      if (entry.path().extension() == ".json") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      Json j = Json::parse(read_file(f), nullptr, false);
      if (j.is_discarded() || !j.contains("report")) continue;
      StoredReport r;
      from_json_value(j["report"], r.report);
      r.manifest = j.value("manifest", OrderedJson::object());
      reports_.push_back(std::move(r));
    }
  }
}

void Store::append_line(const char* file, const OrderedJson& record) {
  if (dir_.empty()) return;
  append_file(dir_ / file, record.dump(-1, ' ', false, OrderedJson::error_handler_t::replace) + "\n");
}

Store::UpsertResult Store::upsert_claims(std::span<const Claim> claims) {
  std::unique_lock lock(mutex_);
  UpsertResult r;
  for (const auto& c : claims) {
    if (claims_.contains(c.id)) {
      ++r.skipped_duplicates;
      continue;
    }
    claims_.emplace(c.id, c);
    claim_order_.push_back(c.id);
    append_line(kClaims, to_json_value(c));
    ++r.ingested;
  }
  return r;
}

Store::UpsertResult Store::upsert_posts(std::span<const Post> posts) {
  std::unique_lock lock(mutex_);
  UpsertResult r;
  for (const auto& p : posts) {
    if (!posts_.emplace(p.id, p).second) {
      ++r.skipped_duplicates;
      continue;
    }
    append_line(kPosts, to_json_value(p));
    ++r.ingested;
  }
  return r;
}

Store::UpsertResult Store::upsert_pairs(std::span<const PairCandidate> pairs) {
  std::unique_lock lock(mutex_);
  UpsertResult r;
  for (const auto& pc : pairs) {
    if (!pairs_.emplace(pc.pair_id, pc).second) {
      ++r.skipped_duplicates;
      continue;
    }
    pair_order_.push_back(pc.pair_id);
    append_line(kPairs, to_json_value(pc));
    ++r.ingested;
  }
  return r;
}

void Store::put_predictions(std::span<const Prediction> predictions) {
  std::unique_lock lock(mutex_);
  for (const auto& p : predictions) {
    predictions_.insert_or_assign(p.pair_id, p);
    append_line(kPredictions, to_json_value(p));
  }
}

std::vector<Claim> Store::claims() const {
  std::shared_lock lock(mutex_);
  std::vector<Claim> out;
  out.reserve(claim_order_.size());
  for (const auto& id : claim_order_) out.push_back(claims_.at(id));
  return out;
}

std::vector<PairCandidate> Store::pairs() const {
  std::shared_lock lock(mutex_);
  std::vector<PairCandidate> out;
  out.reserve(pair_order_.size());
  for (const auto& id : pair_order_) out.push_back(pairs_.at(id));
  return out;
}

namespace {

template <class Map>
auto find_copy(const Map& m, const std::string& key) -> std::optional<typename Map::mapped_type> {
  auto it = m.find(key);
  if (it == m.end()) return std::nullopt;
  return it->second;
}

}  // namespace

std::optional<Claim> Store::claim(const std::string& id) const {
  std::shared_lock lock(mutex_);
  return find_copy(claims_, id);
}

std::optional<Post> Store::post(const std::string& id) const {
  std::shared_lock lock(mutex_);
  return find_copy(posts_, id);
}

std::optional<PairCandidate> Store::pair(const std::string& id) const {
  std::shared_lock lock(mutex_);
  return find_copy(pairs_, id);
}

std::optional<Prediction> Store::prediction(const std::string& pair_id) const {
  std::shared_lock lock(mutex_);
  return find_copy(predictions_, pair_id);
}

std::vector<Prediction> Store::predictions() const {
  std::shared_lock lock(mutex_);
  std::vector<Prediction> out;
  for (const auto& [_, p] : predictions_) out.push_back(p);
  return out;
}

void Store::append_adjudication(const Adjudication& a) {
  std::unique_lock lock(mutex_);
  adjudications_[a.pair_id].push_back(a);
  append_line(kAdjudications, to_json_value(a));
}

std::vector<Adjudication> Store::adjudications(const std::string& pair_id) const {
  std::shared_lock lock(mutex_);
  auto it = adjudications_.find(pair_id);
  return it == adjudications_.end() ? std::vector<Adjudication>{} : it->second;
}

std::optional<Adjudication> Store::latest_adjudication(const std::string& pair_id) const {
  std::shared_lock lock(mutex_);
  auto it = adjudications_.find(pair_id);
  if (it == adjudications_.end() || it->second.empty()) return std::nullopt;
  return it->second.back();
}

std::vector<GoldLabel> Store::adjudicated_gold() const {
  std::shared_lock lock(mutex_);
  std::vector<GoldLabel> out;
  for (const auto& [pair_id, history] : adjudications_) {
    if (history.empty()) continue;
    out.push_back(GoldLabel{pair_id, Decided{history.back().label}});
  }
  return out;
}

void Store::persist_report(const StoredReport& report) {
  std::unique_lock lock(mutex_);
  reports_.push_back(report);
  if (dir_.empty()) return;
  char name[32];
  std::snprintf(name, sizeof name, "report-%06zu.json", reports_.size());
  OrderedJson j;
  j["report"] = to_json_value(report.report);
  j["manifest"] = report.manifest;
  write_file_atomic(dir_ / kReports / name, j.dump(2) + "\n");
}

std::optional<StoredReport> Store::latest_report() const {
  std::shared_lock lock(mutex_);
  if (reports_.empty()) return std::nullopt;
  return reports_.back();
}

}  // namespace factgpt
