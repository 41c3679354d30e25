#include "factgpt/domain.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <set>

#include "factgpt/hashing.hpp"

namespace factgpt {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::Ok: return "ok";
    case ErrorCode::InvalidArgument: return "invalid_argument";
    case ErrorCode::MalformedJson: return "malformed_json";
    case ErrorCode::SchemaViolation: return "schema_violation";
    case ErrorCode::EmptyInput: return "empty_input";
    case ErrorCode::DuplicateId: return "duplicate_id";
    case ErrorCode::UnknownEmbedder: return "unknown_embedder";
    case ErrorCode::DimensionMismatch: return "dimension_mismatch";
    case ErrorCode::EmptyClaimStore: return "empty_claim_store";
    case ErrorCode::EmptyBatch: return "empty_batch";
    case ErrorCode::ValidationError: return "validation_error";
    case ErrorCode::TooFewExamples: return "too_few_examples";
    case ErrorCode::UnresolvedClaim: return "unresolved_claim";
    case ErrorCode::Unparseable: return "unparseable";
    case ErrorCode::EmptyVotes: return "empty_votes";
    case ErrorCode::MissingGold: return "missing_gold";
    case ErrorCode::DuplicatePrediction: return "duplicate_prediction";
    case ErrorCode::UnknownJob: return "unknown_job";
    case ErrorCode::NotFound: return "not_found";
    case ErrorCode::Conflict: return "conflict";
    case ErrorCode::IoError: return "io_error";
    case ErrorCode::AuthError: return "auth_error";
    case ErrorCode::RateLimited: return "rate_limited";
    case ErrorCode::ProviderError: return "provider_error";
    case ErrorCode::Timeout: return "timeout";
    case ErrorCode::Internal: return "internal";
  }
  return "unknown";
}

std::string error_name(ErrorCode code) {
  std::string out;
  bool upper = true;
  for (char ch : to_string(code)) {
    if (ch == '_') {
      upper = true;
      continue;
    }
    out += upper ? static_cast<char>(ch - 'a' + 'A') : ch;
    upper = false;
  }
  return out;
}

std::string_view label_token(Label label) noexcept {
  switch (label) {
    case Label::Entailment: return "ENTAILMENT";
    case Label::Neutral: return "NEUTRAL";
    case Label::Contradiction: return "CONTRADICTION";
  }
  return "";
}

std::optional<Label> label_from_token(std::string_view token) noexcept {
  for (Label l : kAllLabels) {
    if (label_token(l) == token) return l;
  }
  return std::nullopt;
}

// --- Date ------------------------------------------------------------------

Date::Date(std::chrono::year_month_day ymd) : ymd_(ymd) {
  if (!ymd_.ok()) throw Error(ErrorCode::InvalidArgument, "invalid calendar date");
}

std::optional<Date> Date::parse(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  auto num = [&](std::size_t pos, std::size_t len) -> std::optional<int> {
    int v = 0;
    auto first = text.data() + pos;
    auto [ptr, ec] = std::from_chars(first, first + len, v);
    if (ec != std::errc{} || ptr != first + len) return std::nullopt;
    return v;
  };
  auto y = num(0, 4), m = num(5, 2), d = num(8, 2);
  if (!y || !m || !d) return std::nullopt;
  std::chrono::year_month_day ymd{std::chrono::year{*y}, std::chrono::month{static_cast<unsigned>(*m)},
                                  std::chrono::day{static_cast<unsigned>(*d)}};
  if (!ymd.ok()) return std::nullopt;
  return Date(ymd);
}

std::string Date::to_string() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd_.year()),
                static_cast<unsigned>(ymd_.month()), static_cast<unsigned>(ymd_.day()));
  return buf;
}

// --- helpers ---------------------------------------------------------------

bool is_blank(std::string_view text) noexcept {
  return std::all_of(text.begin(), text.end(),
                     [](unsigned char c) { return std::isspace(c) != 0; });
}

std::string content_id(std::string_view prefix, std::string_view text) {
  return std::string(prefix) + sha256_hex(text).substr(0, 16);
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    auto nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    auto line = text.substr(start, nl - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = nl + 1;
  }
  return lines;
}

namespace {

[[noreturn]] void violation(const std::string& message) {
  throw Error(ErrorCode::SchemaViolation, message);
}

std::string required_string(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) violation(std::string("missing required field \"") + key + "\"");
  if (!it->is_string()) violation(std::string("field \"") + key + "\" must be a string");
  return it->get<std::string>();
}

std::string required_text(const Json& j, const char* key) {
  auto s = required_string(j, key);
  if (is_blank(s)) violation(std::string("field \"") + key + "\" must be non-empty");
  return s;
}

std::optional<std::string> optional_string(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) violation(std::string("field \"") + key + "\" must be a string");
  return it->get<std::string>();
}

double required_number(const Json& j, const char* key, double lo, double hi) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) violation(std::string("missing required field \"") + key + "\"");
  if (!it->is_number()) violation(std::string("field \"") + key + "\" must be a number");
  double v = it->get<double>();
  if (!std::isfinite(v) || v < lo || v > hi) {
    violation(std::string("field \"") + key + "\" out of range");
  }
  return v;
}

Label required_label(const Json& value, const char* key) {
  if (!value.is_string()) violation(std::string("field \"") + key + "\" must be a label token");
  auto l = label_from_token(value.get<std::string>());
  if (!l) violation(std::string("field \"") + key + "\" has unknown label \"" + value.get<std::string>() + "\"");
  return *l;
}

template <class T>
void put_optional(OrderedJson& j, const char* key, const std::optional<T>& v) {
  if (v) j[key] = *v;
}

}  // namespace

// --- Claim -----------------------------------------------------------------

OrderedJson to_json_value(const Claim& r) {
  OrderedJson j;
  j["id"] = r.id;
  j["text"] = r.text;
  put_optional(j, "source", r.source);
  if (r.debunked_on) j["debunked_on"] = r.debunked_on->to_string();
  return j;
}

void from_json_value(const Json& j, Claim& out) {
  out.text = required_text(j, "text");
  auto id = optional_string(j, "id");
  if (id && id->empty()) violation("field \"id\" must be non-empty");
  out.id = id ? *id : content_id("c-", out.text);
  out.source = optional_string(j, "source");
  out.debunked_on.reset();
  if (auto d = optional_string(j, "debunked_on")) {
    out.debunked_on = Date::parse(*d);
    if (!out.debunked_on) violation("field \"debunked_on\" must be a YYYY-MM-DD date");
  }
}

// --- Post ------------------------------------------------------------------

OrderedJson to_json_value(const Post& r) {
  OrderedJson j;
  j["id"] = r.id;
  j["text"] = r.text;
  put_optional(j, "created_at", r.created_at);
  put_optional(j, "origin", r.origin);
  return j;
}

void from_json_value(const Json& j, Post& out) {
  out.text = required_text(j, "text");
  auto id = optional_string(j, "id");
  if (id && id->empty()) violation("field \"id\" must be non-empty");
  out.id = id ? *id : content_id("p-", out.text);
  out.created_at = optional_string(j, "created_at");
  out.origin = optional_string(j, "origin");
}

// --- PairCandidate ---------------------------------------------------------

OrderedJson to_json_value(const PairCandidate& r) {
  OrderedJson j;
  j["pair_id"] = r.pair_id;
  j["post_id"] = r.post_id;
  j["claim_id"] = r.claim_id;
  j["token_score"] = r.token_score;
  j["semantic_score"] = r.semantic_score;
  j["combined_score"] = r.combined_score;
  return j;
}

void from_json_value(const Json& j, PairCandidate& out) {
  out.pair_id = required_text(j, "pair_id");
  out.post_id = required_text(j, "post_id");
  out.claim_id = required_text(j, "claim_id");
  out.token_score = required_number(j, "token_score", 0.0, 1.0);
  out.semantic_score = required_number(j, "semantic_score", -1.0, 1.0);
  out.combined_score = required_number(j, "combined_score", -HUGE_VAL, HUGE_VAL);
}

// --- SyntheticExample ------------------------------------------------------

OrderedJson to_json_value(const SyntheticExample& r) {
  OrderedJson j;
  j["claim_id"] = r.claim_id;
  j["target_label"] = label_token(r.target_label);
  j["tweet_text"] = r.tweet_text;
  j["generator_model"] = r.generator_model;
  j["created_at"] = r.created_at;
  return j;
}

void from_json_value(const Json& j, SyntheticExample& out) {
  out.claim_id = required_text(j, "claim_id");
  auto it = j.find("target_label");
  if (it == j.end()) violation("missing required field \"target_label\"");
  out.target_label = required_label(*it, "target_label");
  out.tweet_text = required_text(j, "tweet_text");
  out.generator_model = required_string(j, "generator_model");
  out.created_at = required_string(j, "created_at");
}

// --- Prediction ------------------------------------------------------------

OrderedJson to_json_value(const Prediction& r) {
  OrderedJson j;
  j["pair_id"] = r.pair_id;
  j["model_id"] = r.model_id;
  if (r.label) {
    j["label"] = label_token(*r.label);
  } else {
    j["label"] = nullptr;
  }
  j["raw_response"] = r.raw_response;
  j["ambiguous"] = r.ambiguous;
  return j;
}

void from_json_value(const Json& j, Prediction& out) {
  out.pair_id = required_text(j, "pair_id");
  out.model_id = required_string(j, "model_id");
  auto it = j.find("label");
  if (it == j.end()) violation("missing required field \"label\"");
  out.label.reset();
  if (!it->is_null()) out.label = required_label(*it, "label");
  out.raw_response = required_string(j, "raw_response");
  auto amb = j.find("ambiguous");
  if (amb == j.end() || !amb->is_boolean()) violation("field \"ambiguous\" must be a boolean");
  out.ambiguous = amb->get<bool>();
}

// --- VoteSet ---------------------------------------------------------------

OrderedJson to_json_value(const VoteSet& r) {
  OrderedJson j;
  j["pair_id"] = r.pair_id;
  auto votes = OrderedJson::array();
  for (const auto& v : r.votes) {
    OrderedJson vj;
    vj["annotator_id"] = v.annotator_id;
    vj["label"] = label_token(v.label);
    votes.push_back(std::move(vj));
  }
  j["votes"] = std::move(votes);
  return j;
}

void from_json_value(const Json& j, VoteSet& out) {
  out.pair_id = required_text(j, "pair_id");
  auto it = j.find("votes");
  if (it == j.end() || !it->is_array()) violation("field \"votes\" must be an array");
  if (it->empty()) violation("field \"votes\" must hold at least one vote");
  out.votes.clear();
  std::set<std::string> seen;
  for (const auto& v : *it) {
    if (!v.is_object()) violation("each vote must be an object");
    Vote vote;
    vote.annotator_id = required_text(v, "annotator_id");
    auto lab = v.find("label");
    if (lab == v.end()) violation("missing required field \"label\"");
    vote.label = required_label(*lab, "label");
    if (!seen.insert(vote.annotator_id).second) {
      violation("duplicate annotator_id \"" + vote.annotator_id + "\"");
    }
    out.votes.push_back(std::move(vote));
  }
}

// --- GoldLabel -------------------------------------------------------------

OrderedJson to_json_value(const GoldLabel& r) {
  OrderedJson j;
  j["pair_id"] = r.pair_id;
  OrderedJson outcome;
  if (const auto* d = std::get_if<Decided>(&r.outcome)) {
    outcome["decided"] = label_token(d->label);
  } else {
    auto labels = OrderedJson::array();
    for (Label l : std::get<Tie>(r.outcome).labels) labels.push_back(label_token(l));
    outcome["tie"] = std::move(labels);
  }
  j["outcome"] = std::move(outcome);
  return j;
}

void from_json_value(const Json& j, GoldLabel& out) {
  out.pair_id = required_text(j, "pair_id");
  auto it = j.find("outcome");
  if (it == j.end() || !it->is_object()) violation("field \"outcome\" must be an object");
  const bool has_decided = it->contains("decided");
  const bool has_tie = it->contains("tie");
  if (has_decided == has_tie) violation("outcome must hold exactly one of \"decided\" or \"tie\"");
  if (has_decided) {
    out.outcome = Decided{required_label(it->at("decided"), "decided")};
    return;
  }
  const auto& arr = it->at("tie");
  if (!arr.is_array()) violation("field \"tie\" must be an array");
  std::array<bool, 3> present{};
  for (const auto& v : arr) {
    Label l = required_label(v, "tie");
    if (present[label_index(l)]) violation("tie lists a label twice");
    present[label_index(l)] = true;
  }
  Tie tie;
  for (Label l : kAllLabels) {
    if (present[label_index(l)]) tie.labels.push_back(l);
  }
  if (tie.labels.size() < 2) violation("a tie needs at least two labels");
  out.outcome = std::move(tie);
}

}  // namespace factgpt
