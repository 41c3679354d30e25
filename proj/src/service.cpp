#include "factgpt/service.hpp"

#include <algorithm>
#include <charconv>
#include <mutex>
#include <set>

#include <httplib.h>

#include "factgpt/hashing.hpp"
#include "factgpt/promptkit.hpp"

namespace factgpt {

void ServiceConfig::merge_json(const Json& j) {
  try {
    if (j.contains("host")) host = j["host"].get<std::string>();
    if (j.contains("port")) port = j["port"].get<int>();
    if (j.contains("store_dir")) store_dir = j["store_dir"].get<std::string>();
    if (j.contains("ui_dir")) ui_dir = j["ui_dir"].get<std::string>();
    if (j.contains("cors_origin")) cors_origin = j["cors_origin"].get<std::string>();
    if (j.contains("api_base")) api_base = j["api_base"].get<std::string>();
    if (j.contains("classify_model")) classify_model = j["classify_model"].get<std::string>();
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("service config: ") + e.what());
  }
  if (j.contains("matcher")) matcher.merge_json(j["matcher"]);
  matcher.validate();
}

namespace {

ServiceResponse json_reply(int status, const OrderedJson& body) {
  return {status, body.dump(-1, ' ', false, OrderedJson::error_handler_t::replace), "application/json"};
}

ServiceResponse error_reply(int status, std::string_view code, std::string_view message,
                            OrderedJson detail = nullptr) {
  OrderedJson j;
  j["code"] = code;
  j["message"] = message;
  j["detail"] = std::move(detail);
  return json_reply(status, j);
}

int http_status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotFound:
    case ErrorCode::UnknownJob: return 404;
    case ErrorCode::Conflict:
    case ErrorCode::EmptyClaimStore: return 409;
    case ErrorCode::AuthError:
    case ErrorCode::RateLimited:
    case ErrorCode::ProviderError:
    case ErrorCode::Timeout: return 502;
    case ErrorCode::Internal:
    case ErrorCode::IoError: return 500;
    default: return 400;
  }
}

std::optional<Json> parse_object(const std::string& body) {
  Json j = Json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) return std::nullopt;
  return j;
}

std::optional<std::size_t> parse_size(const std::string& s) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

constexpr std::size_t kDefaultPageSize = 20;
constexpr std::size_t kMaxPageSize = 500;

}  // namespace

Service::Service(ServiceConfig config, std::shared_ptr<Gateway> gateway, Clock clock)
    : config_(std::move(config)),
      gateway_(std::move(gateway)),
      clock_(std::move(clock)),
      store_(config_.store_dir),
      embedders_(gateway_),
      server_(std::make_unique<httplib::Server>()) {
  config_.matcher.validate();
}

Service::~Service() { stop(); }

ServiceResponse Service::handle(const ServiceRequest& r) {
  try {
    const auto& p = r.path;
    if (r.method == "OPTIONS") return {204, "", "text/plain"};
    if (p == "/healthz") return json_reply(200, OrderedJson{{"status", "ok"}});
    if (p == "/v1/claims") {
      if (r.method == "POST") return ingest_claims(r);
      if (r.method == "GET") return list_claims(r);
    } else if (p == "/v1/match") {
      if (r.method == "POST") return match(r);
    } else if (p == "/v1/review/queue") {
      if (r.method == "GET") return review_queue(r);
    } else if (p == "/v1/review/enqueue") {
      if (r.method == "POST") return review_enqueue(r);
    } else if (p == "/v1/review/gold") {
      if (r.method == "GET") return gold_export(r);
    } else if (p.starts_with("/v1/review/") && p.size() > 11) {
      if (r.method == "POST") return review_submit(r, p.substr(11));
    } else if (p == "/v1/evaluate") {
      if (r.method == "POST") return run_evaluation(r);
    } else if (p == "/v1/reports/latest") {
      if (r.method == "GET") return latest_report(r);
    } else if (p == "/v1/ui-config") {
      if (r.method == "GET") return ui_config(r);
    } else {
      return error_reply(404, "not_found", "no route for " + p);
    }
    return error_reply(405, "method_not_allowed", r.method + " not allowed on " + p);
  } catch (const Error& e) {
    return error_reply(http_status_for(e.code()), to_string(e.code()), e.what());
  } catch (const std::exception& e) {
    return error_reply(500, "internal", e.what());
  }
}

// --- claims ----------------------------------------------------------------

ServiceResponse Service::ingest_claims(const ServiceRequest& r) {
  Json body = Json::parse(r.body, nullptr, false);
  if (body.is_discarded() || !body.is_array()) {
    return error_reply(400, "schema_violation", "body must be a JSON array of claims");
  }
  std::vector<Claim> claims;
  OrderedJson problems = OrderedJson::array();
  for (std::size_t i = 0; i < body.size(); ++i) {
    try {
      if (!body[i].is_object()) throw Error(ErrorCode::SchemaViolation, "claim must be an object");
      Claim c;
      from_json_value(body[i], c);
      claims.push_back(std::move(c));
    } catch (const Error& e) {
      OrderedJson item;
      item["index"] = i;
      item["message"] = e.what();
      problems.push_back(std::move(item));
    }
  }
  if (!problems.empty()) {
    const std::string first = std::to_string(problems[0]["index"].get<std::size_t>());
    return error_reply(400, "schema_violation", "invalid claim at index " + first,
                       OrderedJson{{"errors", problems}});
  }
  const auto result = store_.upsert_claims(claims);
  OrderedJson out;
  out["ingested"] = result.ingested;
  out["skipped_duplicates"] = result.skipped_duplicates;
  return json_reply(200, out);
}

ServiceResponse Service::list_claims(const ServiceRequest&) {
  OrderedJson out = OrderedJson::array();
  for (const auto& c : store_.claims()) out.push_back(to_json_value(c));
  return json_reply(200, OrderedJson{{"claims", out}});
}

// --- match -----------------------------------------------------------------

ServiceResponse Service::match(const ServiceRequest& r) {
  auto body = parse_object(r.body);
  if (!body) return error_reply(400, "schema_violation", "body must be a JSON object");
  const auto& b = *body;
  if (!b.contains("post_text") || !b["post_text"].is_string() || is_blank(b["post_text"].get<std::string>())) {
    return error_reply(400, "schema_violation", "post_text must be a non-empty string");
  }
  MatcherConfig cfg = config_.matcher;
  if (b.contains("top_k")) {
    if (!b["top_k"].is_number_integer() || b["top_k"].get<long long>() < 1) {
      return error_reply(400, "schema_violation", "top_k must be a positive integer");
    }
    cfg.top_k = static_cast<int>(b["top_k"].get<long long>());
  }
  const bool classify = b.value("classify", false);
  std::string model = config_.classify_model;
  if (b.contains("model_id") && b["model_id"].is_string()) model = b["model_id"].get<std::string>();
  if (classify && model.empty()) return error_reply(400, "invalid_argument", "classify=true needs a model_id");

  const auto claims = store_.claims();
  if (claims.empty()) return error_reply(409, "empty_claim_store", "no claims have been ingested");

  const std::string text = b["post_text"].get<std::string>();
  const Post post{content_id("p-", text), text, std::nullopt, std::nullopt};
  auto embedder = embedders_.get(cfg.embedder_id);
  const auto candidates = pair_candidates(std::span<const Post>(&post, 1), claims, cfg, *embedder);

  std::map<std::string_view, const Claim*> by_id;
  for (const auto& c : claims) by_id.emplace(c.id, &c);

  OrderedJson list = OrderedJson::array();
  std::optional<Error> provider_failure;
  for (const auto& pc : candidates) {
    OrderedJson item;
    item["pair_id"] = pc.pair_id;
    item["claim"] = to_json_value(*by_id.at(pc.claim_id));
    item["token_score"] = pc.token_score;
    item["semantic_score"] = pc.semantic_score;
    item["combined_score"] = pc.combined_score;
    if (classify) {
      item["label"] = nullptr;
      item["ambiguous"] = false;
      if (!provider_failure) {
        try {
          ClassifyConfig cc;
          cc.model_id = model;
          const auto pred = classify_pair(*gateway_, pc.pair_id, text, by_id.at(pc.claim_id)->text, cc);
          if (pred.label) item["label"] = label_token(*pred.label);
          item["ambiguous"] = pred.ambiguous;
        } catch (const Error& e) {
          if (!is_provider_failure(e.code())) throw;
          provider_failure = e;
        }
      }
    }
    list.push_back(std::move(item));
  }

  OrderedJson out;
  out["post_id"] = post.id;
  out["candidates"] = std::move(list);
  if (provider_failure) {
    out["code"] = to_string(provider_failure->code());
    out["message"] = provider_failure->what();
    out["detail"] = nullptr;
    return json_reply(502, out);
  }
  return json_reply(200, out);
}

// --- review ----------------------------------------------------------------

std::string Service::status_of(const std::string& pair_id) const {
  auto latest = store_.latest_adjudication(pair_id);
  if (!latest) return "pending";
  return latest->decision == Decision::Confirm ? "confirmed" : "overridden";
}

OrderedJson Service::queue_item(const PairCandidate& pair) const {
  OrderedJson item;
  item["pair"] = to_json_value(pair);
  auto post = store_.post(pair.post_id);
  auto claim = store_.claim(pair.claim_id);
  auto pred = store_.prediction(pair.pair_id);
  item["post"] = post ? OrderedJson(to_json_value(*post)) : OrderedJson(nullptr);
  item["claim"] = claim ? OrderedJson(to_json_value(*claim)) : OrderedJson(nullptr);
  item["prediction"] = pred ? OrderedJson(to_json_value(*pred)) : OrderedJson(nullptr);
  item["scores"]["token_score"] = pair.token_score;
  item["scores"]["semantic_score"] = pair.semantic_score;
  item["scores"]["combined_score"] = pair.combined_score;
  item["status"] = status_of(pair.pair_id);
  OrderedJson history = OrderedJson::array();
  for (const auto& a : store_.adjudications(pair.pair_id)) history.push_back(to_json_value(a));
  item["decisions"] = std::move(history);
  return item;
}

ServiceResponse Service::review_queue(const ServiceRequest& r) {
  std::string status = "pending";
  if (auto it = r.query.find("status"); it != r.query.end()) status = it->second;
  if (status != "pending" && status != "confirmed" && status != "overridden" && status != "all") {
    return error_reply(400, "invalid_argument", "status must be pending, confirmed, overridden or all");
  }
  std::size_t limit = kDefaultPageSize, offset = 0;
  if (auto it = r.query.find("limit"); it != r.query.end()) {
    auto v = parse_size(it->second);
    if (!v || *v < 1 || *v > kMaxPageSize) {
      return error_reply(400, "invalid_argument", "limit must be an integer in [1, 500]");
    }
    limit = *v;
  }
  if (auto it = r.query.find("cursor"); it != r.query.end() && !it->second.empty()) {
    auto v = parse_size(it->second);
    if (!v) return error_reply(400, "invalid_argument", "cursor is not valid");
    offset = *v;
  }

  std::string sort = "score";
  if (auto it = r.query.find("sort"); it != r.query.end()) sort = it->second;
  if (sort != "score" && sort != "recency") {
    return error_reply(400, "invalid_argument", "sort must be score or recency");
  }

  // Store order is insertion order, so recency is its reverse.
  auto pairs = store_.pairs();
  if (sort == "recency") {
    std::reverse(pairs.begin(), pairs.end());
  } else {
    std::stable_sort(pairs.begin(), pairs.end(), [](const PairCandidate& a, const PairCandidate& b) {
      if (a.combined_score != b.combined_score) return a.combined_score > b.combined_score;
      return a.pair_id < b.pair_id;
    });
  }
  std::vector<const PairCandidate*> matching;
  for (const auto& pc : pairs) {
    if (status == "all" || status_of(pc.pair_id) == status) matching.push_back(&pc);
  }

  OrderedJson items = OrderedJson::array();
  for (std::size_t i = offset; i < matching.size() && i < offset + limit; ++i) {
    items.push_back(queue_item(*matching[i]));
  }
  OrderedJson out;
  out["items"] = std::move(items);
  out["total"] = matching.size();
  if (offset + limit < matching.size()) {
    out["next_cursor"] = std::to_string(offset + limit);
  } else {
    out["next_cursor"] = nullptr;
  }
  return json_reply(200, out);
}

ServiceResponse Service::review_enqueue(const ServiceRequest& r) {
  auto body = parse_object(r.body);
  if (!body) return error_reply(400, "schema_violation", "body must be a JSON object");
  const auto& b = *body;
  if (!b.contains("post_text") || !b["post_text"].is_string() || is_blank(b["post_text"].get<std::string>())) {
    return error_reply(400, "schema_violation", "post_text must be a non-empty string");
  }
  if (!b.contains("claim_id") || !b["claim_id"].is_string()) {
    return error_reply(400, "schema_violation", "claim_id must be a string");
  }
  const auto claim = store_.claim(b["claim_id"].get<std::string>());
  if (!claim) return error_reply(404, "not_found", "unknown claim \"" + b["claim_id"].get<std::string>() + "\"");

  Post post;
  post.text = b["post_text"].get<std::string>();
  post.id = b.contains("post_id") && b["post_id"].is_string() ? b["post_id"].get<std::string>()
                                                              : content_id("p-", post.text);
  post.origin = "review-ui";

  auto embedder = embedders_.get(config_.matcher.embedder_id);
  PairCandidate pc;
  pc.post_id = post.id;
  pc.claim_id = claim->id;
  pc.pair_id = make_pair_id(pc.post_id, pc.claim_id);
  if (auto existing = store_.pair(pc.pair_id)) return json_reply(200, queue_item(*existing));

  pc.token_score = token_similarity(tokenize(post.text), tokenize(claim->text));
  pc.semantic_score = cosine(embedder->embed(post.text), embedder->embed(claim->text));
  pc.combined_score = combined_score(pc.token_score, pc.semantic_score, config_.matcher.alpha);

  std::string model = config_.classify_model;
  if (b.contains("model_id") && b["model_id"].is_string()) model = b["model_id"].get<std::string>();
  std::optional<Prediction> prediction;
  if (b.value("classify", true) && !model.empty()) {
    ClassifyConfig cc;
    cc.model_id = model;
    prediction = classify_pair(*gateway_, pc.pair_id, post.text, claim->text, cc);
  }

  store_.upsert_posts(std::span<const Post>(&post, 1));
  store_.upsert_pairs(std::span<const PairCandidate>(&pc, 1));
  if (prediction) store_.put_predictions(std::span<const Prediction>(&*prediction, 1));
  return json_reply(201, queue_item(pc));
}

ServiceResponse Service::review_submit(const ServiceRequest& r, const std::string& pair_id) {
  auto body = parse_object(r.body);
  if (!body) return error_reply(400, "schema_violation", "body must be a JSON object");
  const auto& b = *body;
  const auto pair = store_.pair(pair_id);
  if (!pair) return error_reply(404, "not_found", "unknown pair \"" + pair_id + "\"");

  const std::string decision = b.value("decision", "");
  if (decision != "confirm" && decision != "override") {
    return error_reply(400, "invalid_argument", "decision must be confirm or override");
  }
  if (!b.contains("reviewer") || !b["reviewer"].is_string() || is_blank(b["reviewer"].get<std::string>())) {
    return error_reply(400, "invalid_argument", "reviewer must be a non-empty string");
  }
  std::optional<Label> requested;
  if (b.contains("label") && !b["label"].is_null()) {
    if (!b["label"].is_string() || !(requested = label_from_token(b["label"].get<std::string>()))) {
      return error_reply(400, "invalid_argument", "label must be ENTAILMENT, NEUTRAL or CONTRADICTION");
    }
  }
  const bool force = b.value("force", false);

  const auto prediction = store_.prediction(pair_id);
  Adjudication a;
  a.pair_id = pair_id;
  a.reviewer = b["reviewer"].get<std::string>();
  a.model_label = prediction ? prediction->label : std::nullopt;
  a.at = clock_();
  if (decision == "override") {
    if (!requested) return error_reply(400, "invalid_argument", "override requires a label");
    a.decision = Decision::Override;
    a.label = *requested;
  } else {
    if (!a.model_label) {
      return error_reply(400, "invalid_argument", "pair has no model label to confirm; use override");
    }
    a.decision = Decision::Confirm;
    a.label = *a.model_label;
  }

  {
    std::lock_guard lock(review_mutex_);
    if (store_.latest_adjudication(pair_id) && !force) {
      return error_reply(409, "conflict", "pair \"" + pair_id + "\" is already adjudicated",
                         OrderedJson{{"status", status_of(pair_id)}});
    }
    store_.append_adjudication(a);
  }
  return json_reply(200, queue_item(*pair));
}

ServiceResponse Service::gold_export(const ServiceRequest&) {
  return {200, encode_records(store_.adjudicated_gold()), "application/x-ndjson"};
}

// --- reports ---------------------------------------------------------------

ServiceResponse Service::run_evaluation(const ServiceRequest& r) {
  Json b = Json::object();
  if (!is_blank(r.body)) {
    auto parsed = parse_object(r.body);
    if (!parsed) return error_reply(400, "schema_violation", "body must be a JSON object");
    b = *parsed;
  }
  ScoringOptions options;
  const auto ties = b.value("ties", "exclude");
  if (ties == "credit_either") {
    options.ties = TiePolicy::CreditEither;
  } else if (ties != "exclude") {
    return error_reply(400, "invalid_argument", "ties must be exclude or credit_either");
  }
  const auto unparseable = b.value("unparseable", "count_wrong");
  if (unparseable == "exclude") {
    options.unparseable = UnparseablePolicy::Exclude;
  } else if (unparseable != "count_wrong") {
    return error_reply(400, "invalid_argument", "unparseable must be count_wrong or exclude");
  }
  const std::string model = b.value("model_id", "");

  const auto gold = store_.adjudicated_gold();
  if (gold.empty()) return error_reply(409, "conflict", "no adjudicated pairs to evaluate against");
  std::set<std::string_view> gold_ids;
  for (const auto& g : gold) gold_ids.insert(g.pair_id);
  std::vector<Prediction> preds;
  std::set<std::string> models;
  for (auto& p : store_.predictions()) {
    if (!gold_ids.contains(p.pair_id)) continue;
    if (!model.empty() && p.model_id != model) continue;
    models.insert(p.model_id);
    preds.push_back(std::move(p));
  }

  StoredReport stored;
  stored.report = evaluate(gold, preds, options);
  stored.manifest["models"] = models;
  stored.manifest["gold_sha256"] = sha256_hex(encode_records(gold));
  stored.manifest["predictions_sha256"] = sha256_hex(encode_records(preds));
  stored.manifest["n_gold"] = gold.size();
  stored.manifest["ties"] = ties;
  stored.manifest["unparseable"] = unparseable;
  stored.manifest["created_at"] = clock_();
  store_.persist_report(stored);

  OrderedJson out;
  out["report"] = to_json_value(stored.report);
  out["manifest"] = stored.manifest;
  return json_reply(200, out);
}

ServiceResponse Service::latest_report(const ServiceRequest&) {
  auto latest = store_.latest_report();
  if (!latest) return error_reply(404, "not_found", "no evaluation has been run yet");
  OrderedJson out;
  out["report"] = to_json_value(latest->report);
  out["manifest"] = latest->manifest;
  return json_reply(200, out);
}

ServiceResponse Service::ui_config(const ServiceRequest&) {
  OrderedJson out;
  out["api_base"] = config_.api_base;
  out["labels"] = {"ENTAILMENT", "NEUTRAL", "CONTRADICTION"};
  out["legend"]["header"] = "If TWEET is true:";
  out["legend"]["ENTAILMENT"] = "then CLAIM is also true.";
  out["legend"]["NEUTRAL"] = "CLAIM cannot be said to be true or false.";
  out["legend"]["CONTRADICTION"] = "then CLAIM is false.";
  out["classify_model"] = config_.classify_model;
  out["matcher"] = config_.matcher.to_json();
  return json_reply(200, out);
}

// --- HTTP binding ----------------------------------------------------------

bool Service::listen() {
  auto& srv = *server_;
  srv.set_default_headers({{"Access-Control-Allow-Origin", config_.cors_origin},
                           {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                           {"Access-Control-Allow-Headers", "Content-Type"}});
  if (!config_.ui_dir.empty()) srv.set_mount_point("/", config_.ui_dir.string());

  auto bridge = [this](const httplib::Request& req, httplib::Response& res) {
    ServiceRequest sr;
    sr.method = req.method;
    sr.path = req.path;
    for (const auto& [k, v] : req.params) sr.query.emplace(k, v);
    sr.body = req.body;
    auto out = handle(sr);
    res.status = out.status;
    res.set_content(out.body, out.content_type);
  };
  srv.Get(R"(/.*)", bridge);
  srv.Post(R"(/.*)", bridge);
  srv.Options(R"(/.*)", bridge);

  int port = config_.port;
  if (port == 0) {
    port = srv.bind_to_any_port(config_.host);
    if (port < 0) return false;
  } else if (!srv.bind_to_port(config_.host, port)) {
    return false;
  }
  bound_port_ = port;
  return srv.listen_after_bind();
}

void Service::stop() {
  if (server_) server_->stop();
}

}  // namespace factgpt
