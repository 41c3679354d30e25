#include "factgpt/factgpt.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <set>
#include <string>

#include "factgpt/annotate.hpp"
#include "factgpt/classifier.hpp"
#include "factgpt/evalkit.hpp"
#include "factgpt/finetune_record.hpp"
#include "factgpt/hashing.hpp"
#include "factgpt/matcher.hpp"
#include "factgpt/service.hpp"
#include "factgpt/synthgen.hpp"

using namespace factgpt;

struct factgpt_context {
  std::shared_ptr<Gateway> gateway;
  Clock clock;
  std::size_t workers = 4;
};

struct factgpt_service {
  std::unique_ptr<Service> service;
};

namespace {

thread_local std::string g_last_message;
thread_local std::string g_last_json = "null";

factgpt_status remember(ErrorCode code, std::string message, OrderedJson detail = nullptr) {
  OrderedJson j;
  j["code"] = error_name(code);
  j["status"] = static_cast<int>(code);
  j["message"] = message;
  j["detail"] = std::move(detail);
  g_last_json = j.dump(-1, ' ', false, OrderedJson::error_handler_t::replace);
  g_last_message = std::move(message);
  return static_cast<factgpt_status>(code);
}

void clear_error() {
  g_last_message.clear();
  g_last_json = "null";
}

char* dup(std::string_view s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size());
  out[s.size()] = '\0';
  return out;
}

std::string dump(const OrderedJson& j) { return j.dump(-1, ' ', false, OrderedJson::error_handler_t::replace); }

// Runs fn, mapping exceptions to status codes and the thread's error slot.
template <class Fn>
factgpt_status guarded(Fn&& fn) {
  clear_error();
  try {
    return fn();
  } catch (const Error& e) {
    return remember(e.code(), e.what());
  } catch (const std::bad_alloc&) {
    return remember(ErrorCode::Internal, "out of memory");
  } catch (const std::exception& e) {
    return remember(ErrorCode::Internal, e.what());
  }
}

std::string_view text_or_empty(const char* s) { return s == nullptr ? std::string_view{} : std::string_view{s}; }

Json params_object(const char* params_json) {
  if (params_json == nullptr || is_blank(params_json)) return Json::object();
  Json j = Json::parse(params_json, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw Error(ErrorCode::InvalidArgument, "parameters must be a JSON object");
  return j;
}

template <class T>
T param(const Json& j, const char* key, T fallback) {
  if (!j.contains(key) || j[key].is_null()) return fallback;
  try {
    return j[key].get<T>();
  } catch (const Json::exception&) {
    throw Error(ErrorCode::InvalidArgument, std::string("parameter \"") + key + "\" has the wrong type");
  }
}

std::string required_string(const Json& j, const char* key) {
  auto v = param<std::string>(j, key, "");
  if (v.empty()) throw Error(ErrorCode::InvalidArgument, std::string("parameter \"") + key + "\" is required");
  return v;
}

template <class T>
std::vector<T> decode(const char* text, std::string_view what) {
  return decode_records_strict<T>(text_or_empty(text), what);
}

void require_ctx(factgpt_context* ctx) {
  if (ctx == nullptr) throw Error(ErrorCode::InvalidArgument, "context is null");
}

template <class T>
void require_out(T* out) {
  if (out == nullptr) throw Error(ErrorCode::InvalidArgument, "output pointer is null");
}

template <class T>
std::size_t count_lines(std::string_view text, OrderedJson& errors) {
  auto decoded = decode_records<T>(text);
  for (const auto& e : decoded.errors) {
    OrderedJson ej;
    ej["line"] = e.line;
    ej["kind"] = to_string(e.kind);
    ej["message"] = e.message;
    errors.push_back(std::move(ej));
  }
  return decoded.records.size();
}

}  // namespace

extern "C" {

const char* factgpt_version(void) { return "0.1.0"; }

const char* factgpt_status_name(factgpt_status status) {
  static thread_local std::string name;
  name = error_name(static_cast<ErrorCode>(status));
  return name.c_str();
}

int factgpt_is_provider_failure(factgpt_status status) {
  return is_provider_failure(static_cast<ErrorCode>(status)) ? 1 : 0;
}

void factgpt_string_free(char* s) { std::free(s); }

char* factgpt_sha256_hex(const char* data, size_t size) {
  try {
    return dup(sha256_hex(std::string_view(data == nullptr ? "" : data, data == nullptr ? 0 : size)));
  } catch (...) {
    return nullptr;
  }
}

const char* factgpt_last_error(void) { return g_last_message.c_str(); }

char* factgpt_last_error_json(void) {
  try {
    return dup(g_last_json);
  } catch (...) {
    return nullptr;
  }
}

factgpt_status factgpt_context_create(const char* options_json, factgpt_context** out) {
  return guarded([&] {
    require_out(out);
    const Json j = params_object(options_json);
    GatewayOptions o;
    o.provider_id = param<std::string>(j, "provider", "mock");
    if (o.provider_id.empty()) o.provider_id = "mock";
    o.base_url = param<std::string>(j, "api_base", "");
    o.api_key = param<std::string>(j, "api_key", "");
    if (j.contains("temperature_floor") && !j["temperature_floor"].is_null()) {
      o.temperature_floor = param<double>(j, "temperature_floor", 0.0);
    }
    o.requests_per_minute = param<double>(j, "requests_per_minute", o.requests_per_minute);
    o.max_in_flight = param<int>(j, "max_in_flight", o.max_in_flight);
    o.max_retries = param<int>(j, "max_retries", o.max_retries);
    o.request_timeout = std::chrono::milliseconds(param<long long>(j, "request_timeout_ms", o.request_timeout.count()));
    o.retry_base_delay =
        std::chrono::milliseconds(param<long long>(j, "retry_base_delay_ms", o.retry_base_delay.count()));
    o.retry_max_delay = std::chrono::milliseconds(param<long long>(j, "retry_max_delay_ms", o.retry_max_delay.count()));
    o.audit_log_path = param<std::string>(j, "audit_log", "");
    if (o.provider_id != "mock") o.apply_environment();

    auto ctx = std::make_unique<factgpt_context>();
    ctx->gateway = Gateway::create(std::move(o));
    const auto clock = param<std::string>(j, "clock", "system");
    ctx->clock = clock == "system" ? system_clock_source() : fixed_clock_source(clock);
    const auto workers = param<long long>(j, "workers", 4);
    if (workers < 1) throw Error(ErrorCode::InvalidArgument, "workers must be at least 1");
    ctx->workers = static_cast<std::size_t>(workers);
    *out = ctx.release();
    return FACTGPT_OK;
  });
}

void factgpt_context_destroy(factgpt_context* ctx) { delete ctx; }

factgpt_status factgpt_validate_jsonl(const char* kind, const char* text, char** report_json) {
  return guarded([&] {
    const std::string k(text_or_empty(kind));
    const auto body = text_or_empty(text);
    OrderedJson errors = OrderedJson::array();
    std::size_t n = 0;
    if (k == "claims") {
      n = count_lines<Claim>(body, errors);
    } else if (k == "posts") {
      n = count_lines<Post>(body, errors);
    } else if (k == "pairs") {
      n = count_lines<PairCandidate>(body, errors);
    } else if (k == "synthetic") {
      n = count_lines<SyntheticExample>(body, errors);
    } else if (k == "predictions") {
      n = count_lines<Prediction>(body, errors);
    } else if (k == "votes") {
      n = count_lines<VoteSet>(body, errors);
    } else if (k == "gold") {
      n = count_lines<GoldLabel>(body, errors);
    } else if (k == "finetune") {
      n = count_lines<FineTuneRecord>(body, errors);
    } else {
      throw Error(ErrorCode::InvalidArgument, "unknown record kind \"" + k + "\"");
    }
    OrderedJson report;
    report["records"] = n;
    report["errors"] = errors;
    if (!errors.empty()) {
      return remember(ErrorCode::ValidationError,
                      k + ": line " + std::to_string(errors[0]["line"].get<std::size_t>()) + ": " +
                          errors[0]["message"].get<std::string>(),
                      errors);
    }
    if (report_json != nullptr) *report_json = dup(dump(report));
    return FACTGPT_OK;
  });
}

factgpt_status factgpt_ingest_claims(const char* claims_jsonl, char** out_jsonl, char** summary_json) {
  return guarded([&] {
    require_out(out_jsonl);
    auto claims = decode<Claim>(claims_jsonl, "claims");
    std::vector<Claim> kept;
    std::set<std::string> seen;
    std::size_t skipped = 0;
    for (auto& c : claims) {
      if (!seen.insert(c.id).second) {
        ++skipped;
        continue;
      }
      kept.push_back(std::move(c));
    }
    *out_jsonl = dup(encode_records(kept));
    if (summary_json != nullptr) {
      OrderedJson s;
      s["ingested"] = kept.size();
      s["skipped_duplicates"] = skipped;
      *summary_json = dup(dump(s));
    }
    return FACTGPT_OK;
  });
}

factgpt_status factgpt_pair(factgpt_context* ctx, const char* posts_jsonl, const char* claims_jsonl,
                            const char* params_json, char** pairs_jsonl) {
  return guarded([&] {
    require_ctx(ctx);
    require_out(pairs_jsonl);
    MatcherConfig config;
    config.merge_json(params_object(params_json));
    config.validate();
    const auto posts = decode<Post>(posts_jsonl, "posts");
    const auto claims = decode<Claim>(claims_jsonl, "claims");
    EmbedderRegistry registry(ctx->gateway);
    auto embedder = registry.get(config.embedder_id);
    *pairs_jsonl = dup(encode_records(pair_candidates(posts, claims, config, *embedder, ctx->workers)));
    return FACTGPT_OK;
  });
}

factgpt_status factgpt_generate(factgpt_context* ctx, const char* claims_jsonl, const char* params_json,
                                char** synthetic_jsonl, char** summary_json) {
  return guarded([&] {
    require_ctx(ctx);
    require_out(synthetic_jsonl);
    const Json p = params_object(params_json);
    const auto model = required_string(p, "model");
    const auto claims = decode<Claim>(claims_jsonl, "claims");
    GenerateOptions options;
    options.workers = static_cast<std::size_t>(param<long long>(p, "workers", static_cast<long long>(ctx->workers)));
    options.clock = ctx->clock;
    auto result = generate_balanced_set(*ctx->gateway, claims, model, generation_defaults(model), options);

    const bool fatal = result.examples.empty() && !result.failures.empty();
    OrderedJson s;
    s["total"] = result.examples.size();
    const auto per = result.per_label();
    for (Label l : kAllLabels) s["per_label"][std::string(label_token(l))] = per[label_index(l)];
    s["balanced"] = result.balanced();
    OrderedJson failures = OrderedJson::array();
    for (const auto& f : result.failures) {
      OrderedJson fj;
      fj["claim_id"] = f.claim_id;
      fj["label"] = label_token(f.label);
      fj["code"] = error_name(f.code);
      fj["message"] = f.message;
      failures.push_back(std::move(fj));
    }
    s["failures"] = failures;
    s["warnings"] = result.warnings;
    if (fatal) {
      const auto& first = result.failures.front();
      return remember(first.code, "every generation cell failed: " + first.message, s);
    }
    *synthetic_jsonl = dup(encode_records(result.examples));
    if (summary_json != nullptr) *summary_json = dup(dump(s));
    return FACTGPT_OK;
  });
}

factgpt_status factgpt_split(const char* synthetic_jsonl, const char* params_json, char** train_jsonl,
                             char** validation_jsonl) {
  return guarded([&] {
    require_out(train_jsonl);
    require_out(validation_jsonl);
    const Json p = params_object(params_json);
    SplitConfig config;
    config.train_fraction = param<double>(p, "train_fraction", config.train_fraction);
    config.seed = param<std::uint64_t>(p, "seed", config.seed);
    config.validate();
    const auto split = split_train_validation(decode<SyntheticExample>(synthetic_jsonl, "synthetic"), config);
    auto train = encode_records(split.train);
    auto validation = encode_records(split.validation);
    *train_jsonl = dup(train);
    *validation_jsonl = dup(validation);
    return FACTGPT_OK;
  });
}

factgpt_status factgpt_export_finetune(const char* synthetic_jsonl, const char* claims_jsonl,
                                       char** finetune_jsonl) {
  return guarded([&] {
    require_out(finetune_jsonl);
    const auto examples = decode<SyntheticExample>(synthetic_jsonl, "synthetic");
    const auto claims = decode<Claim>(claims_jsonl, "claims");
    *finetune_jsonl = dup(export_finetune_jsonl(examples, claims));
    return FACTGPT_OK;
  });
}

factgpt_status factgpt_finetune_submit(factgpt_context* ctx, const char* finetune_jsonl, const char* params_json,
                                       char** job_json) {
  return guarded([&] {
    require_ctx(ctx);
    require_out(job_json);
    const Json p = params_object(params_json);
    const auto job = ctx->gateway->submit_finetune(text_or_empty(finetune_jsonl), required_string(p, "base_model"),
                                                   param<int>(p, "epochs", kDefaultEpochs));
    *job_json = dup(dump(to_json_value(job)));
    return FACTGPT_OK;
  });
}

factgpt_status factgpt_finetune_poll(factgpt_context* ctx, const char* job_id, char** job_json) {
  return guarded([&] {
    require_ctx(ctx);
    require_out(job_json);
    if (is_blank(text_or_empty(job_id))) throw Error(ErrorCode::InvalidArgument, "job id is empty");
    *job_json = dup(dump(to_json_value(ctx->gateway->poll_finetune(job_id))));
    return FACTGPT_OK;
  });
}

factgpt_status factgpt_finetune_wait(factgpt_context* ctx, const char* job_json, const char* params_json,
                                     char** final_job_json) {
  return guarded([&] {
    require_ctx(ctx);
    require_out(final_job_json);
    Json j = Json::parse(text_or_empty(job_json), nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw Error(ErrorCode::MalformedJson, "job must be a JSON object");
    FineTuneJob job;
    from_json_value(j, job);
    const Json p = params_object(params_json);
    job = wait_for_job(*ctx->gateway, job, std::chrono::milliseconds(param<long long>(p, "poll_interval_ms", 5000)),
                       param<int>(p, "max_polls", 10000));
    *final_job_json = dup(dump(to_json_value(job)));
    return FACTGPT_OK;
  });
}

factgpt_status factgpt_finetune_pipeline(factgpt_context* ctx, const char* claims_jsonl, const char* params_json,
                                         char** result_json) {
  return guarded([&] {
    require_ctx(ctx);
    require_out(result_json);
    const Json p = params_object(params_json);
    PipelineOptions o;
    o.generator_model = required_string(p, "generator_model");
    o.base_model = required_string(p, "base_model");
    o.work_dir = required_string(p, "work_dir");
    o.split.seed = param<std::uint64_t>(p, "seed", 0);
    o.split.train_fraction = param<double>(p, "train_fraction", kDefaultTrainFraction);
    o.epochs = param<int>(p, "epochs", kDefaultEpochs);
    o.wait = param<bool>(p, "wait", true);
    o.poll_interval = std::chrono::milliseconds(param<long long>(p, "poll_interval_ms", 5000));
    o.max_polls = param<int>(p, "max_polls", o.max_polls);
    o.generation = generation_defaults(o.generator_model);
    o.generate.workers = ctx->workers;
    o.generate.clock = ctx->clock;
    const auto claims = decode<Claim>(claims_jsonl, "claims");
    auto result = run_finetune_pipeline(*ctx->gateway, claims, o);
    OrderedJson out;
    out["job"] = to_json_value(result.job);
    out["manifest"] = result.manifest;
    out["skipped_stages"] = result.skipped_stages;
    *result_json = dup(dump(out));
    return FACTGPT_OK;
  });
}

factgpt_status factgpt_classify(factgpt_context* ctx, const char* pairs_jsonl, const char* posts_jsonl,
                                const char* claims_jsonl, const char* params_json, char** predictions_jsonl,
                                char** summary_json) {
  return guarded([&] {
    require_ctx(ctx);
    require_out(predictions_jsonl);
    const Json p = params_object(params_json);
    ClassifyConfig config;
    config.model_id = required_string(p, "model");
    config.parallelism = static_cast<std::size_t>(param<long long>(p, "parallelism", static_cast<long long>(ctx->workers)));
    if (p.contains("max_tokens") && !p["max_tokens"].is_null()) config.max_tokens = param<int>(p, "max_tokens", 0);
    config.validate();
    BatchOptions batch;
    batch.checkpoint_path = param<std::string>(p, "checkpoint", "");
    batch.checkpoint_every = static_cast<std::size_t>(param<long long>(p, "checkpoint_every", 1));

    const auto pairs = decode<PairCandidate>(pairs_jsonl, "pairs");
    const auto posts = decode<Post>(posts_jsonl, "posts");
    const auto claims = decode<Claim>(claims_jsonl, "claims");
    const auto resolved = resolve_pairs(pairs, posts, claims);
    const auto result = classify_batch(*ctx->gateway, resolved, config, batch);

    OrderedJson s;
    s["requested"] = result.requested;
    s["resumed"] = result.resumed;
    std::size_t unparseable = 0;
    for (const auto& pr : result.predictions) unparseable += pr.label ? 0 : 1;
    s["unlabeled"] = unparseable;
    OrderedJson errors = OrderedJson::array();
    for (const auto& e : result.errors) {
      OrderedJson ej;
      ej["pair_id"] = e.pair_id;
      ej["code"] = error_name(e.code);
      ej["message"] = e.message;
      errors.push_back(std::move(ej));
    }
    s["errors"] = errors;
    *predictions_jsonl = dup(encode_records(result.predictions));
    if (summary_json != nullptr) *summary_json = dup(dump(s));
    return FACTGPT_OK;
  });
}

factgpt_status factgpt_aggregate(const char* votes_jsonl, char** gold_jsonl, char** distribution_markdown) {
  return guarded([&] {
    require_out(gold_jsonl);
    const auto gold = aggregate_all(decode<VoteSet>(votes_jsonl, "votes"));
    auto encoded = encode_records(gold);
    if (distribution_markdown != nullptr) {
      *distribution_markdown = dup(render_distribution_markdown(distribution_report(gold)));
    }
    *gold_jsonl = dup(encoded);
    return FACTGPT_OK;
  });
}

factgpt_status factgpt_evaluate(const char* gold_jsonl, const char* predictions_jsonl, const char* params_json,
                                char** report_json) {
  return guarded([&] {
    require_out(report_json);
    const Json p = params_object(params_json);
    ScoringOptions options;
    const auto ties = param<std::string>(p, "ties", "exclude");
    if (ties == "credit_either") {
      options.ties = TiePolicy::CreditEither;
    } else if (ties != "exclude") {
      throw Error(ErrorCode::InvalidArgument, "ties must be exclude or credit_either");
    }
    const auto unparseable = param<std::string>(p, "unparseable", "count_wrong");
    if (unparseable == "exclude") {
      options.unparseable = UnparseablePolicy::Exclude;
    } else if (unparseable != "count_wrong") {
      throw Error(ErrorCode::InvalidArgument, "unparseable must be count_wrong or exclude");
    }
    const auto gold = decode<GoldLabel>(gold_jsonl, "gold");
    const auto preds = decode<Prediction>(predictions_jsonl, "predictions");
    *report_json = dup(dump(to_json_value(evaluate(gold, preds, options))));
    return FACTGPT_OK;
  });
}

factgpt_status factgpt_render_report(const char* reports_json, char** markdown) {
  return guarded([&] {
    require_out(markdown);
    Json j = Json::parse(text_or_empty(reports_json), nullptr, false);
    if (j.is_discarded() || !j.is_array()) throw Error(ErrorCode::MalformedJson, "reports must be a JSON array");
    std::vector<NamedReport> reports;
    for (const auto& item : j) {
      if (!item.is_object()) throw Error(ErrorCode::SchemaViolation, "each report entry must be an object");
      NamedReport r;
      r.model = param<std::string>(item, "model", "");
      r.train_set_from = param<std::string>(item, "train_set_from", "");
      if (!item.contains("report")) throw Error(ErrorCode::SchemaViolation, "report entry lacks \"report\"");
      from_json_value(item["report"], r.report);
      reports.push_back(std::move(r));
    }
    *markdown = dup(render_report(reports));
    return FACTGPT_OK;
  });
}

factgpt_status factgpt_parse_label(const char* raw_response, factgpt_label* label, int* ambiguous) {
  return guarded([&] {
    require_out(label);
    const auto parsed = parse_label(text_or_empty(raw_response));
    if (ambiguous != nullptr) *ambiguous = parsed && parsed->ambiguous ? 1 : 0;
    if (!parsed) {
      *label = FACTGPT_LABEL_NONE;
      return remember(ErrorCode::Unparseable, "no label token in response");
    }
    *label = static_cast<factgpt_label>(label_index(parsed->label));
    return FACTGPT_OK;
  });
}

factgpt_status factgpt_service_create(factgpt_context* ctx, const char* config_json, factgpt_service** out) {
  return guarded([&] {
    require_ctx(ctx);
    require_out(out);
    ServiceConfig config;
    config.merge_json(params_object(config_json));
    auto svc = std::make_unique<factgpt_service>();
    svc->service = std::make_unique<Service>(std::move(config), ctx->gateway, ctx->clock);
    *out = svc.release();
    return FACTGPT_OK;
  });
}

factgpt_status factgpt_service_listen(factgpt_service* svc) {
  return guarded([&] {
    if (svc == nullptr) throw Error(ErrorCode::InvalidArgument, "service is null");
    if (!svc->service->listen()) throw Error(ErrorCode::IoError, "cannot bind the service address");
    return FACTGPT_OK;
  });
}

void factgpt_service_stop(factgpt_service* svc) {
  if (svc != nullptr) svc->service->stop();
}

int factgpt_service_bound_port(const factgpt_service* svc) {
  return svc == nullptr ? 0 : svc->service->bound_port();
}

factgpt_status factgpt_service_handle(factgpt_service* svc, const char* method, const char* path,
                                      const char* query_json, const char* body, char** response_json) {
  return guarded([&] {
    if (svc == nullptr) throw Error(ErrorCode::InvalidArgument, "service is null");
    require_out(response_json);
    ServiceRequest r;
    r.method = text_or_empty(method);
    r.path = text_or_empty(path);
    const Json query = params_object(query_json);
    for (const auto& [k, v] : query.items()) {
      r.query.emplace(k, v.is_string() ? v.get<std::string>() : v.dump());
    }
    r.body = text_or_empty(body);
    const auto resp = svc->service->handle(r);
    OrderedJson j;
    j["status"] = resp.status;
    j["content_type"] = resp.content_type;
    j["body"] = resp.body;
    *response_json = dup(dump(j));
    return FACTGPT_OK;
  });
}

void factgpt_service_destroy(factgpt_service* svc) { delete svc; }

}  // extern "C"
