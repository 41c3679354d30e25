// factgpt: batch driver over the C API.
//
// Exit codes: 0 success, 1 validation or usage failure, 2 provider failure.

#include <pthread.h>

#include <algorithm>
#include <csignal>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "factgpt/factgpt.h"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitProvider = 2;

// Carries a status out of a subcommand body to main().
struct Failure {
  factgpt_status status;
  std::string message;
  std::string json;  // machine-readable form, may be empty
};

struct OwnedString {
  char* p = nullptr;
  OwnedString() = default;
  OwnedString(const OwnedString&) = delete;
  OwnedString& operator=(const OwnedString&) = delete;
  ~OwnedString() { factgpt_string_free(p); }
  char** out() { return &p; }
  std::string str() const { return p == nullptr ? std::string() : std::string(p); }
};

void check(factgpt_status status) {
  if (status == FACTGPT_OK) return;
  OwnedString j;
  j.p = factgpt_last_error_json();
  throw Failure{status, factgpt_last_error(), j.str()};
}

[[noreturn]] void usage_error(const std::string& message) { throw Failure{FACTGPT_INVALID_ARGUMENT, message, {}}; }

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure{FACTGPT_IO_ERROR, "cannot read " + path, {}};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& content) {
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << content;
    if (!out) throw Failure{FACTGPT_IO_ERROR, "cannot write " + path, {}};
  }
  fs::rename(tmp, target);
}

std::string sha256(const std::string& data) {
  OwnedString s;
  s.p = factgpt_sha256_hex(data.data(), data.size());
  return s.str();
}

std::string env_or_empty(const char* name) {
  const char* v = std::getenv(name);
  return v == nullptr ? std::string() : std::string(v);
}

std::string rfc3339(std::time_t t) {
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// SOURCE_DATE_EPOCH pins every timestamp for reproducible builds of data.
std::optional<std::string> source_date() {
  const auto v = env_or_empty("SOURCE_DATE_EPOCH");
  if (v.empty()) return std::nullopt;
  try {
    return rfc3339(static_cast<std::time_t>(std::stoll(v)));
  } catch (const std::exception&) {
    usage_error("SOURCE_DATE_EPOCH must be an integer");
  }
}

std::string flag_key(const std::string& long_name) {
  std::string key;
  for (char c : long_name) key += c == '-' ? '_' : c;
  return key;
}

// Resolves settings with precedence flag > FACTGPT_<KEY> env > config file > default.
class Settings {
 public:
  void load_config(const std::string& path) {
    const auto text = read_text(path);
    auto j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object()) usage_error("config file " + path + " is not a JSON object");
    if (j.contains("matcher") && j["matcher"].is_object()) {
      for (auto& [k, v] : j["matcher"].items()) {
        if (!j.contains(k)) j[k] = v;
      }
    }
    config_ = std::move(j);
  }

  CLI::Option* add(CLI::App* app, const std::string& name, const std::string& help) {
    auto* opt = app->add_option("--" + name, help);
    options_[flag_key(name)].push_back(opt);
    return opt;
  }

  std::optional<std::string> raw(const std::string& key) const {
    if (auto it = options_.find(key); it != options_.end()) {
      for (auto* opt : it->second) {
        if (opt->count() > 0) return opt->as<std::string>();
      }
    }
    std::string env_name = "FACTGPT_";
    for (char c : key) env_name += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (auto v = env_or_empty(env_name.c_str()); !v.empty()) return v;
    if (config_.contains(key) && !config_[key].is_null()) {
      return config_[key].is_string() ? config_[key].get<std::string>() : config_[key].dump();
    }
    return std::nullopt;
  }

  std::string str(const std::string& key, const std::string& fallback = {}) const {
    return raw(key).value_or(fallback);
  }

  std::string required(const std::string& key) const {
    auto v = raw(key);
    if (!v || v->empty()) usage_error("--" + dashed(key) + " is required");
    return *v;
  }

  double number(const std::string& key, double fallback) const {
    auto v = raw(key);
    if (!v) return fallback;
    try {
      std::size_t used = 0;
      double d = std::stod(*v, &used);
      if (used != v->size()) throw std::invalid_argument(*v);
      return d;
    } catch (const std::exception&) {
      usage_error("--" + dashed(key) + " must be a number, got \"" + *v + "\"");
    }
  }

  long long integer(const std::string& key, long long fallback) const {
    auto v = raw(key);
    if (!v) return fallback;
    try {
      std::size_t used = 0;
      long long i = std::stoll(*v, &used);
      if (used != v->size()) throw std::invalid_argument(*v);
      return i;
    } catch (const std::exception&) {
      usage_error("--" + dashed(key) + " must be an integer, got \"" + *v + "\"");
    }
  }

 private:
  static std::string dashed(const std::string& key) {
    std::string s;
    for (char c : key) s += c == '_' ? '-' : c;
    return s;
  }

  nlohmann::json config_ = nlohmann::json::object();
  std::map<std::string, std::vector<CLI::Option*>> options_;
};

struct Globals {
  bool json = false;
  bool dry_run = false;
  std::string config_path;
};

struct Input {
  std::string name;
  std::string path;
  std::string kind;  // validation kind, empty when not JSON-lines
};

class Run {
 public:
  Run(std::string command, Settings& settings, const Globals& globals)
      : command_(std::move(command)), settings_(settings), globals_(globals) {}

  bool mock() const { return provider() == "mock"; }
  std::string provider() const { return settings_.str("provider", "mock"); }

  const std::string& read(const Input& in) {
    auto [it, inserted] = contents_.try_emplace(in.name);
    if (inserted) {
      it->second = read_text(in.path);
      inputs_.push_back(ordered_json{{"name", in.name}, {"path", in.path}, {"sha256", sha256(it->second)}});
    }
    return it->second;
  }

  // --dry-run: validate every input, write nothing.
  bool dry_run(const std::vector<Input>& inputs) {
    if (!globals_.dry_run) return false;
    ordered_json report = ordered_json::object();
    for (const auto& in : inputs) {
      const auto& text = read(in);
      if (in.kind.empty()) continue;
      OwnedString r;
      const auto status = factgpt_validate_jsonl(in.kind.c_str(), text.c_str(), r.out());
      if (status != FACTGPT_OK) {
        OwnedString j;
        j.p = factgpt_last_error_json();
        throw Failure{status, in.path + ": " + factgpt_last_error(), j.str()};
      }
      report[in.name] = ordered_json::parse(r.str());
    }
    if (globals_.json) {
      std::cout << ordered_json{{"dry_run", true}, {"inputs", report}}.dump() << "\n";
    } else {
      std::cerr << command_ << ": inputs valid (dry run, nothing written)\n";
    }
    return true;
  }

  ordered_json gateway_options() const {
    ordered_json o;
    o["provider"] = provider();
    if (auto v = settings_.raw("api_base")) o["api_base"] = *v;
    if (auto v = settings_.raw("audit_log")) o["audit_log"] = *v;
    if (settings_.raw("temperature_floor")) o["temperature_floor"] = settings_.number("temperature_floor", 0);
    if (settings_.raw("requests_per_minute")) o["requests_per_minute"] = settings_.number("requests_per_minute", 0);
    if (settings_.raw("max_retries")) o["max_retries"] = settings_.integer("max_retries", 3);
    o["workers"] = settings_.integer("workers", 4);
    return o;
  }

  factgpt_context* context() {
    if (ctx_ != nullptr) return ctx_;
    ordered_json o = gateway_options();
    // Record timestamps stay reproducible under the mock provider.
    if (auto pinned = source_date()) {
      o["clock"] = *pinned;
    } else {
      o["clock"] = mock() ? "1970-01-01T00:00:00Z" : "system";
    }
    check(factgpt_context_create(o.dump().c_str(), &ctx_));
    return ctx_;
  }

  ~Run() { factgpt_context_destroy(ctx_); }

  void output(const std::string& name, const std::string& path, const std::string& content) {
    write_text(path, content);
    outputs_[name] = ordered_json{{"path", path}, {"sha256", sha256(content)}};
    paths_.push_back(path);
  }

  // Resolved configuration recorded in the manifest.
  void config(ordered_json values, bool uses_provider) {
    if (uses_provider) values["gateway"] = gateway_options();
    config_ = std::move(values);
  }
  void note(const std::string& key, ordered_json value) { notes_[key] = std::move(value); }

  void write_manifests() {
    ordered_json m;
    m["tool"] = "factgpt";
    m["version"] = factgpt_version();
    m["command"] = command_;
    m["provider"] = provider();
    m["inputs"] = inputs_;
    m["config"] = config_;
    m["outputs"] = outputs_;
    if (!notes_.empty()) m["summary"] = notes_;
    m["written_at"] = source_date().value_or(rfc3339(std::time(nullptr)));
    const auto text = m.dump(2) + "\n";
    for (const auto& p : paths_) write_text(p + ".manifest.json", text);
  }

  void report(const ordered_json& summary, const std::string& human) const {
    if (globals_.json) {
      std::cout << summary.dump() << "\n";
    } else if (!human.empty()) {
      std::cerr << human << "\n";
    }
  }

 private:
  std::string command_;
  Settings& settings_;
  const Globals& globals_;
  factgpt_context* ctx_ = nullptr;
  std::map<std::string, std::string> contents_;
  ordered_json inputs_ = ordered_json::array();
  ordered_json outputs_ = ordered_json::object();
  ordered_json config_ = ordered_json::object();
  ordered_json notes_ = ordered_json::object();
  std::vector<std::string> paths_;
};

// --- subcommands -----------------------------------------------------------

int cmd_ingest_claims(Settings& s, const Globals& g) {
  Run run("ingest-claims", s, g);
  const Input in{"claims", s.required("in"), "claims"};
  if (run.dry_run({in})) return kExitOk;
  OwnedString out, summary;
  check(factgpt_ingest_claims(run.read(in).c_str(), out.out(), summary.out()));
  const auto sum = ordered_json::parse(summary.str());
  run.output("claims", s.required("out"), out.str());
  run.config(ordered_json::object(), false);
  run.note("ingest", sum);
  run.write_manifests();
  run.report(sum, "ingest-claims: " + sum["ingested"].dump() + " ingested, " + sum["skipped_duplicates"].dump() +
                      " duplicates skipped");
  return kExitOk;
}

int cmd_pair(Settings& s, const Globals& g) {
  Run run("pair", s, g);
  const Input posts{"posts", s.required("posts"), "posts"};
  const Input claims{"claims", s.required("claims"), "claims"};
  ordered_json params;
  params["alpha"] = s.number("alpha", 0.5);
  params["top_k"] = s.integer("top_k", 1);
  params["min_combined_score"] = s.number("min_combined_score", 0.0);
  params["embedder_id"] = s.str("embedder_id", "offline-ngram");
  const auto out_path = s.required("out");
  if (run.dry_run({posts, claims})) return kExitOk;
  OwnedString out;
  check(factgpt_pair(run.context(), run.read(posts).c_str(), run.read(claims).c_str(), params.dump().c_str(),
                     out.out()));
  const auto text = out.str();
  const auto n = static_cast<long long>(std::count(text.begin(), text.end(), '\n'));
  run.output("pairs", out_path, text);
  run.config(params, true);
  run.note("pairs", n);
  run.write_manifests();
  run.report(ordered_json{{"pairs", n}}, "pair: " + std::to_string(n) + " candidate pairs");
  return kExitOk;
}

int cmd_generate(Settings& s, const Globals& g) {
  Run run("generate", s, g);
  const Input claims{"claims", s.required("claims"), "claims"};
  const auto model = s.required("model");
  const auto out_path = s.required("out");
  if (run.dry_run({claims})) return kExitOk;
  OwnedString out, summary;
  const ordered_json params{{"model", model}, {"workers", s.integer("workers", 4)}};
  check(factgpt_generate(run.context(), run.read(claims).c_str(), params.dump().c_str(), out.out(), summary.out()));
  const auto sum = ordered_json::parse(summary.str());
  run.output("synthetic", out_path, out.str());
  run.config(params, true);
  run.note("generation", sum);
  run.write_manifests();
  for (const auto& w : sum["warnings"]) std::cerr << "generate: warning: " << w.get<std::string>() << "\n";
  run.report(sum, "generate: " + sum["total"].dump() + " examples, per label " + sum["per_label"].dump());
  return sum["failures"].empty() ? kExitOk : kExitProvider;
}

int cmd_export_finetune(Settings& s, const Globals& g, bool split) {
  Run run("export-finetune", s, g);
  const Input synthetic{"synthetic", s.required("synthetic"), "synthetic"};
  const Input claims{"claims", s.required("claims"), "claims"};
  const auto out_path = s.required("out");
  const auto validation_path = s.str("validation_out");
  if (split && validation_path.empty()) usage_error("--split needs --validation-out");
  if (run.dry_run({synthetic, claims})) return kExitOk;

  std::string train_examples = run.read(synthetic), validation_examples;
  if (split) {
    ordered_json params{{"train_fraction", s.number("train_fraction", 0.8)},
                        {"seed", static_cast<std::uint64_t>(s.integer("seed", 0))}};
    OwnedString train, validation;
    check(factgpt_split(train_examples.c_str(), params.dump().c_str(), train.out(), validation.out()));
    train_examples = train.str();
    validation_examples = validation.str();
  }
  OwnedString train_records;
  check(factgpt_export_finetune(train_examples.c_str(), run.read(claims).c_str(), train_records.out()));
  run.output("finetune", out_path, train_records.str());
  ordered_json sum;
  sum["train_records"] = std::count(train_examples.begin(), train_examples.end(), '\n');
  if (split) {
    OwnedString validation_records;
    check(factgpt_export_finetune(validation_examples.c_str(), run.read(claims).c_str(), validation_records.out()));
    run.output("validation", validation_path, validation_records.str());
    sum["validation_records"] = std::count(validation_examples.begin(), validation_examples.end(), '\n');
  }
  ordered_json cfg{{"split", split}};
  if (split) {
    cfg["train_fraction"] = s.number("train_fraction", 0.8);
    cfg["seed"] = static_cast<std::uint64_t>(s.integer("seed", 0));
  }
  run.config(cfg, false);
  run.note("export", sum);
  run.write_manifests();
  run.report(sum, "export-finetune: " + sum.dump());
  return kExitOk;
}

int cmd_finetune(Settings& s, const Globals& g, bool no_wait) {
  Run run("finetune", s, g);
  const long long poll_ms = s.integer("poll_interval_ms", run.mock() ? 0 : 5000);
  const auto out_path = s.str("out");
  OwnedString job;

  if (auto job_id = s.raw("job_id")) {
    if (run.dry_run({})) return kExitOk;
    check(factgpt_finetune_poll(run.context(), job_id->c_str(), job.out()));
    if (!no_wait) {
      const ordered_json params{{"poll_interval_ms", poll_ms}};
      OwnedString final_job;
      check(factgpt_finetune_wait(run.context(), job.str().c_str(), params.dump().c_str(), final_job.out()));
      std::swap(job.p, final_job.p);
    }
  } else if (auto file = s.raw("file")) {
    const Input in{"finetune", *file, "finetune"};
    const auto base_model = s.required("base_model");
    if (run.dry_run({in})) return kExitOk;
    const ordered_json params{{"base_model", base_model}, {"epochs", s.integer("epochs", 3)}};
    check(factgpt_finetune_submit(run.context(), run.read(in).c_str(), params.dump().c_str(), job.out()));
    if (!no_wait) {
      OwnedString final_job;
      check(factgpt_finetune_wait(run.context(), job.str().c_str(),
                                  ordered_json{{"poll_interval_ms", poll_ms}}.dump().c_str(), final_job.out()));
      std::swap(job.p, final_job.p);
    }
  } else {
    const Input claims{"claims", s.required("claims"), "claims"};
    ordered_json params;
    params["generator_model"] = s.required("generator_model");
    params["base_model"] = s.required("base_model");
    params["work_dir"] = s.required("work_dir");
    params["seed"] = static_cast<std::uint64_t>(s.integer("seed", 0));
    params["train_fraction"] = s.number("train_fraction", 0.8);
    params["epochs"] = s.integer("epochs", 3);
    params["wait"] = !no_wait;
    params["poll_interval_ms"] = poll_ms;
    if (run.dry_run({claims})) return kExitOk;
    OwnedString result;
    check(factgpt_finetune_pipeline(run.context(), run.read(claims).c_str(), params.dump().c_str(), result.out()));
    const auto r = ordered_json::parse(result.str());
    const auto job_text = r["job"].dump();
    if (!out_path.empty()) run.output("job", out_path, r["job"].dump(2) + "\n");
    run.config(params, true);
    run.note("skipped_stages", r["skipped_stages"]);
    run.write_manifests();
    run.report(r, "finetune: job " + r["job"]["job_id"].get<std::string>() + " is " +
                      r["job"]["status"].get<std::string>());
    if (g.json == false) std::cout << job_text << "\n";
    return r["job"]["status"] == "failed" || r["job"]["status"] == "cancelled" ? kExitProvider : kExitOk;
  }

  const auto j = ordered_json::parse(job.str());
  if (!out_path.empty()) run.output("job", out_path, j.dump(2) + "\n");
  run.config(ordered_json{{"base_model", s.str("base_model")}, {"epochs", s.integer("epochs", 3)}, {"poll_interval_ms", poll_ms}, {"wait", !no_wait}}, true);
  run.write_manifests();
  run.report(j, "finetune: job " + j["job_id"].get<std::string>() + " is " + j["status"].get<std::string>());
  if (!g.json) std::cout << j.dump() << "\n";
  return j["status"] == "failed" || j["status"] == "cancelled" ? kExitProvider : kExitOk;
}

int cmd_classify(Settings& s, const Globals& g) {
  Run run("classify", s, g);
  const Input pairs{"pairs", s.required("pairs"), "pairs"};
  const Input posts{"posts", s.required("posts"), "posts"};
  const Input claims{"claims", s.required("claims"), "claims"};
  const auto model = s.required("model");
  const auto out_path = s.required("out");
  if (run.dry_run({pairs, posts, claims})) return kExitOk;
  ordered_json params;
  params["model"] = model;
  params["parallelism"] = s.integer("parallelism", s.integer("workers", 4));
  if (auto cp = s.raw("checkpoint")) params["checkpoint"] = *cp;
  OwnedString out, summary;
  check(factgpt_classify(run.context(), run.read(pairs).c_str(), run.read(posts).c_str(), run.read(claims).c_str(),
                         params.dump().c_str(), out.out(), summary.out()));
  const auto sum = ordered_json::parse(summary.str());
  run.output("predictions", out_path, out.str());
  run.config(params, true);
  run.note("classification", sum);
  run.write_manifests();
  for (const auto& e : sum["errors"]) {
    std::cerr << "classify: " << e["pair_id"].get<std::string>() << ": " << e["message"].get<std::string>() << "\n";
  }
  run.report(sum, "classify: " + sum["requested"].dump() + " requested, " + sum["resumed"].dump() +
                      " resumed, " + sum["unlabeled"].dump() + " without a label");
  return sum["errors"].empty() ? kExitOk : kExitProvider;
}

int cmd_aggregate(Settings& s, const Globals& g) {
  Run run("aggregate", s, g);
  const Input votes{"votes", s.required("votes"), "votes"};
  const auto out_path = s.required("out");
  if (run.dry_run({votes})) return kExitOk;
  OwnedString gold, table;
  check(factgpt_aggregate(run.read(votes).c_str(), gold.out(), table.out()));
  run.output("gold", out_path, gold.str());
  if (auto dist = s.raw("distribution")) run.output("distribution", *dist, table.str());
  run.config(ordered_json::object(), false);
  run.write_manifests();
  if (g.json) {
    run.report(ordered_json{{"distribution", table.str()}}, "");
  } else {
    std::cout << table.str();
  }
  return kExitOk;
}

std::string first_model_id(const std::string& predictions) {
  std::istringstream in(predictions);
  std::string line;
  while (std::getline(in, line)) {
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_object() && j.contains("model_id") && j["model_id"].is_string()) return j["model_id"];
  }
  return "model";
}

int cmd_evaluate(Settings& s, const Globals& g) {
  Run run("evaluate", s, g);
  const Input gold{"gold", s.required("gold"), "gold"};
  const Input pred{"predictions", s.required("pred"), "predictions"};
  const auto out_path = s.required("out");
  if (run.dry_run({gold, pred})) return kExitOk;
  const ordered_json params{{"ties", s.str("ties", "exclude")}, {"unparseable", s.str("unparseable", "count_wrong")}};
  OwnedString report;
  check(factgpt_evaluate(run.read(gold).c_str(), run.read(pred).c_str(), params.dump().c_str(), report.out()));
  ordered_json named;
  named["model"] = s.str("model_name", first_model_id(run.read(pred)));
  named["train_set_from"] = s.str("train_set_from");
  named["report"] = ordered_json::parse(report.str());
  OwnedString md;
  check(factgpt_render_report(ordered_json::array({named}).dump().c_str(), md.out()));
  run.output("report", out_path, md.str());
  if (auto jp = s.raw("report_json")) run.output("report_json", *jp, named.dump(2) + "\n");
  ordered_json cfg = params;
  cfg["model_name"] = named["model"];
  cfg["train_set_from"] = named["train_set_from"];
  run.config(cfg, false);
  run.write_manifests();
  if (g.json) {
    run.report(named, "");
  } else {
    std::cout << md.str();
  }
  return kExitOk;
}

int cmd_report(Settings& s, const Globals& g, const std::vector<std::string>& inputs) {
  Run run("report", s, g);
  if (inputs.empty()) usage_error("--in is required");
  const auto out_path = s.required("out");
  std::vector<Input> ins;
  for (std::size_t i = 0; i < inputs.size(); ++i) ins.push_back({"report_" + std::to_string(i), inputs[i], ""});
  if (run.dry_run(ins)) return kExitOk;
  ordered_json all = ordered_json::array();
  for (const auto& in : ins) {
    auto j = ordered_json::parse(run.read(in), nullptr, false);
    if (j.is_discarded()) throw Failure{FACTGPT_MALFORMED_JSON, in.path + " is not JSON", {}};
    auto add = [&](ordered_json item) {
      if (item.is_object() && item.contains("per_class")) {
        item = ordered_json{{"model", fs::path(in.path).stem().string()}, {"train_set_from", ""}, {"report", item}};
      }
      all.push_back(std::move(item));
    };
    if (j.is_array()) {
      for (auto& item : j) add(item);
    } else {
      add(j);
    }
  }
  OwnedString md;
  check(factgpt_render_report(all.dump().c_str(), md.out()));
  run.output("report", out_path, md.str());
  run.config(ordered_json::object(), false);
  run.write_manifests();
  if (g.json) {
    run.report(ordered_json{{"markdown", md.str()}}, "");
  } else {
    std::cout << md.str();
  }
  return kExitOk;
}

int cmd_serve(Settings& s, const Globals& g) {
  Run run("serve", s, g);
  ordered_json config;
  config["host"] = s.str("host", "127.0.0.1");
  config["port"] = s.integer("port", 8080);
  if (auto v = s.raw("store_dir")) config["store_dir"] = *v;
  if (auto v = s.raw("ui_dir")) config["ui_dir"] = *v;
  config["cors_origin"] = s.str("cors_origin", "*");
  if (auto v = s.raw("classify_model")) config["classify_model"] = *v;
  config["matcher"] = ordered_json{{"alpha", s.number("alpha", 0.5)},
                                   {"top_k", s.integer("top_k", 1)},
                                   {"min_combined_score", s.number("min_combined_score", 0.0)},
                                   {"embedder_id", s.str("embedder_id", "offline-ngram")}};
  if (g.dry_run) {
    run.report(ordered_json{{"dry_run", true}, {"config", config}}, "serve: configuration valid (dry run)");
    return kExitOk;
  }
  // Signals are taken synchronously by a watcher thread; worker threads
  // inherit the blocked mask.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  factgpt_service* svc = nullptr;
  check(factgpt_service_create(run.context(), config.dump().c_str(), &svc));
  std::thread watcher([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    factgpt_service_stop(svc);
  });
  std::cerr << "serve: listening on " << config["host"].get<std::string>() << ":" << config["port"].dump() << "\n";
  const auto status = factgpt_service_listen(svc);
  // Wake the watcher if listen returned on its own.
  pthread_kill(watcher.native_handle(), SIGTERM);
  watcher.join();
  factgpt_service_destroy(svc);
  check(status);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Claim matching, synthetic data, fine-tuning and evaluation toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string(factgpt_version()));

  Settings s;
  Globals g;
  s.add(&app, "provider", "Provider id: mock (offline) or live (or a named provider such as huggingface)");
  s.add(&app, "api-base", "Provider base URL (env FACTGPT_API_BASE)");
  s.add(&app, "seed", "Seed for the stratified train/validation split");
  s.add(&app, "workers", "Parallel provider requests");
  s.add(&app, "temperature-floor", "Override the provider temperature floor");
  s.add(&app, "requests-per-minute", "Client-side rate limit (0 = off)");
  s.add(&app, "max-retries", "Retries for throttled or failed provider calls");
  s.add(&app, "audit-log", "Append every provider request to this JSON-lines file");
  app.add_option("--config", g.config_path, "JSON config file; keys mirror the long flags with underscores");
  app.add_flag("--json", g.json, "Machine-readable output and errors");
  app.add_flag("--dry-run", g.dry_run, "Validate inputs and write nothing");

  auto* ingest = app.add_subcommand("ingest-claims", "Validate and normalize a claims file");
  s.add(ingest, "in", "Claims JSON-lines")->check(CLI::ExistingFile);
  s.add(ingest, "out", "Normalized claims output");

  auto* pair = app.add_subcommand("pair", "Rank candidate claims for each post");
  s.add(pair, "posts", "Posts JSON-lines")->check(CLI::ExistingFile);
  s.add(pair, "claims", "Claims JSON-lines")->check(CLI::ExistingFile);
  s.add(pair, "top-k", "Candidates kept per post");
  s.add(pair, "alpha", "Weight of the token score in the combined score");
  s.add(pair, "min-combined-score", "Drop candidates below this score");
  s.add(pair, "embedder-id", "offline-ngram or remote:<model>");
  s.add(pair, "out", "Pairs output");

  auto* generate = app.add_subcommand("generate", "Generate a label-balanced synthetic set");
  s.add(generate, "claims", "Claims JSON-lines")->check(CLI::ExistingFile);
  s.add(generate, "model", "Generator model id");
  s.add(generate, "out", "Synthetic examples output");

  bool split = false;
  auto* exporter = app.add_subcommand("export-finetune", "Write fine-tune chat records");
  s.add(exporter, "synthetic", "Synthetic examples JSON-lines")->check(CLI::ExistingFile);
  s.add(exporter, "claims", "Claims JSON-lines")->check(CLI::ExistingFile);
  s.add(exporter, "out", "Fine-tune records output (the train part with --split)");
  exporter->add_flag("--split", split, "Split train/validation first (uses --seed, --train-fraction)");
  s.add(exporter, "train-fraction", "Train share for --split");
  s.add(exporter, "validation-out", "Validation records output for --split");

  bool no_wait = false;
  auto* finetune = app.add_subcommand("finetune", "Run or poll a hosted fine-tune job");
  s.add(finetune, "claims", "Claims for the full generate-split-export-submit pipeline");
  s.add(finetune, "generator-model", "Model used to generate synthetic tweets");
  s.add(finetune, "work-dir", "Directory for pipeline artifacts (reruns resume)");
  s.add(finetune, "file", "Submit an existing fine-tune JSON-lines file instead");
  s.add(finetune, "job-id", "Poll an existing job instead");
  s.add(finetune, "base-model", "Model to fine-tune");
  s.add(finetune, "epochs", "Training epochs");
  s.add(finetune, "train-fraction", "Train share of the synthetic set");
  s.add(finetune, "poll-interval-ms", "Delay between status polls");
  s.add(finetune, "out", "Write the final job JSON here");
  finetune->add_flag("--no-wait", no_wait, "Return as soon as the job is submitted");

  auto* classify = app.add_subcommand("classify", "Label post-claim pairs");
  s.add(classify, "pairs", "Pairs JSON-lines")->check(CLI::ExistingFile);
  s.add(classify, "posts", "Posts JSON-lines")->check(CLI::ExistingFile);
  s.add(classify, "claims", "Claims JSON-lines")->check(CLI::ExistingFile);
  s.add(classify, "model", "Classifier model id");
  s.add(classify, "parallelism", "Concurrent requests");
  s.add(classify, "checkpoint", "Resume file; completed pairs are skipped on rerun");
  s.add(classify, "out", "Predictions output");

  auto* aggregate = app.add_subcommand("aggregate", "Majority-vote annotator labels");
  s.add(aggregate, "votes", "Vote sets JSON-lines")->check(CLI::ExistingFile);
  s.add(aggregate, "out", "Gold labels output");
  s.add(aggregate, "distribution", "Also write the label distribution table here");

  auto* evaluate = app.add_subcommand("evaluate", "Score predictions against gold labels");
  s.add(evaluate, "gold", "Gold labels JSON-lines")->check(CLI::ExistingFile);
  s.add(evaluate, "pred", "Predictions JSON-lines")->check(CLI::ExistingFile);
  s.add(evaluate, "ties", "exclude (default) or credit_either");
  s.add(evaluate, "unparseable", "count_wrong (default) or exclude");
  s.add(evaluate, "model-name", "Row name in the report (default: first prediction's model id)");
  s.add(evaluate, "train-set-from", "Origin of the fine-tuning set, if any");
  s.add(evaluate, "report-json", "Also write the machine-readable report here");
  s.add(evaluate, "out", "Markdown report output");

  std::vector<std::string> report_inputs;
  auto* report = app.add_subcommand("report", "Render report JSON files as one markdown document");
  report->add_option("--in", report_inputs, "Report JSON written by evaluate --report-json (repeatable)")
      ->check(CLI::ExistingFile);
  s.add(report, "out", "Markdown output");

  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  s.add(serve, "host", "Bind address");
  s.add(serve, "port", "Port (0 picks a free one)");
  s.add(serve, "store-dir", "Persistent store directory");
  s.add(serve, "ui-dir", "Static files for the review console");
  s.add(serve, "cors-origin", "Access-Control-Allow-Origin value");
  s.add(serve, "classify-model", "Default model for classify requests");
  s.add(serve, "alpha", "Matcher token weight");
  s.add(serve, "top-k", "Default candidates per probe");
  s.add(serve, "min-combined-score", "Matcher threshold");
  s.add(serve, "embedder-id", "offline-ngram or remote:<model>");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (!g.config_path.empty()) s.load_config(g.config_path);
    if (*ingest) return cmd_ingest_claims(s, g);
    if (*pair) return cmd_pair(s, g);
    if (*generate) return cmd_generate(s, g);
    if (*exporter) return cmd_export_finetune(s, g, split);
    if (*finetune) return cmd_finetune(s, g, no_wait);
    if (*classify) return cmd_classify(s, g);
    if (*aggregate) return cmd_aggregate(s, g);
    if (*evaluate) return cmd_evaluate(s, g);
    if (*report) return cmd_report(s, g, report_inputs);
    if (*serve) return cmd_serve(s, g);
  } catch (const Failure& f) {
    if (g.json) {
      std::cerr << (f.json.empty() || f.json == "null"
                        ? ordered_json{{"code", factgpt_status_name(f.status)},
                                       {"status", static_cast<int>(f.status)},
                                       {"message", f.message},
                                       {"detail", nullptr}}
                              .dump()
                        : f.json)
                << "\n";
    } else {
      std::cerr << "factgpt: error: " << f.message << "\n";
    }
    return factgpt_is_provider_failure(f.status) ? kExitProvider : kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "factgpt: error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitValidation;
}
