#include "factgpt/gateway.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <thread>

#include <httplib.h>

#include "factgpt/finetune_record.hpp"
#include "factgpt/hashing.hpp"
#include "factgpt/matcher.hpp"

namespace factgpt {

// --- configuration ---------------------------------------------------------

void GenerationConfig::validate() const {
  if (model_id.empty()) throw Error(ErrorCode::InvalidArgument, "model_id must be set");
  if (!(temperature >= 0.0 && temperature <= 2.0)) {
    throw Error(ErrorCode::InvalidArgument, "temperature must lie in [0, 2]");
  }
  if (max_tokens && *max_tokens <= 0) throw Error(ErrorCode::InvalidArgument, "max_tokens must be positive");
  if (max_retries < 0) throw Error(ErrorCode::InvalidArgument, "max_retries must be >= 0");
}

namespace {

bool contains_ci(std::string_view haystack, std::string_view needle) {
  auto it = std::search(haystack.begin(), haystack.end(), needle.begin(), needle.end(),
                        [](char a, char b) {
                          return std::tolower(static_cast<unsigned char>(a)) ==
                                 std::tolower(static_cast<unsigned char>(b));
                        });
  return it != haystack.end();
}

}  // namespace

double default_temperature_floor(std::string_view provider_id, std::string_view model_id) {
  if (provider_id == "huggingface" || contains_ci(model_id, "llama")) return kLlamaTemperatureFloor;
  return 0.0;
}

void GatewayOptions::apply_environment() {
  if (api_key.empty()) {
    if (const char* v = std::getenv("FACTGPT_API_KEY")) api_key = v;
  }
  if (base_url.empty()) {
    if (const char* v = std::getenv("FACTGPT_API_BASE")) base_url = v;
  }
}

// --- jobs ------------------------------------------------------------------

std::string_view to_string(JobStatus s) noexcept {
  switch (s) {
    case JobStatus::Queued: return "queued";
    case JobStatus::Running: return "running";
    case JobStatus::Succeeded: return "succeeded";
    case JobStatus::Failed: return "failed";
    case JobStatus::Cancelled: return "cancelled";
  }
  return "queued";
}

std::optional<JobStatus> job_status_from_string(std::string_view s) noexcept {
  // Provider-side pre-queue states collapse into queued.
  if (s == "queued" || s == "validating_files" || s == "pending" || s == "created") return JobStatus::Queued;
  if (s == "running") return JobStatus::Running;
  if (s == "succeeded") return JobStatus::Succeeded;
  if (s == "failed") return JobStatus::Failed;
  if (s == "cancelled") return JobStatus::Cancelled;
  return std::nullopt;
}

OrderedJson to_json_value(const FineTuneJob& job) {
  OrderedJson j;
  j["job_id"] = job.job_id;
  j["base_model"] = job.base_model;
  j["status"] = to_string(job.status);
  j["epochs"] = job.epochs;
  if (job.fine_tuned_model_id) j["fine_tuned_model_id"] = *job.fine_tuned_model_id;
  return j;
}

void from_json_value(const Json& j, FineTuneJob& out) {
  try {
    out.job_id = j.at("job_id").get<std::string>();
    out.base_model = j.at("base_model").get<std::string>();
    auto status = job_status_from_string(j.at("status").get<std::string>());
    if (!status) throw Error(ErrorCode::SchemaViolation, "unknown job status");
    out.status = *status;
    out.epochs = j.value("epochs", kDefaultEpochs);
    out.fine_tuned_model_id.reset();
    if (j.contains("fine_tuned_model_id") && !j["fine_tuned_model_id"].is_null()) {
      out.fine_tuned_model_id = j["fine_tuned_model_id"].get<std::string>();
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::SchemaViolation, std::string("fine-tune job: ") + e.what());
  }
  if (out.fine_tuned_model_id.has_value() != (out.status == JobStatus::Succeeded)) {
    throw Error(ErrorCode::SchemaViolation, "fine_tuned_model_id must be present exactly when succeeded");
  }
}

// --- token bucket ----------------------------------------------------------

TokenBucket::TokenBucket(double per_minute)
    : capacity_(std::max(per_minute, 0.0)),
      per_second_(std::max(per_minute, 0.0) / 60.0),
      tokens_(capacity_),
      last_(std::chrono::steady_clock::now()) {}

void TokenBucket::acquire() {
  if (capacity_ <= 0.0) return;
  std::unique_lock lock(mutex_);
  for (;;) {
    const auto now = std::chrono::steady_clock::now();
    const double elapsed = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    tokens_ = std::min(capacity_, tokens_ + elapsed * per_second_);
    if (tokens_ >= 1.0) {
      tokens_ -= 1.0;
      return;
    }
    const auto wait = std::chrono::duration<double>((1.0 - tokens_) / per_second_);
    lock.unlock();
    std::this_thread::sleep_for(wait);
    lock.lock();
  }
}

// --- HTTP transport --------------------------------------------------------

HttpTransport::HttpTransport(std::string base_url) {
  while (!base_url.empty() && base_url.back() == '/') base_url.pop_back();
  const auto scheme_end = base_url.find("://");
  if (scheme_end == std::string::npos || base_url.empty()) {
    throw Error(ErrorCode::InvalidArgument, "provider base URL must look like https://host/prefix");
  }
  const auto path_start = base_url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) {
    scheme_host_port_ = base_url;
  } else {
    scheme_host_port_ = base_url.substr(0, path_start);
    path_prefix_ = base_url.substr(path_start);
  }
}

HttpResponse HttpTransport::send(const HttpRequest& request) {
  httplib::Client client(scheme_host_port_);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(request.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(request.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());

  httplib::Headers headers;
  for (const auto& [k, v] : request.headers) headers.emplace(k, v);
  const std::string path = path_prefix_ + request.path;

  httplib::Result result;
  if (request.method == "GET") {
    result = client.Get(path, headers);
  } else if (!request.multipart.empty()) {
    httplib::MultipartFormDataItems items;
    for (const auto& f : request.multipart) items.push_back({f.name, f.content, f.filename, f.content_type});
    result = client.Post(path, headers, items);
  } else {
    result = client.Post(path, headers, request.body, request.content_type);
  }
  if (!result) {
    const auto err = result.error();
    if (err == httplib::Error::Read || err == httplib::Error::ConnectionTimeout) {
      throw Error(ErrorCode::Timeout, "request to " + path + " timed out");
    }
    throw Error(ErrorCode::ProviderError, "request to " + path + " failed: " + httplib::to_string(err), 0, "");
  }
  return {result->status, result->body};
}

// --- mock provider ---------------------------------------------------------

namespace {

constexpr std::string_view kGenerationHead = "Generate TWEET so that if TWEET is true, ";
constexpr std::string_view kGenerationTail = ". Be brief.";

HttpResponse json_response(int status, const OrderedJson& body) { return {status, body.dump()}; }

HttpResponse error_response(int status, std::string_view message) {
  OrderedJson j;
  j["error"]["message"] = message;
  return json_response(status, j);
}

std::string short_hash(std::string_view data, std::size_t digits = 12) {
  return sha256_hex(data).substr(0, digits);
}

}  // namespace

std::string mock_chat_response(std::string_view system, std::string_view user) {
  // (a) explicit sentinel
  std::size_t best = std::string_view::npos;
  std::optional<Label> sentinel;
  for (Label l : kAllLabels) {
    const std::string tag = "[[" + std::string(label_token(l)) + "]]";
    const auto pos = user.find(tag);
    if (pos != std::string_view::npos && pos < best) {
      best = pos;
      sentinel = l;
    }
  }
  if (sentinel) return std::string(label_token(*sentinel));

  // (b) entailment prompt
  if (system == entailment_system_prompt() || user.starts_with("TWEET: ")) {
    return std::string(label_token(kAllLabels[stable_hash64(user) % 3]));
  }

  // (c) generation prompt
  std::string key(system);
  key += '\n';
  key += user;
  if (system.starts_with(kGenerationHead)) {
    auto clause = system.substr(kGenerationHead.size());
    clause = clause.substr(0, clause.find(kGenerationTail));
    return "MOCK TWEET " + short_hash(key) + " " + std::string(clause);
  }
  return "MOCK RESPONSE " + short_hash(key);
}

HttpResponse MockTransport::send(const HttpRequest& request) {
  if (request.method == "GET") {
    constexpr std::string_view kJobs = "/fine_tuning/jobs/";
    if (request.path.starts_with(kJobs)) return get_job(request.path.substr(kJobs.size()));
    return error_response(404, "no such route");
  }
  if (request.path == "/files") return upload(request);

  Json body = Json::parse(request.body, nullptr, false);
  if (body.is_discarded() || !body.is_object()) return error_response(400, "body must be a JSON object");
  if (request.path == "/chat/completions") return chat(body);
  if (request.path == "/embeddings") return embeddings(body);
  if (request.path == "/fine_tuning/jobs") return create_job(body);
  return error_response(404, "no such route");
}

HttpResponse MockTransport::chat(const Json& body) {
  if (!body.contains("messages") || !body["messages"].is_array()) {
    return error_response(400, "messages must be an array");
  }
  std::string system, user;
  for (const auto& m : body["messages"]) {
    const auto role = m.value("role", "");
    if (role == "system") system = m.value("content", "");
    if (role == "user") user = m.value("content", "");
  }
  const std::string content = mock_chat_response(system, user);
  OrderedJson out;
  out["id"] = "mock-chat-" + short_hash(system + "\n" + user);
  out["object"] = "chat.completion";
  out["model"] = body.value("model", "mock");
  OrderedJson choice;
  choice["index"] = 0;
  choice["message"]["role"] = "assistant";
  choice["message"]["content"] = content;
  choice["finish_reason"] = "stop";
  out["choices"] = OrderedJson::array({choice});
  return json_response(200, out);
}

HttpResponse MockTransport::embeddings(const Json& body) {
  if (!body.contains("input") || !body["input"].is_array() || body["input"].empty()) {
    return error_response(400, "input must be a non-empty array");
  }
  OrderedJson out;
  out["object"] = "list";
  out["data"] = OrderedJson::array();
  std::size_t i = 0;
  for (const auto& t : body["input"]) {
    if (!t.is_string()) return error_response(400, "input entries must be strings");
    OrderedJson item;
    item["object"] = "embedding";
    item["index"] = i++;
    item["embedding"] = offline_embed(t.get<std::string>());
    out["data"].push_back(std::move(item));
  }
  out["model"] = body.value("model", "mock");
  return json_response(200, out);
}

HttpResponse MockTransport::upload(const HttpRequest& request) {
  const MultipartField* file = nullptr;
  for (const auto& f : request.multipart) {
    if (f.name == "file") file = &f;
  }
  if (!file) return error_response(400, "multipart field \"file\" is required");
  const std::string hash = short_hash(file->content, 16);
  const std::string id = "mock-file-" + hash;
  {
    std::lock_guard lock(mutex_);
    files_[id] = hash;
  }
  OrderedJson out;
  out["id"] = id;
  out["object"] = "file";
  out["bytes"] = file->content.size();
  out["purpose"] = "fine-tune";
  return json_response(200, out);
}

HttpResponse MockTransport::create_job(const Json& body) {
  const auto file_id = body.value("training_file", "");
  std::lock_guard lock(mutex_);
  auto f = files_.find(file_id);
  if (f == files_.end()) return error_response(400, "unknown training_file");
  const std::string job_id = "mock-ft-" + f->second;
  auto [it, inserted] = jobs_.try_emplace(job_id);
  if (inserted) {
    it->second.base_model = body.value("model", "");
    it->second.epochs = kDefaultEpochs;
    if (body.contains("hyperparameters")) {
      it->second.epochs = body["hyperparameters"].value("n_epochs", kDefaultEpochs);
    }
    it->second.file_hash = f->second;
  }
  OrderedJson out;
  out["id"] = job_id;
  out["object"] = "fine_tuning.job";
  out["model"] = it->second.base_model;
  out["status"] = "queued";
  out["fine_tuned_model"] = nullptr;
  out["hyperparameters"]["n_epochs"] = it->second.epochs;
  return json_response(200, out);
}

HttpResponse MockTransport::get_job(const std::string& job_id) {
  std::lock_guard lock(mutex_);
  auto it = jobs_.find(job_id);
  if (it == jobs_.end()) return error_response(404, "fine-tuning job not found");
  Job& job = it->second;
  job.polls = std::min(job.polls + 1, 3);
  OrderedJson out;
  out["id"] = job_id;
  out["object"] = "fine_tuning.job";
  out["model"] = job.base_model;
  out["hyperparameters"]["n_epochs"] = job.epochs;
  switch (job.polls) {
    case 1:
      out["status"] = "queued";
      out["fine_tuned_model"] = nullptr;
      break;
    case 2:
      out["status"] = "running";
      out["fine_tuned_model"] = nullptr;
      break;
    default:
      out["status"] = "succeeded";
      out["fine_tuned_model"] = "mock-ft-model-" + job.file_hash;
      break;
  }
  return json_response(200, out);
}

// --- gateway ---------------------------------------------------------------

Gateway::Gateway(GatewayOptions options, std::shared_ptr<Transport> transport)
    : options_(std::move(options)), transport_(std::move(transport)), bucket_(options_.requests_per_minute) {
  if (!transport_) throw Error(ErrorCode::InvalidArgument, "gateway needs a transport");
  if (options_.max_in_flight < 1) options_.max_in_flight = 1;
  if (!options_.audit_log_path.empty()) {
    audit_.open(options_.audit_log_path, std::ios::app);
    if (!audit_) throw Error(ErrorCode::IoError, "cannot open audit log " + options_.audit_log_path);
  }
}

std::shared_ptr<Gateway> Gateway::create(GatewayOptions options) {
  std::shared_ptr<Transport> transport;
  if (options.provider_id == "mock") {
    transport = std::make_shared<MockTransport>();
  } else {
    options.apply_environment();
    if (options.base_url.empty()) {
      throw Error(ErrorCode::InvalidArgument, "live provider needs a base URL (FACTGPT_API_BASE)");
    }
    transport = std::make_shared<HttpTransport>(options.base_url);
  }
  return std::make_shared<Gateway>(std::move(options), std::move(transport));
}

double Gateway::effective_temperature(const GenerationConfig& config) const {
  const double floor = options_.temperature_floor.value_or(
      default_temperature_floor(options_.provider_id, config.model_id));
  return std::max(config.temperature, floor);
}

void Gateway::audit(const HttpRequest& request, const HttpResponse* response, std::string_view error) {
  if (!audit_.is_open()) return;
  OrderedJson entry;
  entry["time"] = std::chrono::duration_cast<std::chrono::milliseconds>(
                      std::chrono::system_clock::now().time_since_epoch())
                      .count();
  entry["method"] = request.method;
  entry["path"] = request.path;
  OrderedJson headers = OrderedJson::object();
  for (const auto& [k, v] : request.headers) {
    const bool secret = contains_ci(k, "authorization") || contains_ci(k, "api-key");
    headers[k] = secret ? std::string("[REDACTED]") : v;
  }
  entry["headers"] = std::move(headers);
  if (!request.multipart.empty()) {
    OrderedJson parts = OrderedJson::array();
    for (const auto& f : request.multipart) {
      OrderedJson p;
      p["name"] = f.name;
      p["filename"] = f.filename;
      p["bytes"] = f.content.size();
      p["sha256"] = sha256_hex(f.content);
      parts.push_back(std::move(p));
    }
    entry["multipart"] = std::move(parts);
  } else {
    entry["request"] = request.body;
  }
  if (response) {
    entry["status"] = response->status;
    entry["response"] = response->body;
  } else {
    entry["error"] = error;
  }
  std::lock_guard lock(audit_mutex_);
  audit_ << entry.dump(-1, ' ', false, OrderedJson::error_handler_t::replace) << '\n';
  audit_.flush();
}

HttpResponse Gateway::send_once(const HttpRequest& request) {
  bucket_.acquire();
  {
    std::unique_lock lock(in_flight_mutex_);
    in_flight_cv_.wait(lock, [&] { return in_flight_ < options_.max_in_flight; });
    ++in_flight_;
  }
  struct Release {
    Gateway* g;
    ~Release() {
      {
        std::lock_guard lock(g->in_flight_mutex_);
        --g->in_flight_;
      }
      g->in_flight_cv_.notify_one();
    }
  } release{this};

  try {
    HttpResponse response = transport_->send(request);
    audit(request, &response, {});
    return response;
  } catch (const Error& e) {
    audit(request, nullptr, e.what());
    throw;
  }
}

HttpResponse Gateway::exchange(HttpRequest request, int max_retries) {
  if (options_.provider_id != "mock") {
    if (options_.api_key.empty()) {
      throw Error(ErrorCode::AuthError, "no API key configured (set FACTGPT_API_KEY)");
    }
    request.headers.emplace_back("Authorization", "Bearer " + options_.api_key);
  }

  for (int attempt = 0;; ++attempt) {
    const bool last = attempt >= max_retries;
    try {
      HttpResponse response = send_once(request);
      if (response.status >= 200 && response.status < 300) return response;
      const std::string where = request.method + " " + request.path;
      if (response.status == 401 || response.status == 403) {
        throw Error(ErrorCode::AuthError, "provider rejected credentials for " + where, response.status,
                    response.body);
      }
      const bool transient = response.status == 429 || response.status >= 500;
      if (!transient) {
        throw Error(ErrorCode::ProviderError,
                    where + " failed with HTTP " + std::to_string(response.status), response.status,
                    response.body);
      }
      if (last) {
        if (response.status == 429) {
          throw Error(ErrorCode::RateLimited, where + " still rate limited after " +
                                                   std::to_string(max_retries) + " retries",
                      429, response.body);
        }
        throw Error(ErrorCode::ProviderError,
                    where + " failed with HTTP " + std::to_string(response.status) + " after " +
                        std::to_string(max_retries) + " retries",
                    response.status, response.body);
      }
    } catch (const Error& e) {
      const bool transient = e.code() == ErrorCode::Timeout ||
                             (e.code() == ErrorCode::ProviderError && e.http_status() == 0);
      if (!transient || last) throw;
    }
    auto delay = options_.retry_base_delay * (1LL << std::min(attempt, 20));
    std::this_thread::sleep_for(std::min<std::chrono::milliseconds>(delay, options_.retry_max_delay));
  }
}

namespace {

Json parse_body(const std::string& body, std::string_view what) {
  Json j = Json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw Error(ErrorCode::ProviderError, std::string(what) + ": response is not a JSON object", 200, body);
  }
  return j;
}

}  // namespace

std::string Gateway::chat_complete(const PromptMessages& messages, const GenerationConfig& config) {
  config.validate();
  OrderedJson body;
  body["model"] = config.model_id;
  OrderedJson sys, usr;
  sys["role"] = "system";
  sys["content"] = messages.system;
  usr["role"] = "user";
  usr["content"] = messages.user;
  body["messages"] = OrderedJson::array({sys, usr});
  body["temperature"] = effective_temperature(config);
  if (config.max_tokens) body["max_tokens"] = *config.max_tokens;

  HttpRequest request;
  request.path = "/chat/completions";
  request.body = body.dump(-1, ' ', false, OrderedJson::error_handler_t::replace);
  request.timeout = config.request_timeout;
  const auto response = exchange(std::move(request), config.max_retries);

  const Json j = parse_body(response.body, "chat completion");
  try {
    return j.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const Json::exception&) {
    throw Error(ErrorCode::ProviderError, "chat completion: missing choices[0].message.content",
                response.status, response.body);
  }
}

std::vector<Vector> Gateway::embed_remote(const std::vector<std::string>& texts, const std::string& model_id) {
  if (texts.empty()) throw Error(ErrorCode::EmptyBatch, "embedding request with no inputs");
  OrderedJson body;
  body["model"] = model_id;
  body["input"] = texts;
  HttpRequest request;
  request.path = "/embeddings";
  request.body = body.dump(-1, ' ', false, OrderedJson::error_handler_t::replace);
  request.timeout = options_.request_timeout;
  const auto response = exchange(std::move(request), options_.max_retries);

  const Json j = parse_body(response.body, "embeddings");
  std::vector<Vector> out(texts.size());
  std::vector<bool> seen(texts.size(), false);
  try {
    const auto& data = j.at("data");
    std::size_t position = 0;
    for (const auto& item : data) {
      const std::size_t index = item.contains("index") ? item["index"].get<std::size_t>() : position;
      ++position;
      if (index >= out.size() || seen[index]) throw Error(ErrorCode::ProviderError, "bad embedding index");
      out[index] = item.at("embedding").get<Vector>();
      seen[index] = true;
    }
  } catch (const Json::exception&) {
    throw Error(ErrorCode::ProviderError, "embeddings: malformed response", response.status, response.body);
  }
  if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
    throw Error(ErrorCode::ProviderError, "embeddings: response is missing vectors", response.status,
                response.body);
  }
  return out;
}

FineTuneJob Gateway::parse_job(const std::string& body, const std::string& fallback_model, int fallback_epochs) {
  const Json j = parse_body(body, "fine-tuning job");
  FineTuneJob job;
  try {
    job.job_id = j.at("id").get<std::string>();
    job.base_model = j.contains("model") && j["model"].is_string() ? j["model"].get<std::string>() : fallback_model;
    auto status = job_status_from_string(j.at("status").get<std::string>());
    if (!status) throw Error(ErrorCode::ProviderError, "unknown fine-tuning status", 200, body);
    job.status = *status;
    job.epochs = fallback_epochs;
    if (j.contains("hyperparameters") && j["hyperparameters"].contains("n_epochs") &&
        j["hyperparameters"]["n_epochs"].is_number_integer()) {
      job.epochs = j["hyperparameters"]["n_epochs"].get<int>();
    }
    if (job.status == JobStatus::Succeeded) {
      if (!j.contains("fine_tuned_model") || !j["fine_tuned_model"].is_string()) {
        throw Error(ErrorCode::ProviderError, "succeeded job without fine_tuned_model", 200, body);
      }
      job.fine_tuned_model_id = j["fine_tuned_model"].get<std::string>();
    }
  } catch (const Json::exception&) {
    throw Error(ErrorCode::ProviderError, "fine-tuning job: malformed response", 200, body);
  }
  return job;
}

FineTuneJob Gateway::submit_finetune(std::string_view training_jsonl, const std::string& base_model, int epochs) {
  if (epochs < 1) throw Error(ErrorCode::InvalidArgument, "epochs must be positive");
  if (base_model.empty()) throw Error(ErrorCode::InvalidArgument, "base model must be set");
  validate_finetune_jsonl(training_jsonl);

  HttpRequest upload;
  upload.path = "/files";
  upload.timeout = options_.request_timeout;
  upload.multipart.push_back({"purpose", "fine-tune", "", ""});
  upload.multipart.push_back({"file", std::string(training_jsonl), "training.jsonl", "application/jsonl"});
  const auto uploaded = exchange(std::move(upload), options_.max_retries);
  std::string file_id;
  try {
    file_id = parse_body(uploaded.body, "file upload").at("id").get<std::string>();
  } catch (const Json::exception&) {
    throw Error(ErrorCode::ProviderError, "file upload: missing id", uploaded.status, uploaded.body);
  }

  OrderedJson body;
  body["model"] = base_model;
  body["training_file"] = file_id;
  body["hyperparameters"]["n_epochs"] = epochs;
  HttpRequest create;
  create.path = "/fine_tuning/jobs";
  create.body = body.dump();
  create.timeout = options_.request_timeout;
  const auto created = exchange(std::move(create), options_.max_retries);
  return parse_job(created.body, base_model, epochs);
}

FineTuneJob Gateway::poll_finetune(const std::string& job_id) {
  if (job_id.empty()) throw Error(ErrorCode::UnknownJob, "empty job id");
  HttpRequest request;
  request.method = "GET";
  request.path = "/fine_tuning/jobs/" + job_id;
  request.timeout = options_.request_timeout;
  try {
    const auto response = exchange(std::move(request), options_.max_retries);
    return parse_job(response.body, "", kDefaultEpochs);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ProviderError && e.http_status() == 404) {
      throw Error(ErrorCode::UnknownJob, "unknown fine-tuning job \"" + job_id + "\"", 404, e.body());
    }
    throw;
  }
}

}  // namespace factgpt
