#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "factgpt/domain.hpp"
#include "factgpt/promptkit.hpp"

namespace factgpt {

using Vector = std::vector<double>;

// ---------------------------------------------------------------------------
// Transport

struct MultipartField {
  std::string name;
  std::string content;
  std::string filename;
  std::string content_type;
};

struct HttpRequest {
  std::string method = "POST";
  std::string path;  // relative to the provider base URL, e.g. "/chat/completions"
  std::vector<std::pair<std::string, std::string>> headers;
  std::string body;
  std::string content_type = "application/json";
  std::vector<MultipartField> multipart;  // when non-empty, sent instead of body
  std::chrono::milliseconds timeout{60000};
};

struct HttpResponse {
  int status = 0;
  std::string body;
};

// Implementations throw Error{Timeout} when the exchange times out and
// Error{ProviderError} with http_status 0 when the connection fails.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual HttpResponse send(const HttpRequest& request) = 0;
};

// Real HTTP(S) transport against "scheme://host[:port][/prefix]".
class HttpTransport final : public Transport {
 public:
  explicit HttpTransport(std::string base_url);
  HttpResponse send(const HttpRequest& request) override;

 private:
  std::string scheme_host_port_;
  std::string path_prefix_;
};

// In-process stand-in for a hosted provider that speaks the same wire
// protocol. Deterministic and offline:
//  - a user message containing [[ENTAILMENT]], [[NEUTRAL]] or [[CONTRADICTION]]
//    is answered with that bare label (earliest sentinel wins);
//  - other entailment prompts get the label at index hash(user) % 3;
//  - generation prompts get "MOCK TWEET <hash> <requested clause>";
//  - embeddings equal offline_embed();
//  - fine-tune jobs report queued, running, then succeeded on successive polls.
class MockTransport final : public Transport {
 public:
  HttpResponse send(const HttpRequest& request) override;

 private:
  struct Job {
    std::string base_model;
    int epochs = 3;
    int polls = 0;
    std::string file_hash;
  };

  HttpResponse chat(const Json& body);
  HttpResponse embeddings(const Json& body);
  HttpResponse upload(const HttpRequest& request);
  HttpResponse create_job(const Json& body);
  HttpResponse get_job(const std::string& job_id);

  std::mutex mutex_;
  std::map<std::string, std::string> files_;  // file id -> content hash
  std::map<std::string, Job> jobs_;
};

// Mock chat behaviour, exposed for tests and tools.
std::string mock_chat_response(std::string_view system, std::string_view user);

// ---------------------------------------------------------------------------
// Configuration

struct GenerationConfig {
  std::string model_id;
  double temperature = 0.0;
  std::optional<int> max_tokens;
  std::chrono::milliseconds request_timeout{60000};
  int max_retries = 3;

  // Throws Error{InvalidArgument}.
  void validate() const;
};

inline constexpr double kLlamaTemperatureFloor = 0.01;

// Built-in floor table: "huggingface" declares 0.01, model ids naming a Llama
// model get 0.01 everywhere, all else 0.
double default_temperature_floor(std::string_view provider_id, std::string_view model_id);

struct GatewayOptions {
  std::string provider_id = "mock";  // "mock" selects MockTransport
  std::string base_url;              // FACTGPT_API_BASE
  std::string api_key;               // FACTGPT_API_KEY
  std::optional<double> temperature_floor;  // overrides the built-in table
  double requests_per_minute = 0;    // 0 disables the token bucket
  int max_in_flight = 8;
  int max_retries = 3;               // for embeddings and fine-tune calls
  std::chrono::milliseconds request_timeout{60000};
  std::chrono::milliseconds retry_base_delay{500};
  std::chrono::milliseconds retry_max_delay{8000};
  std::string audit_log_path;        // empty disables auditing

  // Reads FACTGPT_API_KEY / FACTGPT_API_BASE into empty fields.
  void apply_environment();
};

// ---------------------------------------------------------------------------
// Fine-tune jobs

enum class JobStatus { Queued, Running, Succeeded, Failed, Cancelled };

std::string_view to_string(JobStatus s) noexcept;
std::optional<JobStatus> job_status_from_string(std::string_view s) noexcept;

struct FineTuneJob {
  std::string job_id;
  std::string base_model;
  JobStatus status = JobStatus::Queued;
  int epochs = 3;
  std::optional<std::string> fine_tuned_model_id;  // set iff Succeeded

  bool terminal() const noexcept {
    return status == JobStatus::Succeeded || status == JobStatus::Failed ||
           status == JobStatus::Cancelled;
  }
  friend bool operator==(const FineTuneJob&, const FineTuneJob&) = default;
};

OrderedJson to_json_value(const FineTuneJob& job);
void from_json_value(const Json& j, FineTuneJob& out);

inline constexpr int kDefaultEpochs = 3;

// ---------------------------------------------------------------------------
// Gateway

class TokenBucket {
 public:
  explicit TokenBucket(double per_minute);
  void acquire();

 private:
  double capacity_;
  double per_second_;
  double tokens_;
  std::chrono::steady_clock::time_point last_;
  std::mutex mutex_;
};

// Thread-safe client shared by generation, classification and the service.
class Gateway {
 public:
  Gateway(GatewayOptions options, std::shared_ptr<Transport> transport);

  // Picks MockTransport for provider "mock" and HttpTransport otherwise.
  static std::shared_ptr<Gateway> create(GatewayOptions options);

  const GatewayOptions& options() const noexcept { return options_; }

  // Temperature actually sent: the requested value raised to the provider floor.
  double effective_temperature(const GenerationConfig& config) const;

  // Returns choices[0].message.content. Retries 429, 5xx and timeouts with
  // exponential backoff up to config.max_retries retransmissions.
  std::string chat_complete(const PromptMessages& messages, const GenerationConfig& config);

  // One vector per input, in input order. Throws Error{EmptyBatch}.
  std::vector<Vector> embed_remote(const std::vector<std::string>& texts, const std::string& model_id);

  // Validates the file before anything is sent.
  FineTuneJob submit_finetune(std::string_view training_jsonl, const std::string& base_model,
                              int epochs = kDefaultEpochs);

  // Throws Error{UnknownJob}.
  FineTuneJob poll_finetune(const std::string& job_id);

 private:
  HttpResponse exchange(HttpRequest request, int max_retries);
  HttpResponse send_once(const HttpRequest& request);
  void audit(const HttpRequest& request, const HttpResponse* response, std::string_view error);
  FineTuneJob parse_job(const std::string& body, const std::string& fallback_model, int fallback_epochs);

  GatewayOptions options_;
  std::shared_ptr<Transport> transport_;
  TokenBucket bucket_;

  std::mutex in_flight_mutex_;
  std::condition_variable in_flight_cv_;
  int in_flight_ = 0;

  std::mutex audit_mutex_;
  std::ofstream audit_;
};

}  // namespace factgpt
