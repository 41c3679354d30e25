#pragma once

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <string_view>

#include "factgpt/classifier.hpp"
#include "factgpt/gateway.hpp"
#include "factgpt/io.hpp"
#include "factgpt/matcher.hpp"
#include "factgpt/store.hpp"

namespace httplib {
class Server;
}

namespace factgpt {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::filesystem::path store_dir;
  std::filesystem::path ui_dir;  // static assets of the review console, optional
  std::string cors_origin = "*";
  std::string api_base = "/v1";
  std::string classify_model;  // default model for classify=true requests
  MatcherConfig matcher;

  // Keys: host, port, store_dir, ui_dir, cors_origin, api_base,
  // classify_model, matcher{alpha, top_k, min_combined_score, embedder_id}.
  void merge_json(const Json& j);
};

struct ServiceRequest {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  std::string body;
};

struct ServiceResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

class Service {
 public:
  Service(ServiceConfig config, std::shared_ptr<Gateway> gateway, Clock clock = system_clock_source());
  ~Service();

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Routes one request; never throws.
  ServiceResponse handle(const ServiceRequest& request);

  // Binds and serves until stop(). Returns false when the bind fails. Pass
  // port 0 to pick a free port (see bound_port()).
  bool listen();
  void stop();
  int bound_port() const noexcept { return bound_port_.load(); }

  Store& store() noexcept { return store_; }
  const ServiceConfig& config() const noexcept { return config_; }

 private:
  ServiceResponse ingest_claims(const ServiceRequest& r);
  ServiceResponse list_claims(const ServiceRequest& r);
  ServiceResponse match(const ServiceRequest& r);
  ServiceResponse review_queue(const ServiceRequest& r);
  ServiceResponse review_enqueue(const ServiceRequest& r);
  ServiceResponse review_submit(const ServiceRequest& r, const std::string& pair_id);
  ServiceResponse gold_export(const ServiceRequest& r);
  ServiceResponse run_evaluation(const ServiceRequest& r);
  ServiceResponse latest_report(const ServiceRequest& r);
  ServiceResponse ui_config(const ServiceRequest& r);

  OrderedJson queue_item(const PairCandidate& pair) const;
  std::string status_of(const std::string& pair_id) const;

  ServiceConfig config_;
  std::shared_ptr<Gateway> gateway_;
  Clock clock_;
  Store store_;
  EmbedderRegistry embedders_;
  std::mutex review_mutex_;  // serializes check-then-append on adjudications
  std::unique_ptr<httplib::Server> server_;
  std::atomic<int> bound_port_{0};
};

}  // namespace factgpt
