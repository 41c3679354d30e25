#pragma once

#include <atomic>
#include <chrono>
#include <deque>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <random>
#include <string>
#include <vector>

#include "factgpt/gateway.hpp"

namespace testing {

inline std::filesystem::path fixture_dir() { return FACTGPT_FIXTURE_DIR; }

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("factgpt-" + tag + "-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

// Records every request. Replies come from a queue of canned responses first,
// then from the fallback (the mock provider by default).
class ScriptedTransport final : public factgpt::Transport {
 public:
  using Handler = std::function<factgpt::HttpResponse(const factgpt::HttpRequest&)>;

  ScriptedTransport() : fallback_(std::make_shared<factgpt::MockTransport>()) {}

  void push(factgpt::HttpResponse response) {
    std::lock_guard lock(mutex_);
    script_.push_back(std::move(response));
  }
  void set_handler(Handler h) {
    std::lock_guard lock(mutex_);
    handler_ = std::move(h);
  }

  factgpt::HttpResponse send(const factgpt::HttpRequest& request) override {
    Handler h;
    {
      std::lock_guard lock(mutex_);
      requests_.push_back(request);
      if (!script_.empty()) {
        auto r = script_.front();
        script_.pop_front();
        return r;
      }
      h = handler_;
    }
    if (h) return h(request);
    return fallback_->send(request);
  }

  std::vector<factgpt::HttpRequest> requests() const {
    std::lock_guard lock(mutex_);
    return requests_;
  }
  std::size_t count(const std::string& path) const {
    std::lock_guard lock(mutex_);
    std::size_t n = 0;
    for (const auto& r : requests_) n += r.path == path ? 1 : 0;
    return n;
  }
  // "temperature" of every chat request, in send order.
  std::vector<double> temperatures() const {
    std::lock_guard lock(mutex_);
    std::vector<double> out;
    for (const auto& r : requests_) {
      if (r.path != "/chat/completions") continue;
      out.push_back(factgpt::Json::parse(r.body).at("temperature").get<double>());
    }
    return out;
  }
  void clear() {
    std::lock_guard lock(mutex_);
    requests_.clear();
  }

 private:
  mutable std::mutex mutex_;
  std::deque<factgpt::HttpResponse> script_;
  std::vector<factgpt::HttpRequest> requests_;
  Handler handler_;
  std::shared_ptr<factgpt::MockTransport> fallback_;
};

inline factgpt::GatewayOptions fast_options(std::string provider = "scripted") {
  factgpt::GatewayOptions o;
  o.provider_id = std::move(provider);
  o.api_key = "test-key";
  o.retry_base_delay = std::chrono::milliseconds(1);
  o.retry_max_delay = std::chrono::milliseconds(4);
  return o;
}

inline factgpt::HttpResponse chat_reply(const std::string& content, int status = 200) {
  factgpt::Json j;
  j["choices"] = factgpt::Json::array({{{"index", 0}, {"message", {{"role", "assistant"}, {"content", content}}}}});
  return {status, j.dump()};
}

}  // namespace testing
