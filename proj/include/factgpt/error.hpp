#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace factgpt {

// Stable numeric values: these are mirrored one-to-one by factgpt_status in
// the C API header.
enum class ErrorCode : int {
  Ok = 0,
  InvalidArgument = 1,
  MalformedJson = 2,
  SchemaViolation = 3,
  EmptyInput = 4,
  DuplicateId = 5,
  UnknownEmbedder = 6,
  DimensionMismatch = 7,
  EmptyClaimStore = 8,
  EmptyBatch = 9,
  ValidationError = 10,
  TooFewExamples = 11,
  UnresolvedClaim = 12,
  Unparseable = 13,
  EmptyVotes = 14,
  MissingGold = 15,
  DuplicatePrediction = 16,
  UnknownJob = 17,
  NotFound = 18,
  Conflict = 19,
  IoError = 20,
  AuthError = 30,
  RateLimited = 31,
  ProviderError = 32,
  Timeout = 33,
  Internal = 99,
};

std::string_view to_string(ErrorCode code) noexcept;
// CamelCase form ("ValidationError") used by the C API and CLI.
std::string error_name(ErrorCode code);

// Provider-side failures (exit code 2 in the CLI) as opposed to input
// validation failures (exit code 1).
constexpr bool is_provider_failure(ErrorCode code) noexcept {
  return code == ErrorCode::AuthError || code == ErrorCode::RateLimited ||
         code == ErrorCode::ProviderError || code == ErrorCode::Timeout ||
         code == ErrorCode::UnknownJob;
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  Error(ErrorCode code, const std::string& message, int http_status, std::string body)
      : std::runtime_error(message), code_(code), http_status_(http_status), body_(std::move(body)) {}

  ErrorCode code() const noexcept { return code_; }
  // Non-zero only for errors that originate from an HTTP exchange.
  int http_status() const noexcept { return http_status_; }
  const std::string& body() const noexcept { return body_; }

 private:
  ErrorCode code_;
  int http_status_ = 0;
  std::string body_;
};

}  // namespace factgpt
