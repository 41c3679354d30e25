#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "factgpt/domain.hpp"
#include "factgpt/gateway.hpp"

namespace factgpt {

struct ParsedLabel {
  Label label;
  bool ambiguous = false;

  friend bool operator==(const ParsedLabel&, const ParsedLabel&) = default;
};

// First whole-word, case-insensitive label token wins; ambiguous when a
// different label token occurs later. nullopt means unparseable.
std::optional<ParsedLabel> parse_label(std::string_view raw_response);

struct ClassifyConfig {
  std::string model_id;
  double temperature = 0.0;
  std::size_t parallelism = 4;
  std::optional<int> max_tokens;
  int max_retries = 3;

  void validate() const;
  GenerationConfig generation() const;
};

Prediction classify_pair(Gateway& gateway, std::string_view pair_id, std::string_view tweet_text,
                         std::string_view claim_text, const ClassifyConfig& config);

struct ResolvedPair {
  std::string pair_id;
  std::string tweet_text;
  std::string claim_text;
};

// Throws Error{UnresolvedClaim} or Error{NotFound} for dangling ids.
std::vector<ResolvedPair> resolve_pairs(std::span<const PairCandidate> pairs, std::span<const Post> posts,
                                        std::span<const Claim> claims);

struct PairError {
  std::string pair_id;
  ErrorCode code = ErrorCode::ProviderError;
  std::string message;
};

struct BatchOptions {
  // JSON-lines of completed pairs: {"pair_id": ..., "prediction": {...}}.
  // Empty disables checkpointing.
  std::filesystem::path checkpoint_path;
  std::size_t checkpoint_every = 1;
};

struct BatchResult {
  std::vector<Prediction> predictions;  // one per input pair, input order
  std::vector<PairError> errors;
  std::size_t resumed = 0;  // predictions taken from the checkpoint
  std::size_t requested = 0;
};

// Provider failures become predictions with no label and empty raw_response,
// are listed in `errors`, and are not checkpointed (a resume retries them).
BatchResult classify_batch(Gateway& gateway, std::span<const ResolvedPair> pairs, const ClassifyConfig& config,
                           const BatchOptions& options = {});

}  // namespace factgpt
