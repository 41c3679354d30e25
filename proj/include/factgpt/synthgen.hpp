#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "factgpt/domain.hpp"
#include "factgpt/finetune_record.hpp"
#include "factgpt/gateway.hpp"
#include "factgpt/io.hpp"

namespace factgpt {

inline constexpr double kGenerationTemperature = 1.0;
inline constexpr double kDefaultTrainFraction = 0.8;

struct SplitConfig {
  double train_fraction = kDefaultTrainFraction;
  std::uint64_t seed = 0;

  void validate() const;
};

struct GenerationFailure {
  std::string claim_id;
  Label label = Label::Entailment;
  ErrorCode code = ErrorCode::ProviderError;
  std::string message;
};

struct GenerationResult {
  std::vector<SyntheticExample> examples;
  std::vector<GenerationFailure> failures;
  std::vector<std::string> warnings;

  std::array<std::size_t, 3> per_label() const;
  bool balanced() const;
};

struct GenerateOptions {
  std::size_t workers = 4;
  int cell_attempts = 2;  // whole-cell attempts on top of transport retries
  Clock clock = system_clock_source();
};

// GenerationConfig with the generation temperature (1.0) for `model_id`.
GenerationConfig generation_defaults(std::string model_id);

// One example per (claim, label) cell in claim order x label order. Cells that
// keep failing are listed in `failures` and omitted.
GenerationResult generate_balanced_set(Gateway& gateway, std::span<const Claim> claims,
                                       const std::string& generator_model, GenerationConfig config,
                                       const GenerateOptions& options = {});

struct Split {
  std::vector<SyntheticExample> train;
  std::vector<SyntheticExample> validation;
};

// Number of training examples: floor(n * fraction).
std::size_t train_size(std::size_t n, double train_fraction);

// Seeded split stratified by target label. Per-label quotas use the largest
// remainder method so they sum to train_size(n). Throws Error{TooFewExamples}.
Split split_train_validation(std::span<const SyntheticExample> examples, const SplitConfig& config);

// Throws Error{UnresolvedClaim}.
std::vector<FineTuneRecord> build_finetune_records(std::span<const SyntheticExample> examples,
                                                   std::span<const Claim> claims);
std::string export_finetune_jsonl(std::span<const SyntheticExample> examples, std::span<const Claim> claims);

struct PipelineOptions {
  std::string generator_model;
  std::string base_model;
  std::filesystem::path work_dir;
  SplitConfig split;
  int epochs = kDefaultEpochs;
  bool wait = true;
  std::chrono::milliseconds poll_interval{5000};
  int max_polls = 10000;
  GenerationConfig generation;  // model_id is replaced by generator_model
  GenerateOptions generate;
};

struct PipelineResult {
  FineTuneJob job;
  OrderedJson manifest;
  std::vector<std::string> skipped_stages;
};

// generate -> split -> export -> submit (train part only) -> poll. Every stage
// persists its output under work_dir; a rerun skips stages whose artifacts
// exist.
PipelineResult run_finetune_pipeline(Gateway& gateway, std::span<const Claim> claims,
                                     const PipelineOptions& options);

// Polls until the job reaches a terminal state or max_polls is exhausted.
FineTuneJob wait_for_job(Gateway& gateway, FineTuneJob job, std::chrono::milliseconds interval,
                         int max_polls);

}  // namespace factgpt
