#include "factgpt/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <thread>

#include "factgpt/parallel.hpp"
#include "factgpt/promptkit.hpp"

namespace factgpt {

void SplitConfig::validate() const {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "train_fraction must lie strictly between 0 and 1");
  }
}

std::array<std::size_t, 3> GenerationResult::per_label() const {
  std::array<std::size_t, 3> counts{};
  for (const auto& e : examples) ++counts[label_index(e.target_label)];
  return counts;
}

bool GenerationResult::balanced() const {
  const auto c = per_label();
  return c[0] == c[1] && c[1] == c[2];
}

GenerationConfig generation_defaults(std::string model_id) {
  GenerationConfig config;
  config.model_id = std::move(model_id);
  config.temperature = kGenerationTemperature;
  return config;
}

// --- generation ------------------------------------------------------------

GenerationResult generate_balanced_set(Gateway& gateway, std::span<const Claim> claims,
                                       const std::string& generator_model, GenerationConfig config,
                                       const GenerateOptions& options) {
  if (claims.empty()) throw Error(ErrorCode::EmptyInput, "no claims to generate from");
  config.model_id = generator_model;
  config.validate();

  struct Cell {
    std::optional<SyntheticExample> example;
    std::optional<GenerationFailure> failure;
  };
  const std::size_t cells = claims.size() * kAllLabels.size();
  std::vector<Cell> results(cells);

  parallel_for(cells, options.workers, [&](std::size_t i) {
    const Claim& claim = claims[i / kAllLabels.size()];
    const Label label = kAllLabels[i % kAllLabels.size()];
    const auto prompt = build_generation_prompt(claim.text, label);
    GenerationFailure failure{claim.id, label, ErrorCode::ProviderError, ""};
    for (int attempt = 0; attempt < std::max(1, options.cell_attempts); ++attempt) {
      try {
        std::string tweet = gateway.chat_complete(prompt, config);
        if (is_blank(tweet)) {
          failure.code = ErrorCode::EmptyInput;
          failure.message = "provider returned an empty tweet";
          continue;
        }
        results[i].example = SyntheticExample{claim.id, label, std::move(tweet), generator_model,
                                              options.clock()};
        return;
      } catch (const Error& e) {
        failure.code = e.code();
        failure.message = e.what();
        if (e.code() == ErrorCode::AuthError) break;
      }
    }
    results[i].failure = std::move(failure);
  });

  GenerationResult out;
  for (auto& cell : results) {
    if (cell.example) out.examples.push_back(std::move(*cell.example));
    if (cell.failure) out.failures.push_back(std::move(*cell.failure));
  }
  if (!out.failures.empty()) {
    out.warnings.push_back(std::to_string(out.failures.size()) + " of " + std::to_string(cells) +
                           " generation cells failed and were omitted");
  }
  if (!out.balanced()) {
    const auto c = out.per_label();
    out.warnings.push_back("label balance broken: " + std::to_string(c[0]) + "/" + std::to_string(c[1]) +
                           "/" + std::to_string(c[2]));
  }
  return out;
}

// --- split -----------------------------------------------------------------

namespace {

// Unbiased draw from [0, bound) on top of mt19937_64's fully specified output.
std::uint64_t draw_below(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

template <class T>
void seeded_shuffle(std::vector<T>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[draw_below(rng, i)]);
  }
}

std::size_t floor_fraction(std::size_t n, double fraction) {
  return static_cast<std::size_t>(std::floor(static_cast<double>(n) * fraction + 1e-9));
}

}  // namespace

std::size_t train_size(std::size_t n, double train_fraction) { return floor_fraction(n, train_fraction); }

Split split_train_validation(std::span<const SyntheticExample> examples, const SplitConfig& config) {
  config.validate();
  if (examples.size() < 2) {
    throw Error(ErrorCode::TooFewExamples, "need at least 2 examples to split, got " +
                                               std::to_string(examples.size()));
  }

  std::array<std::vector<std::size_t>, 3> groups;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    groups[label_index(examples[i].target_label)].push_back(i);
  }

  const std::size_t target = train_size(examples.size(), config.train_fraction);
  std::array<std::size_t, 3> quota{};
  std::array<double, 3> remainder{};
  std::size_t assigned = 0;
  for (std::size_t l = 0; l < 3; ++l) {
    quota[l] = floor_fraction(groups[l].size(), config.train_fraction);
    remainder[l] = static_cast<double>(groups[l].size()) * config.train_fraction - static_cast<double>(quota[l]);
    assigned += quota[l];
  }
  std::array<std::size_t, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t k = 0; assigned < target; k = (k + 1) % 3) {
    const std::size_t l = order[k];
    if (quota[l] < groups[l].size()) {
      ++quota[l];
      ++assigned;
    }
  }

  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> train_idx, validation_idx;
  for (std::size_t l = 0; l < 3; ++l) {
    auto& g = groups[l];
    seeded_shuffle(g, rng);
    train_idx.insert(train_idx.end(), g.begin(), g.begin() + static_cast<std::ptrdiff_t>(quota[l]));
    validation_idx.insert(validation_idx.end(), g.begin() + static_cast<std::ptrdiff_t>(quota[l]), g.end());
  }
  seeded_shuffle(train_idx, rng);
  seeded_shuffle(validation_idx, rng);

  Split split;
  split.train.reserve(train_idx.size());
  split.validation.reserve(validation_idx.size());
  for (auto i : train_idx) split.train.push_back(examples[i]);
  for (auto i : validation_idx) split.validation.push_back(examples[i]);
  return split;
}

// --- export ----------------------------------------------------------------

std::vector<FineTuneRecord> build_finetune_records(std::span<const SyntheticExample> examples,
                                                   std::span<const Claim> claims) {
  std::map<std::string_view, std::string_view> claim_text;
  for (const auto& c : claims) claim_text.emplace(c.id, c.text);
  std::vector<FineTuneRecord> records;
  records.reserve(examples.size());
  for (const auto& e : examples) {
    auto it = claim_text.find(e.claim_id);
    if (it == claim_text.end()) {
      throw Error(ErrorCode::UnresolvedClaim, "example refers to unknown claim \"" + e.claim_id + "\"");
    }
    auto prompt = build_entailment_prompt(e.tweet_text, it->second);
    records.push_back({std::move(prompt.system), std::move(prompt.user), e.target_label});
  }
  return records;
}

std::string export_finetune_jsonl(std::span<const SyntheticExample> examples, std::span<const Claim> claims) {
  return encode_records(build_finetune_records(examples, claims));
}

// --- pipeline --------------------------------------------------------------

FineTuneJob wait_for_job(Gateway& gateway, FineTuneJob job, std::chrono::milliseconds interval, int max_polls) {
  for (int i = 0; i < max_polls && !job.terminal(); ++i) {
    if (i > 0 && interval.count() > 0) std::this_thread::sleep_for(interval);
    job = gateway.poll_finetune(job.job_id);
  }
  return job;
}

namespace {

namespace fs = std::filesystem;

constexpr const char* kSynthetic = "synthetic.jsonl";
constexpr const char* kTrainSynthetic = "train.synthetic.jsonl";
constexpr const char* kValidationSynthetic = "validation.synthetic.jsonl";
constexpr const char* kTrainFinetune = "train.finetune.jsonl";
constexpr const char* kValidationFinetune = "validation.finetune.jsonl";
constexpr const char* kJob = "job.json";
constexpr const char* kManifest = "manifest.json";

OrderedJson label_counts(std::span<const SyntheticExample> examples) {
  std::array<std::size_t, 3> c{};
  for (const auto& e : examples) ++c[label_index(e.target_label)];
  OrderedJson j;
  for (Label l : kAllLabels) j[std::string(label_token(l))] = c[label_index(l)];
  return j;
}

}  // namespace

PipelineResult run_finetune_pipeline(Gateway& gateway, std::span<const Claim> claims,
                                     const PipelineOptions& options) {
  if (options.work_dir.empty()) throw Error(ErrorCode::InvalidArgument, "pipeline needs a work directory");
  if (options.base_model.empty() || options.generator_model.empty()) {
    throw Error(ErrorCode::InvalidArgument, "pipeline needs generator and base models");
  }
  options.split.validate();
  fs::create_directories(options.work_dir);
  const auto at = [&](const char* name) { return options.work_dir / name; };

  PipelineResult result;

  std::vector<SyntheticExample> synthetic;
  std::size_t failed_cells = 0;
  if (fs::exists(at(kSynthetic))) {
    synthetic = decode_records_strict<SyntheticExample>(read_file(at(kSynthetic)), kSynthetic);
    result.skipped_stages.push_back("generate");
  } else {
    auto generated = generate_balanced_set(gateway, claims, options.generator_model, options.generation,
                                           options.generate);
    failed_cells = generated.failures.size();
    synthetic = std::move(generated.examples);
    write_file_atomic(at(kSynthetic), encode_records(synthetic));
  }

  Split split;
  if (fs::exists(at(kTrainSynthetic)) && fs::exists(at(kValidationSynthetic))) {
    split.train = decode_records_strict<SyntheticExample>(read_file(at(kTrainSynthetic)), kTrainSynthetic);
    split.validation =
        decode_records_strict<SyntheticExample>(read_file(at(kValidationSynthetic)), kValidationSynthetic);
    result.skipped_stages.push_back("split");
  } else {
    split = split_train_validation(synthetic, options.split);
    write_file_atomic(at(kTrainSynthetic), encode_records(split.train));
    write_file_atomic(at(kValidationSynthetic), encode_records(split.validation));
  }

  std::string train_file;
  if (fs::exists(at(kTrainFinetune)) && fs::exists(at(kValidationFinetune))) {
    train_file = read_file(at(kTrainFinetune));
    result.skipped_stages.push_back("export");
  } else {
    train_file = export_finetune_jsonl(split.train, claims);
    write_file_atomic(at(kTrainFinetune), train_file);
    write_file_atomic(at(kValidationFinetune), export_finetune_jsonl(split.validation, claims));
  }

  FineTuneJob job;
  if (fs::exists(at(kJob))) {
    from_json_value(Json::parse(read_file(at(kJob))), job);
    result.skipped_stages.push_back("submit");
  } else {
    job = gateway.submit_finetune(train_file, options.base_model, options.epochs);
    write_file_atomic(at(kJob), to_json_value(job).dump(2) + "\n");
  }
  if (options.wait && !job.terminal()) {
    job = wait_for_job(gateway, job, options.poll_interval, options.max_polls);
    write_file_atomic(at(kJob), to_json_value(job).dump(2) + "\n");
  }
  result.job = job;

  OrderedJson manifest;
  manifest["generator_model"] = options.generator_model;
  manifest["base_model"] = options.base_model;
  manifest["seed"] = options.split.seed;
  manifest["train_fraction"] = options.split.train_fraction;
  manifest["epochs"] = options.epochs;
  manifest["counts"]["total"] = synthetic.size();
  manifest["counts"]["per_label"] = label_counts(synthetic);
  manifest["counts"]["train"] = split.train.size();
  manifest["counts"]["validation"] = split.validation.size();
  manifest["counts"]["failed_cells"] = failed_cells;
  manifest["artifact_paths"]["synthetic"] = kSynthetic;
  manifest["artifact_paths"]["train_synthetic"] = kTrainSynthetic;
  manifest["artifact_paths"]["validation_synthetic"] = kValidationSynthetic;
  manifest["artifact_paths"]["train_finetune"] = kTrainFinetune;
  manifest["artifact_paths"]["validation_finetune"] = kValidationFinetune;
  manifest["artifact_paths"]["job"] = kJob;
  manifest["job"] = to_json_value(job);
  manifest["skipped_stages"] = result.skipped_stages;
  manifest["written_at"] = utc_timestamp(std::chrono::system_clock::now());
  write_file_atomic(at(kManifest), manifest.dump(2) + "\n");
  result.manifest = std::move(manifest);
  return result;
}

}  // namespace factgpt
