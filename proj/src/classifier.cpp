#include "factgpt/classifier.hpp"

#include <map>
#include <mutex>
#include <set>

#include "factgpt/io.hpp"
#include "factgpt/parallel.hpp"
#include "factgpt/promptkit.hpp"
#include "factgpt/text.hpp"

namespace factgpt {

std::optional<ParsedLabel> parse_label(std::string_view raw_response) {
  const std::u32string s = text::decode_utf8(raw_response);
  std::optional<ParsedLabel> first;
  std::size_t i = 0;
  while (i < s.size()) {
    if (!text::is_word_char(s[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    std::string word;
    while (j < s.size() && text::is_word_char(s[j])) {
      const char32_t c = s[j];
      word += (c < 0x80) ? static_cast<char>(c >= 'a' && c <= 'z' ? c - 32 : c) : '\x01';
      ++j;
    }
    if (auto label = label_from_token(word)) {
      if (!first) {
        first = ParsedLabel{*label, false};
      } else if (*label != first->label) {
        first->ambiguous = true;
        break;
      }
    }
    i = j;
  }
  return first;
}

void ClassifyConfig::validate() const {
  if (model_id.empty()) throw Error(ErrorCode::InvalidArgument, "classification model_id must be set");
  if (!(temperature >= 0.0)) throw Error(ErrorCode::InvalidArgument, "temperature must be >= 0");
  if (parallelism < 1) throw Error(ErrorCode::InvalidArgument, "parallelism must be >= 1");
}

GenerationConfig ClassifyConfig::generation() const {
  GenerationConfig g;
  g.model_id = model_id;
  g.temperature = temperature;
  g.max_tokens = max_tokens;
  g.max_retries = max_retries;
  return g;
}

Prediction classify_pair(Gateway& gateway, std::string_view pair_id, std::string_view tweet_text,
                         std::string_view claim_text, const ClassifyConfig& config) {
  config.validate();
  const auto prompt = build_entailment_prompt(tweet_text, claim_text);
  Prediction p;
  p.pair_id = std::string(pair_id);
  p.model_id = config.model_id;
  p.raw_response = gateway.chat_complete(prompt, config.generation());
  if (auto parsed = parse_label(p.raw_response)) {
    p.label = parsed->label;
    p.ambiguous = parsed->ambiguous;
  }
  return p;
}

std::vector<ResolvedPair> resolve_pairs(std::span<const PairCandidate> pairs, std::span<const Post> posts,
                                        std::span<const Claim> claims) {
  std::map<std::string_view, std::string_view> post_text, claim_text;
  for (const auto& p : posts) post_text.emplace(p.id, p.text);
  for (const auto& c : claims) claim_text.emplace(c.id, c.text);
  std::vector<ResolvedPair> out;
  out.reserve(pairs.size());
  for (const auto& pc : pairs) {
    auto pt = post_text.find(pc.post_id);
    if (pt == post_text.end()) {
      throw Error(ErrorCode::NotFound, "pair " + pc.pair_id + " refers to unknown post \"" + pc.post_id + "\"");
    }
    auto ct = claim_text.find(pc.claim_id);
    if (ct == claim_text.end()) {
      throw Error(ErrorCode::UnresolvedClaim,
                  "pair " + pc.pair_id + " refers to unknown claim \"" + pc.claim_id + "\"");
    }
    out.push_back({pc.pair_id, std::string(pt->second), std::string(ct->second)});
  }
  return out;
}

namespace {

std::map<std::string, Prediction> load_checkpoint(const std::filesystem::path& path) {
  std::map<std::string, Prediction> done;
  if (path.empty() || !std::filesystem::exists(path)) return done;
  // A torn final line from an interrupted write is skipped.
  const auto text = read_file(path);
  for (std::string_view line : split_lines(text)) {
    if (is_blank(line)) continue;
    Json j = Json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("prediction")) continue;
    try {
      Prediction p;
      from_json_value(j["prediction"], p);
      done.insert_or_assign(p.pair_id, std::move(p));
    } catch (const Error&) {
    }
  }
  return done;
}

class CheckpointWriter {
 public:
  CheckpointWriter(std::filesystem::path path, std::size_t every) : path_(std::move(path)), every_(every) {}
  ~CheckpointWriter() {
    try {
      flush();
    } catch (...) {
    }
  }

  void add(const Prediction& p) {
    if (path_.empty()) return;
    std::lock_guard lock(mutex_);
    OrderedJson j;
    j["pair_id"] = p.pair_id;
    j["prediction"] = to_json_value(p);
    pending_ += j.dump(-1, ' ', false, OrderedJson::error_handler_t::replace);
    pending_ += '\n';
    if (++count_ % every_ == 0) flush_locked();
  }

  void flush() {
    std::lock_guard lock(mutex_);
    flush_locked();
  }

 private:
  void flush_locked() {
    if (pending_.empty() || path_.empty()) return;
    append_file(path_, pending_);
    pending_.clear();
  }

  std::filesystem::path path_;
  std::size_t every_;
  std::mutex mutex_;
  std::string pending_;
  std::size_t count_ = 0;
};

}  // namespace

BatchResult classify_batch(Gateway& gateway, std::span<const ResolvedPair> pairs, const ClassifyConfig& config,
                           const BatchOptions& options) {
  config.validate();
  {
    std::set<std::string_view> seen;
    for (const auto& p : pairs) {
      if (!seen.insert(p.pair_id).second) {
        throw Error(ErrorCode::DuplicateId, "pair \"" + p.pair_id + "\" appears twice in the batch");
      }
    }
  }

  BatchResult result;
  result.predictions.resize(pairs.size());
  const auto done = load_checkpoint(options.checkpoint_path);

  std::vector<std::size_t> todo;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (auto it = done.find(pairs[i].pair_id); it != done.end() && it->second.model_id == config.model_id) {
      result.predictions[i] = it->second;
      ++result.resumed;
    } else {
      todo.push_back(i);
    }
  }
  result.requested = todo.size();

  CheckpointWriter checkpoint(options.checkpoint_path, std::max<std::size_t>(1, options.checkpoint_every));
  std::vector<std::optional<PairError>> errors(pairs.size());
  parallel_for(todo.size(), config.parallelism, [&](std::size_t k) {
    const std::size_t i = todo[k];
    const auto& pair = pairs[i];
    try {
      result.predictions[i] = classify_pair(gateway, pair.pair_id, pair.tweet_text, pair.claim_text, config);
      checkpoint.add(result.predictions[i]);
    } catch (const Error& e) {
      Prediction failed;
      failed.pair_id = pair.pair_id;
      failed.model_id = config.model_id;
      result.predictions[i] = std::move(failed);
      errors[i] = PairError{pair.pair_id, e.code(), e.what()};
    }
  });
  checkpoint.flush();

  for (auto& e : errors) {
    if (e) result.errors.push_back(std::move(*e));
  }
  return result;
}

}  // namespace factgpt
