#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "factgpt/domain.hpp"

namespace factgpt {

class Gateway;

inline constexpr std::string_view kOfflineEmbedderId = "offline-ngram";
inline constexpr std::string_view kRemoteEmbedderPrefix = "remote:";
inline constexpr std::size_t kOfflineDimension = 256;

struct MatcherConfig {
  double alpha = 0.5;  // weight on the token score
  int top_k = 1;
  double min_combined_score = 0.0;
  std::string embedder_id{kOfflineEmbedderId};

  // Throws Error{InvalidArgument}.
  void validate() const;

  // Keys: alpha, top_k, min_combined_score, embedder_id. Missing keys keep
  // their current value.
  void merge_json(const Json& j);
  OrderedJson to_json() const;
};

using TokenSet = std::set<std::string>;
using Vector = std::vector<double>;

// Lowercased word tokens. URLs and @-mentions are dropped, '#' is not a word
// character so hashtags lose it.
TokenSet tokenize(std::string_view text);

// Jaccard index; 0 when both sets are empty.
double token_similarity(const TokenSet& a, const TokenSet& b);

// 0 when either norm is 0. Throws Error{DimensionMismatch}.
double cosine(std::span<const double> u, std::span<const double> v);

// Hashed character-trigram counts, L2-normalized. Blank text maps to the
// zero vector.
Vector offline_embed(std::string_view text, std::size_t dimension = kOfflineDimension);

class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::string id() const = 0;
  virtual std::vector<Vector> embed_batch(std::span<const std::string> texts) = 0;

  Vector embed(std::string_view text);
};

class OfflineEmbedder final : public Embedder {
 public:
  explicit OfflineEmbedder(std::size_t dimension = kOfflineDimension) : dimension_(dimension) {}
  std::string id() const override { return std::string(kOfflineEmbedderId); }
  std::vector<Vector> embed_batch(std::span<const std::string> texts) override;

 private:
  std::size_t dimension_;
};

// Delegates to the provider's embeddings endpoint.
class RemoteEmbedder final : public Embedder {
 public:
  RemoteEmbedder(std::shared_ptr<Gateway> gateway, std::string model_id);
  std::string id() const override;
  std::vector<Vector> embed_batch(std::span<const std::string> texts) override;

 private:
  std::shared_ptr<Gateway> gateway_;
  std::string model_id_;
};

// Resolves embedder ids. "offline-ngram" is always present; "remote:<model>"
// resolves when a gateway was supplied.
class EmbedderRegistry {
 public:
  explicit EmbedderRegistry(std::shared_ptr<Gateway> gateway = nullptr);

  void add(std::shared_ptr<Embedder> embedder);
  // Throws Error{UnknownEmbedder}.
  std::shared_ptr<Embedder> get(std::string_view id);

 private:
  std::shared_ptr<Gateway> gateway_;
  std::mutex mutex_;
  std::map<std::string, std::shared_ptr<Embedder>, std::less<>> embedders_;
};

Vector embed(std::string_view text, std::string_view embedder_id, EmbedderRegistry& registry);

// alpha * token + (1 - alpha) * max(semantic, 0)
double combined_score(double token_score, double semantic_score, double alpha) noexcept;

std::string make_pair_id(std::string_view post_id, std::string_view claim_id);

// Scores every (post, claim) pair and keeps the top_k claims per post whose
// combined score reaches the threshold. Output is ordered by combined score
// descending, then post_id, then claim_id.
std::vector<PairCandidate> pair_candidates(std::span<const Post> posts,
                                           std::span<const Claim> claims,
                                           const MatcherConfig& config, Embedder& embedder,
                                           std::size_t workers = 1);

}  // namespace factgpt
