#include "factgpt/matcher.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "factgpt/gateway.hpp"
#include "factgpt/hashing.hpp"
#include "factgpt/parallel.hpp"
#include "factgpt/text.hpp"

namespace factgpt {

// --- config ----------------------------------------------------------------

void MatcherConfig::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "alpha must lie in [0, 1]");
  }
  if (top_k < 1) throw Error(ErrorCode::InvalidArgument, "top_k must be at least 1");
  if (!std::isfinite(min_combined_score)) {
    throw Error(ErrorCode::InvalidArgument, "min_combined_score must be finite");
  }
  if (embedder_id.empty()) throw Error(ErrorCode::InvalidArgument, "embedder_id must be set");
}

void MatcherConfig::merge_json(const Json& j) {
  try {
    if (j.contains("alpha")) alpha = j.at("alpha").get<double>();
    if (j.contains("top_k")) top_k = j.at("top_k").get<int>();
    if (j.contains("min_combined_score")) min_combined_score = j.at("min_combined_score").get<double>();
    if (j.contains("embedder_id")) embedder_id = j.at("embedder_id").get<std::string>();
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("matcher config: ") + e.what());
  }
}

OrderedJson MatcherConfig::to_json() const {
  OrderedJson j;
  j["alpha"] = alpha;
  j["top_k"] = top_k;
  j["min_combined_score"] = min_combined_score;
  j["embedder_id"] = embedder_id;
  return j;
}

// --- tokens ----------------------------------------------------------------

namespace {

bool starts_with_ci(const std::u32string& s, std::size_t pos, std::u32string_view prefix) {
  if (pos + prefix.size() > s.size()) return false;
  for (std::size_t k = 0; k < prefix.size(); ++k) {
    if (text::to_lower(s[pos + k]) != prefix[k]) return false;
  }
  return true;
}

bool is_apostrophe(char32_t cp) { return cp == U'\'' || cp == U'’'; }

}  // namespace

TokenSet tokenize(std::string_view input) {
  const std::u32string s = text::decode_utf8(input);
  TokenSet tokens;
  std::size_t i = 0;
  const std::size_t n = s.size();
  auto skip_to_space = [&] {
    while (i < n && !text::is_space(s[i])) ++i;
  };
  while (i < n) {
    const char32_t cp = s[i];
    const bool at_boundary = i == 0 || !text::is_word_char(s[i - 1]);
    if (at_boundary && (starts_with_ci(s, i, U"http://") || starts_with_ci(s, i, U"https://") ||
                        starts_with_ci(s, i, U"www."))) {
      skip_to_space();
      continue;
    }
    if (cp == U'@' && at_boundary && i + 1 < n && text::is_word_char(s[i + 1])) {
      ++i;
      while (i < n && text::is_word_char(s[i])) ++i;
      continue;
    }
    if (!text::is_word_char(cp)) {
      ++i;
      continue;
    }
    std::u32string word;
    while (i < n) {
      if (text::is_word_char(s[i])) {
        word += text::to_lower(s[i]);
        ++i;
      } else if (is_apostrophe(s[i]) && i + 1 < n && text::is_word_char(s[i + 1])) {
        word += U'\'';
        ++i;
      } else {
        break;
      }
    }
    tokens.insert(text::encode_utf8(word));
  }
  return tokens;
}

double token_similarity(const TokenSet& a, const TokenSet& b) {
  if (a.empty() && b.empty()) return 0.0;
  std::size_t common = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++common;
      ++ia;
      ++ib;
    }
  }
  const std::size_t united = a.size() + b.size() - common;
  return static_cast<double>(common) / static_cast<double>(united);
}

// --- vectors ---------------------------------------------------------------

double cosine(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw Error(ErrorCode::DimensionMismatch, "cosine over vectors of dimension " +
                                                  std::to_string(u.size()) + " and " +
                                                  std::to_string(v.size()));
  }
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  if (nu == 0.0 || nv == 0.0) return 0.0;
  return std::clamp(dot / (std::sqrt(nu) * std::sqrt(nv)), -1.0, 1.0);
}

Vector offline_embed(std::string_view input, std::size_t dimension) {
  Vector out(dimension, 0.0);
  if (dimension == 0) return out;

  // Lowercase and collapse whitespace runs into single spaces.
  std::u32string norm;
  bool pending_space = false;
  for (char32_t cp : text::decode_utf8(input)) {
    if (text::is_space(cp)) {
      pending_space = !norm.empty();
      continue;
    }
    if (pending_space) norm += U' ';
    pending_space = false;
    norm += text::to_lower(cp);
  }
  if (norm.empty()) return out;

  const std::u32string padded = U" " + norm + U" ";
  for (std::size_t i = 0; i + 3 <= padded.size(); ++i) {
    const std::string gram = text::encode_utf8(std::u32string_view(padded).substr(i, 3));
    out[fnv1a64(gram) % dimension] += 1.0;
  }
  double norm2 = 0.0;
  for (double x : out) norm2 += x * x;
  const double inv = 1.0 / std::sqrt(norm2);
  for (double& x : out) x *= inv;
  return out;
}

Vector Embedder::embed(std::string_view text) {
  const std::string one(text);
  auto vectors = embed_batch(std::span<const std::string>(&one, 1));
  return std::move(vectors.at(0));
}

std::vector<Vector> OfflineEmbedder::embed_batch(std::span<const std::string> texts) {
  std::vector<Vector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(offline_embed(t, dimension_));
  return out;
}

RemoteEmbedder::RemoteEmbedder(std::shared_ptr<Gateway> gateway, std::string model_id)
    : gateway_(std::move(gateway)), model_id_(std::move(model_id)) {}

std::string RemoteEmbedder::id() const { return std::string(kRemoteEmbedderPrefix) + model_id_; }

std::vector<Vector> RemoteEmbedder::embed_batch(std::span<const std::string> texts) {
  if (texts.empty()) return {};
  return gateway_->embed_remote(std::vector<std::string>(texts.begin(), texts.end()), model_id_);
}

EmbedderRegistry::EmbedderRegistry(std::shared_ptr<Gateway> gateway) : gateway_(std::move(gateway)) {
  add(std::make_shared<OfflineEmbedder>());
}

void EmbedderRegistry::add(std::shared_ptr<Embedder> embedder) {
  std::lock_guard lock(mutex_);
  auto id = embedder->id();
  embedders_[std::move(id)] = std::move(embedder);
}

std::shared_ptr<Embedder> EmbedderRegistry::get(std::string_view id) {
  std::lock_guard lock(mutex_);
  if (auto it = embedders_.find(id); it != embedders_.end()) return it->second;
  if (gateway_ && id.starts_with(kRemoteEmbedderPrefix) && id.size() > kRemoteEmbedderPrefix.size()) {
    auto remote = std::make_shared<RemoteEmbedder>(
        gateway_, std::string(id.substr(kRemoteEmbedderPrefix.size())));
    embedders_.emplace(std::string(id), remote);
    return remote;
  }
  throw Error(ErrorCode::UnknownEmbedder, "unknown embedder \"" + std::string(id) + "\"");
}

Vector embed(std::string_view text, std::string_view embedder_id, EmbedderRegistry& registry) {
  return registry.get(embedder_id)->embed(text);
}

// --- pairing ---------------------------------------------------------------

double combined_score(double token_score, double semantic_score, double alpha) noexcept {
  return alpha * token_score + (1.0 - alpha) * std::max(semantic_score, 0.0);
}

std::string make_pair_id(std::string_view post_id, std::string_view claim_id) {
  std::string key(post_id);
  key += '\x1f';
  key += claim_id;
  return content_id("pair-", key);
}

namespace {

template <class Record>
void require_unique_ids(std::span<const Record> records, const char* what) {
  std::set<std::string_view> seen;
  for (const auto& r : records) {
    if (!seen.insert(r.id).second) {
      throw Error(ErrorCode::DuplicateId, std::string("duplicate ") + what + " id \"" + r.id + "\"");
    }
  }
}

std::vector<std::string> texts_of(auto records) {
  std::vector<std::string> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.text);
  return out;
}

}  // namespace

std::vector<PairCandidate> pair_candidates(std::span<const Post> posts,
                                           std::span<const Claim> claims,
                                           const MatcherConfig& config, Embedder& embedder,
                                           std::size_t workers) {
  config.validate();
  if (claims.empty()) throw Error(ErrorCode::EmptyClaimStore, "no claims to match against");
  require_unique_ids(posts, "post");
  require_unique_ids(claims, "claim");

  const auto claim_vectors = embedder.embed_batch(texts_of(claims));
  const auto post_vectors = embedder.embed_batch(texts_of(posts));
  std::vector<TokenSet> claim_tokens;
  claim_tokens.reserve(claims.size());
  for (const auto& c : claims) claim_tokens.push_back(tokenize(c.text));

  std::vector<std::vector<PairCandidate>> per_post(posts.size());
  parallel_for(posts.size(), workers, [&](std::size_t p) {
    const auto post_tokens = tokenize(posts[p].text);
    std::vector<PairCandidate> scored;
    scored.reserve(claims.size());
    for (std::size_t c = 0; c < claims.size(); ++c) {
      PairCandidate pc;
      pc.post_id = posts[p].id;
      pc.claim_id = claims[c].id;
      pc.token_score = token_similarity(post_tokens, claim_tokens[c]);
      pc.semantic_score = cosine(post_vectors[p], claim_vectors[c]);
      pc.combined_score = combined_score(pc.token_score, pc.semantic_score, config.alpha);
      if (pc.combined_score >= config.min_combined_score) scored.push_back(std::move(pc));
    }
    const auto keep = std::min<std::size_t>(scored.size(), static_cast<std::size_t>(config.top_k));
    std::partial_sort(scored.begin(), scored.begin() + keep, scored.end(),
                      [](const PairCandidate& a, const PairCandidate& b) {
                        if (a.combined_score != b.combined_score) return a.combined_score > b.combined_score;
                        return a.claim_id < b.claim_id;
                      });
    scored.resize(keep);
    for (auto& pc : scored) pc.pair_id = make_pair_id(pc.post_id, pc.claim_id);
    per_post[p] = std::move(scored);
  });

  std::vector<PairCandidate> out;
  for (auto& v : per_post) std::move(v.begin(), v.end(), std::back_inserter(out));
  std::sort(out.begin(), out.end(), [](const PairCandidate& a, const PairCandidate& b) {
    if (a.combined_score != b.combined_score) return a.combined_score > b.combined_score;
    if (a.post_id != b.post_id) return a.post_id < b.post_id;
    return a.claim_id < b.claim_id;
  });
  return out;
}

}  // namespace factgpt
