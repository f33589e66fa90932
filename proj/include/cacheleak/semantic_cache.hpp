#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "cacheleak/embedding.hpp"
#include "cacheleak/kernels.hpp"

namespace cacheleak {

struct SemanticCacheConfig {
  double threshold = 0.8;
  std::size_t capacity_entries = 1000;
  EmbeddingConfig embedding;
};

struct SemanticEntry {
  Embedding embedding;
  std::string request_text;
  std::string response_text;
  std::uint64_t tick = 0;
};

struct SemanticHit {
  std::string response_text;
  double similarity = 0.0;
  std::uint64_t tick = 0;
};

/// Response cache keyed by embedding similarity. Entries live in a fixed ring
/// of `capacity_entries` slots and are evicted oldest-first; lookups never
/// refresh anything. Ties on similarity resolve to the lowest storage slot.
class SemanticCache {
 public:
  /// Throws std::invalid_argument unless threshold is in (0,1) and capacity > 0.
  explicit SemanticCache(SemanticCacheConfig config = {});

  /// Best entry iff its cosine similarity reaches the threshold.
  std::optional<SemanticHit> lookup(std::string_view query) const;
  std::optional<SemanticHit> lookup(const Embedding& query) const;
  /// Highest similarity over all entries regardless of threshold (nullopt if empty).
  std::optional<SemanticHit> nearest(const Embedding& query) const;

  void insert(std::string request_text, std::string response_text);
  void flush();

  std::size_t size() const noexcept { return size_; }
  const SemanticCacheConfig& config() const noexcept { return config_; }
  /// Live entries in insertion order.
  std::vector<SemanticEntry> entries() const;
  nlohmann::json dump() const;

 private:
  SemanticCacheConfig config_;
  std::vector<double> columns_;  // dimension x capacity, see kernels::best_dot_parallel
  std::vector<SemanticEntry> slots_;
  std::size_t head_ = 0;  // oldest slot once full
  std::size_t size_ = 0;
  std::uint64_t next_tick_ = 1;
};

}  // namespace cacheleak
