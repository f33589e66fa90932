#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "cacheleak/tokenizer.hpp"

namespace cacheleak {

struct PrefixCacheConfig {
  /// Minimum sharing unit in tokens. K > 1 only shares whole K-token blocks.
  std::size_t granularity = 1;
  std::size_t capacity_tokens = 2048;
};

struct MatchResult {
  std::size_t shared_len = 0;
  /// Ids of the nodes whose edges were (partially) matched, root excluded.
  std::vector<std::uint64_t> matched_node_path;
};

struct PrefixCacheStats {
  std::size_t node_count = 0;  // root included
  std::size_t resident_tokens = 0;
  std::size_t max_depth = 0;  // in tokens
};

class SequenceExceedsCapacity : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Radix tree of token runs. Every edge holds a whole number of K-blocks and
/// children of a node are keyed by their first block. A single logical clock
/// ticks once per match or insert; eviction removes the leaf with the oldest
/// tick (ties: smallest first block, then creation order).
///
/// Not thread-safe; the serving engine serialises access.
class PrefixCache {
 public:
  explicit PrefixCache(PrefixCacheConfig config = {});
  ~PrefixCache();
  PrefixCache(PrefixCache&&) noexcept;
  PrefixCache& operator=(PrefixCache&&) noexcept;

  /// Longest cached prefix of `query`, rounded down to a multiple of K.
  /// Refreshes the LRU tick of every node on the matched path.
  MatchResult match_prefix(std::span<const TokenId> query);

  /// Same length as match_prefix but leaves LRU state untouched.
  std::size_t peek_prefix(std::span<const TokenId> query) const;

  /// Caches floor(|seq|/K)*K tokens of `seq` and returns how many of them
  /// were not already resident. Throws SequenceExceedsCapacity.
  std::size_t insert(std::span<const TokenId> seq);

  void flush();

  /// Tree-walk statistics, independent of the maintained counter.
  PrefixCacheStats stats() const;
  nlohmann::json dump() const;

  std::size_t resident_tokens() const noexcept { return resident_; }
  std::size_t granularity() const noexcept { return config_.granularity; }
  std::size_t capacity_tokens() const noexcept { return config_.capacity_tokens; }
  std::uint64_t clock() const noexcept { return clock_; }
  std::uint64_t evicted_tokens() const noexcept { return evicted_; }

 private:
  struct Node;
  struct Walk;

  Walk walk(std::span<const TokenId> seq, std::uint64_t tick);
  void evict_until(std::size_t needed, const std::vector<const Node*>& protect);
  TokenSeq block_key(std::span<const TokenId> seq, std::size_t pos) const;

  PrefixCacheConfig config_;
  std::unique_ptr<Node> root_;
  std::uint64_t clock_ = 0;
  std::uint64_t next_id_ = 1;
  std::size_t resident_ = 0;
  std::uint64_t evicted_ = 0;
};

}  // namespace cacheleak
