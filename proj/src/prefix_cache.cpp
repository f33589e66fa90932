#include "cacheleak/prefix_cache.hpp"

#include <algorithm>
#include <tuple>

namespace cacheleak {

struct PrefixCache::Node {
  std::uint64_t id = 0;
  TokenSeq label;
  std::map<TokenSeq, std::unique_ptr<Node>> children;
  Node* parent = nullptr;
  std::uint64_t last_touched = 0;
};

struct PrefixCache::Walk {
  std::vector<Node*> path;     // matched nodes, root excluded
  Node* attach = nullptr;      // node under which unmatched tokens would hang
  Node* split = nullptr;       // partially matched child, if any
  std::size_t split_at = 0;    // matched tokens inside `split`
  std::size_t matched = 0;     // total matched tokens (multiple of K)
};

PrefixCache::PrefixCache(PrefixCacheConfig config) : config_(config), root_(std::make_unique<Node>()) {
  if (config_.granularity == 0) throw std::invalid_argument("prefix cache: granularity must be positive");
  if (config_.capacity_tokens == 0) throw std::invalid_argument("prefix cache: capacity must be positive");
}

PrefixCache::~PrefixCache() = default;
PrefixCache::PrefixCache(PrefixCache&&) noexcept = default;
PrefixCache& PrefixCache::operator=(PrefixCache&&) noexcept = default;

TokenSeq PrefixCache::block_key(std::span<const TokenId> seq, std::size_t pos) const {
  return TokenSeq(seq.begin() + static_cast<std::ptrdiff_t>(pos),
                  seq.begin() + static_cast<std::ptrdiff_t>(pos + config_.granularity));
}

PrefixCache::Walk PrefixCache::walk(std::span<const TokenId> seq, std::uint64_t tick) {
  const std::size_t k = config_.granularity;
  Walk w;
  Node* node = root_.get();
  std::size_t pos = 0;
  while (pos + k <= seq.size()) {
    auto it = node->children.find(block_key(seq, pos));
    if (it == node->children.end()) break;
    Node* child = it->second.get();
    const auto& label = child->label;
    std::size_t lcp = 0;
    while (lcp < label.size() && pos + lcp < seq.size() && label[lcp] == seq[pos + lcp]) ++lcp;
    lcp -= lcp % k;
    child->last_touched = tick;
    w.path.push_back(child);
    pos += lcp;
    if (lcp < label.size()) {
      w.split = child;
      w.split_at = lcp;
      break;
    }
    node = child;
  }
  w.attach = node;
  w.matched = pos;
  return w;
}

MatchResult PrefixCache::match_prefix(std::span<const TokenId> query) {
  const auto tick = ++clock_;
  auto w = walk(query, tick);
  MatchResult r;
  r.shared_len = w.matched;
  r.matched_node_path.reserve(w.path.size());
  for (auto* n : w.path) r.matched_node_path.push_back(n->id);
  return r;
}

std::size_t PrefixCache::peek_prefix(std::span<const TokenId> query) const {
  const std::size_t k = config_.granularity;
  const Node* node = root_.get();
  std::size_t pos = 0;
  while (pos + k <= query.size()) {
    auto it = node->children.find(block_key(query, pos));
    if (it == node->children.end()) break;
    const auto& label = it->second->label;
    std::size_t lcp = 0;
    while (lcp < label.size() && pos + lcp < query.size() && label[lcp] == query[pos + lcp]) ++lcp;
    lcp -= lcp % k;
    pos += lcp;
    if (lcp < label.size()) break;
    node = it->second.get();
  }
  return pos;
}

void PrefixCache::evict_until(std::size_t needed, const std::vector<const Node*>& protect) {
  while (resident_ + needed > config_.capacity_tokens) {
    Node* victim = nullptr;
    // Full walk: trees stay small (tens to hundreds of nodes) in this lab.
    std::vector<Node*> stack{root_.get()};
    while (!stack.empty()) {
      Node* n = stack.back();
      stack.pop_back();
      for (auto& [key, child] : n->children) stack.push_back(child.get());
      if (n == root_.get() || !n->children.empty()) continue;
      if (std::find(protect.begin(), protect.end(), n) != protect.end()) continue;
      if (!victim ||
          std::tie(n->last_touched, n->label, n->id) < std::tie(victim->last_touched, victim->label, victim->id))
        victim = n;
    }
    if (!victim) throw SequenceExceedsCapacity("prefix cache: nothing left to evict");
    resident_ -= victim->label.size();
    evicted_ += victim->label.size();
    Node* parent = victim->parent;
    parent->children.erase(block_key(victim->label, 0));
  }
}

std::size_t PrefixCache::insert(std::span<const TokenId> seq) {
  if (seq.size() > config_.capacity_tokens)
    throw SequenceExceedsCapacity("prefix cache: sequence of " + std::to_string(seq.size()) +
                                  " tokens exceeds capacity " + std::to_string(config_.capacity_tokens));
  const std::size_t k = config_.granularity;
  seq = seq.first(seq.size() - seq.size() % k);
  const auto tick = ++clock_;
  auto w = walk(seq, tick);
  const std::size_t fresh = seq.size() - w.matched;
  if (fresh == 0) return 0;

  std::vector<const Node*> protect(w.path.begin(), w.path.end());
  protect.push_back(w.attach);
  evict_until(fresh, protect);

  Node* parent = w.attach;
  if (w.split) {
    // Split the partially matched edge at a block boundary.
    Node* old = w.split;
    auto mid = std::make_unique<Node>();
    mid->id = next_id_++;
    mid->label.assign(old->label.begin(), old->label.begin() + static_cast<std::ptrdiff_t>(w.split_at));
    mid->parent = parent;
    mid->last_touched = tick;
    auto owned = std::move(parent->children.at(block_key(old->label, 0)));
    parent->children.erase(block_key(old->label, 0));
    old->label.erase(old->label.begin(), old->label.begin() + static_cast<std::ptrdiff_t>(w.split_at));
    old->parent = mid.get();
    mid->children.emplace(block_key(old->label, 0), std::move(owned));
    Node* mid_raw = mid.get();
    parent->children.emplace(block_key(mid_raw->label, 0), std::move(mid));
    parent = mid_raw;
  }

  auto leaf = std::make_unique<Node>();
  leaf->id = next_id_++;
  leaf->label.assign(seq.begin() + static_cast<std::ptrdiff_t>(w.matched), seq.end());
  leaf->parent = parent;
  leaf->last_touched = tick;
  parent->children.emplace(block_key(leaf->label, 0), std::move(leaf));
  resident_ += fresh;
  return fresh;
}

void PrefixCache::flush() {
  root_ = std::make_unique<Node>();
  resident_ = 0;
}

PrefixCacheStats PrefixCache::stats() const {
  PrefixCacheStats s;
  std::vector<std::pair<const Node*, std::size_t>> stack{{root_.get(), 0}};
  while (!stack.empty()) {
    auto [n, depth] = stack.back();
    stack.pop_back();
    ++s.node_count;
    s.resident_tokens += n->label.size();
    const std::size_t d = depth + n->label.size();
    s.max_depth = std::max(s.max_depth, d);
    for (const auto& [key, child] : n->children) stack.emplace_back(child.get(), d);
  }
  return s;
}

namespace {
nlohmann::json dump_node(const auto& node) {
  nlohmann::json children = nlohmann::json::array();
  for (const auto& [key, child] : node.children) children.push_back(dump_node(*child));
  return {{"id", node.id}, {"tokens", node.label}, {"tick", node.last_touched}, {"children", children}};
}
}  // namespace

nlohmann::json PrefixCache::dump() const {
  return {{"granularity", config_.granularity},
          {"capacity_tokens", config_.capacity_tokens},
          {"resident_tokens", resident_},
          {"root", dump_node(*root_)}};
}

}  // namespace cacheleak
