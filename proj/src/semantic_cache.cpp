#include "cacheleak/semantic_cache.hpp"

#include <algorithm>
#include <stdexcept>

namespace cacheleak {

SemanticCache::SemanticCache(SemanticCacheConfig config) : config_(std::move(config)) {
  if (!(config_.threshold > 0.0 && config_.threshold < 1.0))
    throw std::invalid_argument("semantic cache: threshold must lie in (0,1)");
  if (config_.capacity_entries == 0) throw std::invalid_argument("semantic cache: capacity must be positive");
  columns_.assign(config_.capacity_entries * config_.embedding.dimension, 0.0);
  slots_.resize(config_.capacity_entries);
}

std::optional<SemanticHit> SemanticCache::nearest(const Embedding& query) const {
  if (size_ == 0 || query.is_zero()) return std::nullopt;
  auto best = kernels::best_dot_parallel(columns_, config_.capacity_entries, size_, kernels::sparsify(query.values));
  if (best.row < 0) return std::nullopt;
  const auto& e = slots_[static_cast<std::size_t>(best.row)];
  return SemanticHit{e.response_text, best.score, e.tick};
}

std::optional<SemanticHit> SemanticCache::lookup(const Embedding& query) const {
  auto hit = nearest(query);
  if (!hit || hit->similarity < config_.threshold) return std::nullopt;
  return hit;
}

std::optional<SemanticHit> SemanticCache::lookup(std::string_view query) const {
  return lookup(embed(query, config_.embedding));
}

void SemanticCache::insert(std::string request_text, std::string response_text) {
  const std::size_t cap = config_.capacity_entries;
  std::size_t slot;
  if (size_ < cap) {
    slot = size_++;
  } else {
    slot = head_;
    head_ = (head_ + 1) % cap;
  }
  auto& e = slots_[slot];
  e.embedding = embed(request_text, config_.embedding);
  e.request_text = std::move(request_text);
  e.response_text = std::move(response_text);
  e.tick = next_tick_++;
  for (std::size_t j = 0; j < config_.embedding.dimension; ++j) columns_[j * cap + slot] = e.embedding.values[j];
}

void SemanticCache::flush() {
  size_ = 0;
  head_ = 0;
  std::fill(columns_.begin(), columns_.end(), 0.0);
  for (auto& s : slots_) s = SemanticEntry{};
}

std::vector<SemanticEntry> SemanticCache::entries() const {
  std::vector<SemanticEntry> out(slots_.begin(), slots_.begin() + static_cast<std::ptrdiff_t>(size_));
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.tick < b.tick; });
  return out;
}

nlohmann::json SemanticCache::dump() const {
  nlohmann::json items = nlohmann::json::array();
  for (const auto& e : entries())
    items.push_back({{"tick", e.tick}, {"request", e.request_text}, {"response", e.response_text}});
  return {{"threshold", config_.threshold}, {"capacity_entries", config_.capacity_entries}, {"entries", items}};
}

}  // namespace cacheleak
