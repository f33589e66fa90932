#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "cacheleak/tokenizer.hpp"

namespace cacheleak {

class EmptyCorpus : public std::invalid_argument {
 public:
  EmptyCorpus() : std::invalid_argument("cannot train a predictor on an empty corpus") {}
};

/// Fixed-order n-gram model with add-alpha smoothing over a closed vocabulary.
/// Contexts shorter than order-1 are left-padded with a BOS sentinel.
class NGramPredictor {
 public:
  static constexpr TokenId kBos = 0xFFFFFFFFu;

  NGramPredictor(std::size_t vocab_size, std::size_t order = 3, double alpha = 0.01);

  void observe(std::span<const TokenId> sequence);
  double probability(std::span<const TokenId> context, TokenId token) const;
  /// P(. | context) over the whole vocabulary.
  std::vector<double> distribution(std::span<const TokenId> context) const;

  /// p(. | context)^(1/T) renormalised, stored as the tokens observed after
  /// the context plus one value shared by all others.
  struct SparseDistribution {
    double rest = 0.0;
    std::unordered_map<TokenId, double> listed;
    double at(TokenId t) const {
      auto it = listed.find(t);
      return it == listed.end() ? rest : it->second;
    }
  };
  SparseDistribution tempered_distribution(std::span<const TokenId> context, double temperature) const;

  std::size_t order() const noexcept { return order_; }
  double alpha() const noexcept { return alpha_; }
  std::size_t vocab_size() const noexcept { return vocab_size_; }

 private:
  struct ContextCounts {
    std::uint64_t total = 0;
    std::unordered_map<TokenId, std::uint64_t> next;
  };
  TokenSeq context_key(std::span<const TokenId> context) const;

  std::size_t vocab_size_;
  std::size_t order_;
  double alpha_;
  std::map<TokenSeq, ContextCounts> counts_;
};

/// Throws EmptyCorpus when there is no token to count.
NGramPredictor train_predictor(const std::vector<TokenSeq>& sequences, std::size_t vocab_size,
                               std::size_t order = 3, double alpha = 0.01);

/// Per-position multipliers for rejected guesses. A guess is a token tuple;
/// each rejection halves its multiplier.
class PenaltyState {
 public:
  double multiplier(std::size_t position, std::span<const TokenId> guess) const;
  void reject(std::size_t position, std::span<const TokenId> guess);
  int rejections(std::size_t position, std::span<const TokenId> guess) const;
  /// Penalised tuples at `position`, keyed by tuple.
  const std::map<TokenSeq, int>& rejected(std::size_t position) const;

 private:
  std::map<std::size_t, std::map<TokenSeq, int>> rejected_;
};

/// Draws a token with weight (p * penalty)^(1/temperature). temperature 0
/// returns the penalised argmax (lowest id on ties).
TokenId sample_next(const NGramPredictor& predictor, std::span<const TokenId> context, double temperature,
                    const PenaltyState& penalty, std::size_t position, std::mt19937_64& rng);

/// Draws a k-token tuple. Each step uses the tempered conditional
/// p(w | context, prefix)^(1/T); the tuple penalty multiplies the whole chain
/// weight (raised to 1/T). Sampling is exact for that joint weight.
/// temperature 0 returns the tuple maximising product(p) * penalty.
TokenSeq predict_next_k(const NGramPredictor& predictor, std::span<const TokenId> context, std::size_t k,
                        double temperature, const PenaltyState& penalty, std::size_t position,
                        std::mt19937_64& rng);

/// Product of the conditionals along the tuple.
double tuple_probability(const NGramPredictor& predictor, std::span<const TokenId> context,
                         std::span<const TokenId> tuple);

}  // namespace cacheleak
