#include <doctest.h>

#include <cmath>
#include <numeric>

#include "cacheleak/predictor.hpp"

using namespace cacheleak;

// Bigram counts for the sequence 0 1 0 1 2 (BOS-padded):
//   BOS -> 0: 1;  0 -> 1: 2;  1 -> 0: 1, 1 -> 2: 1.
TEST_CASE("add-alpha probabilities match hand counts") {
  const auto p = train_predictor({TokenSeq{0, 1, 0, 1, 2}}, 3, 2, 1.0);
  const TokenSeq c0{0}, c1{1}, c2{2};
  CHECK(p.probability(c0, 1) == doctest::Approx(3.0 / 5.0));
  CHECK(p.probability(c0, 0) == doctest::Approx(1.0 / 5.0));
  CHECK(p.probability(c1, 2) == doctest::Approx(2.0 / 5.0));
  CHECK(p.probability({}, 0) == doctest::Approx(2.0 / 4.0));
  CHECK(p.probability(c2, 0) == doctest::Approx(1.0 / 3.0));  // unseen context
  CHECK(p.probability(c0, 5) == 0.0);
  const TokenSeq long_ctx{2, 2, 0};
  CHECK(p.probability(long_ctx, 1) == p.probability(c0, 1));
}

TEST_CASE("distributions are normalised and tempering is a power law") {
  const auto p = train_predictor({TokenSeq{0, 1, 0, 1, 2, 3, 1, 0}}, 5, 2, 0.5);
  const TokenSeq ctx{1};
  const auto d = p.distribution(ctx);
  CHECK(std::accumulate(d.begin(), d.end(), 0.0) == doctest::Approx(1.0));
  const auto t1 = p.tempered_distribution(ctx, 1.0);
  for (TokenId t = 0; t < 5; ++t) CHECK(t1.at(t) == doctest::Approx(d[t]));
  const auto t05 = p.tempered_distribution(ctx, 0.5);
  double z = 0;
  for (double x : d) z += x * x;
  for (TokenId t = 0; t < 5; ++t) CHECK(t05.at(t) == doctest::Approx(d[t] * d[t] / z));
  CHECK_THROWS_AS(p.tempered_distribution(ctx, 0.0), std::invalid_argument);
}

TEST_CASE("empty corpus and out-of-range tokens") {
  CHECK_THROWS_AS(train_predictor({}, 3), EmptyCorpus);
  CHECK_THROWS_AS(train_predictor({TokenSeq{}}, 3), EmptyCorpus);
  NGramPredictor p(2);
  CHECK_THROWS_AS(p.observe(TokenSeq{5}), std::out_of_range);
}

TEST_CASE("penalty halves per rejection") {
  PenaltyState s;
  const TokenSeq g{4};
  CHECK(s.multiplier(0, g) == 1.0);
  s.reject(0, g);
  s.reject(0, g);
  CHECK(s.multiplier(0, g) == 0.25);
  CHECK(s.rejections(0, g) == 2);
  CHECK(s.multiplier(1, g) == 1.0);
}

TEST_CASE("greedy sampling takes the penalised argmax") {
  const auto p = train_predictor({TokenSeq{0, 1, 0, 1, 0, 2}}, 3, 2, 0.01);
  std::mt19937_64 rng(1);
  PenaltyState s;
  const TokenSeq ctx{0};
  CHECK(sample_next(p, ctx, 0.0, s, 0, rng) == 1);
  s.reject(0, TokenSeq{1});
  s.reject(0, TokenSeq{1});
  CHECK(sample_next(p, ctx, 0.0, s, 0, rng) == 2);
  CHECK(predict_next_k(p, ctx, 2, 0.0, PenaltyState{}, 0, rng) == TokenSeq{1, 0});
}

TEST_CASE("tuple probability is the chain product") {
  const auto p = train_predictor({TokenSeq{0, 1, 2, 0, 1, 0}}, 3, 2, 1.0);
  const TokenSeq ctx{0}, tup{1, 2};
  const TokenSeq c1{0, 1};
  CHECK(tuple_probability(p, ctx, tup) == doctest::Approx(p.probability(ctx, 1) * p.probability(c1, 2)));
}

TEST_CASE("temperature sampling follows the tempered distribution") {
  const auto p = train_predictor({TokenSeq{0, 1, 0, 1, 0, 2, 0, 1}}, 3, 2, 0.5);
  const TokenSeq ctx{0};
  const auto want = p.tempered_distribution(ctx, 0.7);
  std::mt19937_64 rng(3);
  std::vector<int> hits(3, 0);
  const int n = 40000;
  for (int i = 0; i < n; ++i) ++hits[sample_next(p, ctx, 0.7, PenaltyState{}, 0, rng)];
  for (TokenId t = 0; t < 3; ++t) {
    const double q = want.at(t);
    CHECK(std::abs(hits[t] / double(n) - q) <= 4 * std::sqrt(q * (1 - q) / n) + 1e-4);
  }
}
