#include <doctest.h>

#include <cmath>
#include <random>

#include <boost/math/distributions/binomial.hpp>

#include "cacheleak/probe.hpp"

using namespace cacheleak;

namespace {

double upper_tail(int n, int k, double p) {
  // P(X >= k) for X ~ Binomial(n, p).
  boost::math::binomial_distribution<double> b(n, p);
  return k == 0 ? 1.0 : boost::math::cdf(boost::math::complement(b, k - 1));
}

}  // namespace

TEST_CASE("vote decision is a k-of-n threshold") {
  using D = Decision;
  CHECK(vote_decision({D::hit, D::miss, D::hit}, 2) == D::hit);
  CHECK(vote_decision({D::hit, D::miss, D::miss}, 2) == D::miss);
  VoteConfig bad;
  bad.k = 11;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad.k = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("empirical vote rates follow the binomial tail") {
  std::mt19937_64 rng(17);
  const int trials = 20000;
  for (double p : {0.88, 0.10}) {
    std::bernoulli_distribution single(p);
    int positive = 0;
    for (int t = 0; t < trials; ++t) {
      std::vector<Decision> d(10);
      for (auto& x : d) x = single(rng) ? Decision::hit : Decision::miss;
      positive += vote_decision(d, 5) == Decision::hit;
    }
    const double want = upper_tail(10, 5, p);
    const double tol = 4.0 * std::sqrt(want * (1.0 - want) / trials) + 1e-4;
    CHECK(std::abs(static_cast<double>(positive) / trials - want) <= tol);
  }
  CHECK(upper_tail(10, 5, 0.88) == doctest::Approx(0.99958).epsilon(1e-4));
  CHECK(upper_tail(10, 5, 0.10) == doctest::Approx(0.0016349).epsilon(1e-3));
}

TEST_CASE("rates and thresholds on labelled deltas") {
  const std::vector<double> hit{-3, -2, -1, 0.5};
  const std::vector<double> miss{-0.5, 1, 2, 3};
  const auto r = rates_at(hit, miss, 0.0);
  CHECK(r.tpr == 0.75);
  CHECK(r.fpr == 0.25);
  const double y = youden_threshold(hit, miss);
  const auto ry = rates_at(hit, miss, y);
  CHECK(ry.tpr - ry.fpr == doctest::Approx(0.75));  // best cut sits between 0.5 and 1
  CHECK_THROWS_AS(youden_threshold({}, miss), std::invalid_argument);
}

TEST_CASE("fpr threshold pins the empirical miss rate") {
  std::vector<double> miss;
  for (int i = 1; i <= 10; ++i) miss.push_back(i);
  const double t = fpr_threshold(miss, 0.10);
  CHECK(t == doctest::Approx(1.5));
  CHECK(rates_at({}, miss, t).fpr == doctest::Approx(0.1));
  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd;
  std::vector<double> big(4000);
  for (auto& x : big) x = nd(rng);
  CHECK(rates_at({0.0}, big, fpr_threshold(big, 0.07)).fpr == doctest::Approx(0.07));
}

TEST_CASE("miss reference appends rare tokens") {
  CHECK(miss_reference("a b") == "a b <|rare|>");
  CHECK(miss_reference("a", 2) == "a <|rare|> <|rare|>");
}
