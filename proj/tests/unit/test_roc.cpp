#include <doctest.h>

#include <cmath>
#include <random>

#include <boost/math/distributions/normal.hpp>

#include "cacheleak/roc.hpp"

using namespace cacheleak;

TEST_CASE("auc equals the pairwise ordering fraction") {
  // Positives above negatives in 5 of 6 pairs.
  const auto c = roc({{0.9, true}, {0.8, true}, {0.4, true}, {0.7, false}, {0.3, false}});
  CHECK(c.auc == doctest::Approx(5.0 / 6.0));
  CHECK(c.points.front().tpr == 0.0);
  CHECK(c.points.back().tpr == 1.0);
  CHECK(c.points.back().fpr == 1.0);
  for (std::size_t i = 1; i < c.points.size(); ++i) CHECK(c.points[i - 1].fpr <= c.points[i].fpr);
}

TEST_CASE("ties count one half") {
  CHECK(roc({{1.0, true}, {1.0, false}}).auc == doctest::Approx(0.5));
}

TEST_CASE("lower-is-positive mirrors the score") {
  const auto c = roc_lower_is_positive({{-2.0, true}, {-1.0, true}, {0.0, false}});
  CHECK(c.auc == doctest::Approx(1.0));
  CHECK(tpr_at_fpr(c, 0.0) == 1.0);
}

TEST_CASE("degenerate labels are rejected") {
  CHECK_THROWS_AS(roc({{1.0, true}}), DegenerateLabels);
  CHECK_THROWS_AS(roc({}), DegenerateLabels);
}

TEST_CASE("gaussian scores give the closed-form auc") {
  // Positives N(d,1), negatives N(0,1): AUC = Phi(d / sqrt 2).
  std::mt19937_64 rng(8);
  std::normal_distribution<double> nd;
  const boost::math::normal_distribution<double> phi;
  for (double d : {0.5, 1.0, 2.0}) {
    std::vector<LabeledScore> s;
    for (int i = 0; i < 20000; ++i) {
      s.push_back({nd(rng) + d, true});
      s.push_back({nd(rng), false});
    }
    CHECK(roc(s).auc == doctest::Approx(boost::math::cdf(phi, d / std::sqrt(2.0))).epsilon(0.01));
  }
}
