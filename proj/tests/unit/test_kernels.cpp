#include <doctest.h>

#include <cmath>
#include <random>

#include "cacheleak/kernels.hpp"

using namespace cacheleak;
using namespace cacheleak::kernels;

namespace {

std::vector<double> transpose(const std::vector<double>& m, std::size_t rows, std::size_t dim, std::size_t stride) {
  std::vector<double> cols(dim * stride, 0.0);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t j = 0; j < dim; ++j) cols[j * stride + r] = m[r * dim + j];
  return cols;
}

}  // namespace

TEST_CASE("serial best dot matches a direct scan") {
  const std::vector<double> m{1, 0, 0, 1, 0.5, 0.5};
  const std::vector<double> q{0.2, 0.9};
  const auto b = best_dot_serial(m, 2, 3, q);
  CHECK(b.row == 1);
  CHECK(b.score == doctest::Approx(0.9));
  CHECK(best_dot_serial({}, 2, 0, q).row == -1);
}

TEST_CASE("ties go to the lowest row in both layouts") {
  const std::vector<double> m{1, 0, 1, 0, 0, 1};
  const std::vector<double> q{1, 0};
  CHECK(best_dot_serial(m, 2, 3, q).row == 0);
  const auto cols = transpose(m, 3, 2, 5);
  CHECK(best_dot_parallel(cols, 5, 3, sparsify(q)).row == 0);
}

TEST_CASE("sparsify keeps non-zeros in order") {
  const std::vector<double> d{0, 1.5, 0, -2, 0};
  const auto s = sparsify(d);
  CHECK(s.index == std::vector<std::uint32_t>{1, 3});
  CHECK(s.value == std::vector<double>{1.5, -2});
}

TEST_CASE("parallel best dot is bit-identical to the serial reference") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> nd;
  std::bernoulli_distribution sparse(0.2);
  for (std::size_t rows : {1, 7, 300}) {
    const std::size_t dim = 64, stride = rows + 3;
    std::vector<double> m(rows * dim);
    for (auto& x : m) x = nd(rng);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<double> q(dim, 0.0);
      for (auto& x : q)
        if (sparse(rng)) x = nd(rng);
      const auto s = best_dot_serial(m, dim, rows, q);
      const auto p = best_dot_parallel(transpose(m, rows, dim, stride), stride, rows, sparsify(q));
      CHECK(p.row == s.row);
      CHECK(p.score == s.score);
    }
  }
}

TEST_CASE("mean pairwise distance kernels agree") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1, 1);
  const std::size_t n = 57, dim = 9;
  std::vector<double> pts(n * dim);
  for (auto& x : pts) x = u(rng);
  const auto s = mean_pairwise_l2_serial(pts, dim, n);
  const auto p = mean_pairwise_l2_parallel(pts, dim, n);
  REQUIRE(s.size() == n);
  CHECK(s == p);
  // Three collinear points 0, 1, 3.
  const std::vector<double> line{0, 1, 3};
  const auto l = mean_pairwise_l2_serial(line, 1, 3);
  CHECK(l[0] == doctest::Approx(2.0));
  CHECK(l[1] == doctest::Approx(1.5));
  CHECK(l[2] == doctest::Approx(2.5));
}
