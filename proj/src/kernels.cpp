#include "cacheleak/kernels.hpp"

#include <cmath>
#include <vector>

#include <omp.h>

namespace cacheleak::kernels {

SparseVector sparsify(std::span<const double> dense) {
  SparseVector s;
  for (std::size_t j = 0; j < dense.size(); ++j) {
    if (dense[j] != 0.0) {
      s.index.push_back(static_cast<std::uint32_t>(j));
      s.value.push_back(dense[j]);
    }
  }
  return s;
}

BestRow best_dot_serial(std::span<const double> matrix, std::size_t dim, std::size_t rows,
                        std::span<const double> query) {
  BestRow best;
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = matrix.data() + r * dim;
    double s = 0.0;
    for (std::size_t j = 0; j < dim; ++j) s += query[j] * row[j];
    if (s > best.score) best = {static_cast<std::ptrdiff_t>(r), s};
  }
  return best;
}

BestRow best_dot_parallel(std::span<const double> columns, std::size_t stride, std::size_t rows,
                          const SparseVector& query) {
  BestRow best;
  const auto nnz = query.index.size();
  const double* base = columns.data();
#pragma omp parallel if (rows >= 4096)
  {
    const auto threads = static_cast<std::size_t>(omp_get_num_threads());
    const auto me = static_cast<std::size_t>(omp_get_thread_num());
    const std::size_t lo = rows * me / threads, hi = rows * (me + 1) / threads;
    std::vector<double> score(hi - lo, 0.0);
    for (std::size_t t = 0; t < nnz; ++t) {
      const double v = query.value[t];
      const double* col = base + static_cast<std::size_t>(query.index[t]) * stride;
      for (std::size_t r = lo; r < hi; ++r) score[r - lo] += v * col[r];
    }
    BestRow local;
    for (std::size_t r = lo; r < hi; ++r)
      if (score[r - lo] > local.score) local = {static_cast<std::ptrdiff_t>(r), score[r - lo]};
#pragma omp critical
    {
      if (local.row >= 0 && (local.score > best.score || (local.score == best.score && local.row < best.row)))
        best = local;
    }
  }
  return best;
}

namespace {
double distance(const double* a, const double* b, std::size_t dim) {
  double s = 0.0;
  for (std::size_t j = 0; j < dim; ++j) {
    const double d = a[j] - b[j];
    s += d * d;
  }
  return std::sqrt(s);
}
}  // namespace

std::vector<double> mean_pairwise_l2_serial(std::span<const double> points, std::size_t dim, std::size_t n) {
  std::vector<double> out(n, 0.0);
  if (n < 2) return out;
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) sum += distance(points.data() + i * dim, points.data() + j * dim, dim);
    out[i] = sum / static_cast<double>(n - 1);
  }
  return out;
}

std::vector<double> mean_pairwise_l2_parallel(std::span<const double> points, std::size_t dim, std::size_t n) {
  std::vector<double> out(n, 0.0);
  if (n < 2) return out;
  const double* p = points.data();
#pragma omp parallel for schedule(dynamic, 8) if (n >= 64)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    const auto ui = static_cast<std::size_t>(i);
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != ui) sum += distance(p + ui * dim, p + j * dim, dim);
    out[ui] = sum / static_cast<double>(n - 1);
  }
  return out;
}

}  // namespace cacheleak::kernels
