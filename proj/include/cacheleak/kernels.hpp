#pragma once

// Data-parallel inner loops. Each kernel has a plain serial reference that
// the tests hold the OpenMP version to, bit for bit.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace cacheleak::kernels {

struct BestRow {
  std::ptrdiff_t row = -1;
  double score = -std::numeric_limits<double>::infinity();
};

/// Sparse view of a vector: strictly increasing indices with their values.
struct SparseVector {
  std::vector<std::uint32_t> index;
  std::vector<double> value;
};

SparseVector sparsify(std::span<const double> dense);

/// Row of `matrix` (rows x dim, row-major) with the largest dot product
/// against `query`; ties go to the lowest row.
BestRow best_dot_serial(std::span<const double> matrix, std::size_t dim, std::size_t rows,
                        std::span<const double> query);
/// Same contract on the transposed layout: coordinate j of row r lives at
/// columns[j * stride + r] (stride >= rows). Only the query's non-zeros are
/// visited, each as one contiguous sweep, and rows are split across OpenMP
/// threads. Every row still accumulates in ascending coordinate order and
/// skipping exact zeros leaves partial sums unchanged, so the result equals
/// best_dot_serial exactly.
BestRow best_dot_parallel(std::span<const double> columns, std::size_t stride, std::size_t rows,
                          const SparseVector& query);

/// For each point, mean Euclidean distance to every other point.
std::vector<double> mean_pairwise_l2_serial(std::span<const double> points, std::size_t dim, std::size_t n);
std::vector<double> mean_pairwise_l2_parallel(std::span<const double> points, std::size_t dim, std::size_t n);

}  // namespace cacheleak::kernels
