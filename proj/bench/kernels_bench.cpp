// Serial vs OpenMP kernels on semantic-cache sized inputs.

#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "cacheleak/embedding.hpp"
#include "cacheleak/kernels.hpp"

using namespace cacheleak;
using namespace cacheleak::kernels;

namespace {

struct Cache {
  std::size_t rows, dim;
  std::vector<double> row_major, columns;
  SparseVector query;
  std::vector<double> dense_query;
};

Cache make_cache(std::size_t rows) {
  Cache c{rows, EmbeddingConfig{}.dimension, {}, {}, {}, {}};
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> word(0, 5000);
  auto sentence = [&] {
    std::string s;
    for (int i = 0; i < 12; ++i) s += "w" + std::to_string(word(rng)) + " ";
    return s;
  };
  c.row_major.resize(rows * c.dim);
  c.columns.resize(rows * c.dim);
  for (std::size_t r = 0; r < rows; ++r) {
    const auto e = embed(sentence());
    for (std::size_t j = 0; j < c.dim; ++j) {
      c.row_major[r * c.dim + j] = e.values[j];
      c.columns[j * rows + r] = e.values[j];
    }
  }
  c.dense_query = embed(sentence()).values;
  c.query = sparsify(c.dense_query);
  return c;
}

void BM_best_dot_serial(benchmark::State& state) {
  const auto c = make_cache(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(best_dot_serial(c.row_major, c.dim, c.rows, c.dense_query));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_best_dot_parallel(benchmark::State& state) {
  const auto c = make_cache(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(best_dot_parallel(c.columns, c.rows, c.rows, c.query));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

std::vector<double> points(std::size_t n, std::size_t dim) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> nd;
  std::vector<double> p(n * dim);
  for (auto& x : p) x = nd(rng);
  return p;
}

void BM_mean_l2_serial(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto p = points(n, 256);
  for (auto _ : state) benchmark::DoNotOptimize(mean_pairwise_l2_serial(p, 256, n));
}

void BM_mean_l2_parallel(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto p = points(n, 256);
  for (auto _ : state) benchmark::DoNotOptimize(mean_pairwise_l2_parallel(p, 256, n));
}

}  // namespace

BENCHMARK(BM_best_dot_serial)->Arg(1000)->Arg(10000);
BENCHMARK(BM_best_dot_parallel)->Arg(1000)->Arg(10000);
BENCHMARK(BM_mean_l2_serial)->Arg(200)->Arg(800);
BENCHMARK(BM_mean_l2_parallel)->Arg(200)->Arg(800);

BENCHMARK_MAIN();
