#include "vizgen/analysis/insights.hpp"

#include <benchmark/benchmark.h>

#include <random>

namespace {

using namespace vizgen;

std::vector<double> noisy_series(std::size_t n) {
  std::mt19937_64 rng(42);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = 3.0 * static_cast<double>(i) + noise(rng);
  return y;
}

void BM_DetectTrend(benchmark::State& state) {
  const auto y = noisy_series(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    auto t = analysis::detect_trend(y);
    benchmark::DoNotOptimize(t);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_DetectTrend)->Arg(100)->Arg(10000);

void BM_DetectAnomalies(benchmark::State& state) {
  auto y = noisy_series(static_cast<std::size_t>(state.range(0)));
  y[y.size() / 2] += 1e4;
  for (auto _ : state) {
    auto a = analysis::detect_anomalies(y);
    benchmark::DoNotOptimize(a);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_DetectAnomalies)->Arg(100)->Arg(10000);

// Pairwise Pearson over a rows x cols quantitative table.
void BM_DetectCorrelations(benchmark::State& state) {
  const auto rows = static_cast<std::size_t>(state.range(0));
  const auto cols = static_cast<std::size_t>(state.range(1));
  std::mt19937_64 rng(7);
  std::normal_distribution<double> noise(0.0, 1.0);
  sql::ResultTable table;
  for (std::size_t c = 0; c < cols; ++c) table.columns.push_back({"q" + std::to_string(c), sql::SemanticType::Quantitative});
  for (std::size_t r = 0; r < rows; ++r) {
    std::vector<Value> row;
    const double base = noise(rng);
    for (std::size_t c = 0; c < cols; ++c) row.push_back(base * static_cast<double>(c + 1) + noise(rng));
    table.rows.push_back(std::move(row));
  }
  for (auto _ : state) {
    auto found = analysis::detect_correlations(table);
    benchmark::DoNotOptimize(found);
  }
}
BENCHMARK(BM_DetectCorrelations)->Args({1000, 4})->Args({10000, 8});

}  // namespace

BENCHMARK_MAIN();
