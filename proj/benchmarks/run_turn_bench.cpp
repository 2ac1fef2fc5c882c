#include "bench_db.hpp"
#include "vizgen/workflow/engine.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace vizgen;

workflow::ConversationState connected() {
  workflow::ConversationState s;
  s.session_id = "bench";
  s.active_connection = bench::sales_connection();
  return s;
}

const workflow::UserMessage kBarChart{"bench", "Show me a bar chart of sales by month", Timestamp{}, std::nullopt};
const workflow::UserMessage kMultiIntent{"bench", "Show me a bar chart of sales and explain the biggest trend",
                                         Timestamp{}, std::nullopt};

void BM_RunTurnBarChart(benchmark::State& state) {
  const auto start = connected();
  for (auto _ : state) {
    auto r = workflow::run_turn(start, kBarChart);
    benchmark::DoNotOptimize(r);
  }
}
BENCHMARK(BM_RunTurnBarChart)->Unit(benchmark::kMillisecond);

void BM_RunTurnMultiIntent(benchmark::State& state) {
  const auto start = connected();
  for (auto _ : state) {
    auto r = workflow::run_turn(start, kMultiIntent);
    benchmark::DoNotOptimize(r);
  }
}
BENCHMARK(BM_RunTurnMultiIntent)->Unit(benchmark::kMillisecond);

void BM_CustomizeTurn(benchmark::State& state) {
  const auto charted = workflow::run_turn(connected(), kBarChart).state;
  const workflow::UserMessage blue{"bench", "Change the color of this chart to blue", Timestamp{}, std::nullopt};
  for (auto _ : state) {
    auto r = workflow::run_turn(charted, blue);
    benchmark::DoNotOptimize(r);
  }
}
BENCHMARK(BM_CustomizeTurn)->Unit(benchmark::kMillisecond);

void BM_ReplayTurn(benchmark::State& state) {
  const auto start = connected();
  const auto recorded = workflow::run_turn(start, kMultiIntent).trace;
  for (auto _ : state) {
    auto r = workflow::replay_trace(start, kMultiIntent, recorded);
    benchmark::DoNotOptimize(r);
  }
}
BENCHMARK(BM_ReplayTurn)->Unit(benchmark::kMillisecond);

void BM_SerializeState(benchmark::State& state) {
  auto s = workflow::run_turn(connected(), kMultiIntent).state;
  for (auto _ : state) {
    auto text = workflow::serialize_state(s);
    benchmark::DoNotOptimize(text);
  }
}
BENCHMARK(BM_SerializeState);

}  // namespace

BENCHMARK_MAIN();
