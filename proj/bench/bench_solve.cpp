#include <benchmark/benchmark.h>

#include "cabs/learn.hpp"
#include "cabs/model_io.hpp"

namespace {

causabs::LearningProblem model_design(int max_vars, int max_card) {
  causabs::LearningProblem p;
  p.problem_class = causabs::ProblemClass::model_design;
  p.base = std::make_shared<const causabs::Scm>(causabs::load_model_file(CABS_FIXTURE_DIR "/model_M.json"));
  p.caps = {max_vars, max_card};
  p.top_k = 10;
  return p;
}

void run(benchmark::State& state, causabs::Execution exec) {
  const auto problem = model_design(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  std::size_t evaluated = 0;
  for (auto _ : state) {
    auto r = causabs::solve(problem, {exec, 0});
    evaluated = r.candidates_evaluated;
    benchmark::DoNotOptimize(r.ranked.front().report.objective);
  }
  state.counters["candidates"] = static_cast<double>(evaluated);
  state.counters["candidates/s"] =
      benchmark::Counter(static_cast<double>(evaluated), benchmark::Counter::kIsIterationInvariantRate);
}

void BM_SolveSerial(benchmark::State& state) { run(state, causabs::Execution::serial); }
void BM_SolveParallel(benchmark::State& state) { run(state, causabs::Execution::parallel); }

BENCHMARK(BM_SolveSerial)->Args({2, 2})->Args({3, 2})->Args({2, 3})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SolveParallel)->Args({2, 2})->Args({3, 2})->Args({2, 3})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
