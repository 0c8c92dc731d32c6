#include "treebf/bf.hpp"
#include "treebf/charform.hpp"
#include "treebf/suites.hpp"

#include <benchmark/benchmark.h>

using namespace treebf;

namespace {

// Suite runners; Arg(0) serial, Arg(1) OpenMP.
void run_named(benchmark::State& state, const char* name, int max_size) {
  SuiteOptions o;
  o.max_size = max_size;
  o.parallel = state.range(0) != 0;
  const auto* s = find_suite(name);
  for (auto _ : state) {
    auto rep = run_suite(*s, o);
    benchmark::DoNotOptimize(rep.checks);
  }
}

void BM_Lemma31(benchmark::State& state) { run_named(state, "lemma31", 5); }
void BM_Charform(benchmark::State& state) { run_named(state, "charform", 6); }
void BM_Karp(benchmark::State& state) { run_named(state, "karp", 5); }

std::vector<FiniteTree> sample_trees(int count, std::size_t size) {
  std::vector<FiniteTree> ts;
  for (int k = 0; k < count; ++k)
    ts.push_back(gen_random(size, static_cast<std::uint64_t>(k)));
  return ts;
}

// Root-tuple queries between random trees, fresh solver per iteration.
void BM_GameQueries(benchmark::State& state) {
  const auto ts = sample_trees(12, static_cast<std::size_t>(state.range(0)));
  const NodeId root[] = {0};
  for (auto _ : state) {
    BfSolver solver;
    int yes = 0;
    for (const auto& A : ts)
      for (const auto& B : ts)
        yes += solver.game_leq(A, root, B, root, 3);
    benchmark::DoNotOptimize(yes);
  }
}

void BM_DecompQueries(benchmark::State& state) {
  const auto ts = sample_trees(12, static_cast<std::size_t>(state.range(0)));
  const NodeId root[] = {0};
  for (auto _ : state) {
    BfSolver solver;
    int yes = 0;
    for (const auto& A : ts)
      for (const auto& B : ts)
        yes += solver.decomp_leq(A, root, B, root, 3);
    benchmark::DoNotOptimize(yes);
  }
}

void BM_CharFormula(benchmark::State& state) {
  const auto A = gen_random(static_cast<std::size_t>(state.range(0)), 3);
  const NodeId root[] = {0};
  for (auto _ : state) {
    auto f = char_formula(A, root, 3, static_cast<int>(A.size()) + 1);
    benchmark::DoNotOptimize(f);
  }
}

} // namespace

BENCHMARK(BM_Lemma31)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Charform)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Karp)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GameQueries)->Arg(5)->Arg(7)->Arg(9)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DecompQueries)->Arg(5)->Arg(7)->Arg(9)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CharFormula)->Arg(4)->Arg(6)->Arg(8)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
