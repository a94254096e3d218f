#include <benchmark/benchmark.h>

#include "hhmo/duhamel.hpp"
#include "hhmo/front.hpp"
#include "hhmo/model.hpp"
#include "hhmo/solver.hpp"
#include "hhmo/tridiagonal.hpp"

namespace {

hhmo::ModelParams params() {
  hhmo::ModelParams p;
  p.u_star = 0.8 * hhmo::psi_alpha(p);
  return p;
}

const hhmo::SolutionRecord& record() {
  static const hhmo::SolutionRecord r =
      hhmo::run(params(), hhmo::make_grid(5e-3, 1e-5, 5.0, 0.25, 2.0), hhmo::RelayKind::sharp(), 100);
  return r;
}

void BM_SolverStep(benchmark::State& state) {
  const double dx = 6.0 / static_cast<double>(state.range(0));
  const auto grid = hhmo::make_grid(dx, dx * dx, 6.0, 1.0);
  hhmo::Solver solver(params(), grid, hhmo::RelayKind::sharp());
  for (auto _ : state) solver.step();
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(grid.nodes()));
}
BENCHMARK(BM_SolverStep)->Arg(600)->Arg(2400)->Arg(9600);

void BM_DepositionStep(benchmark::State& state) {
  const auto grid = hhmo::make_grid(2.5e-3, 2.5e-6, 6.0, 1.0);
  hhmo::Solver solver(params(), grid, hhmo::RelayKind::sharp(), hhmo::Scheme::SourceDeposition);
  for (auto _ : state) solver.step();
}
BENCHMARK(BM_DepositionStep);

void BM_Tridiagonal(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<double> lower(n, -0.5), diag(n, 2.0), upper(n, -0.5), rhs(n, 1.0), scratch(n);
  for (auto _ : state) {
    hhmo::solve_tridiagonal(lower, diag, upper, rhs, scratch);
    benchmark::DoNotOptimize(rhs.data());
  }
}
BENCHMARK(BM_Tridiagonal)->Arg(1000)->Arg(10000);

void BM_EvalF1(benchmark::State& state) {
  const auto& r = record();
  for (auto _ : state) benchmark::DoNotOptimize(hhmo::eval_F1(r, 0.3, 0.2));
}
BENCHMARK(BM_EvalF1)->Unit(benchmark::kMillisecond);

void BM_EvalF2(benchmark::State& state) {
  static const auto front = hhmo::extract_front(record());
  for (auto _ : state) benchmark::DoNotOptimize(hhmo::eval_F2(front, 0.3, 0.2));
}
BENCHMARK(BM_EvalF2);

void BM_CapitalPsi(benchmark::State& state) {
  const auto p = params();
  double eta = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(hhmo::capital_psi(eta, p));
    eta = eta > 5.0 ? 0.0 : eta + 1e-3;
  }
}
BENCHMARK(BM_CapitalPsi);

}  // namespace
BENCHMARK_MAIN();
