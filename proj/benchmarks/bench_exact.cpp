#include <benchmark/benchmark.h>

#include "latrbm/exact.hpp"

namespace {

latrbm::RbmSpec gen2d() {
  latrbm::RbmSpec s;
  s.d = 2;
  s.b = {-1, -1};
  s.A = {1, 0.2, 0.2, 1};
  s.R = {1, 0.5, -0.3, 1};
  return s;
}

void BM_transient(benchmark::State& state) {
  latrbm::LatticeParams lp;
  lp.n = state.range(0);
  lp.K = 2;
  const auto c = latrbm::build_chain(gen2d(), lp);
  const auto Q = latrbm::assemble_generator(c);
  std::vector<double> mu0(static_cast<size_t>(Q.nstates), 0.0);
  mu0[static_cast<size_t>(Q.nstates / 2)] = 1.0;
  for (auto _ : state) {
    const auto mu = latrbm::transient(Q, mu0, 0.5);
    benchmark::DoNotOptimize(mu.data());
  }
  state.counters["states"] = static_cast<double>(Q.nstates);
}
BENCHMARK(BM_transient)->Arg(16)->Arg(64)->Arg(144);

void BM_stationary_solve(benchmark::State& state) {
  latrbm::LatticeParams lp;
  lp.n = state.range(0);
  lp.K = 2;
  const auto c = latrbm::build_chain(gen2d(), lp);
  const auto Q = latrbm::assemble_generator(c);
  for (auto _ : state) {
    const auto pi = latrbm::stationary_solve(Q);
    benchmark::DoNotOptimize(pi.data());
  }
  state.counters["states"] = static_cast<double>(Q.nstates);
}
BENCHMARK(BM_stationary_solve)->Arg(16)->Arg(64)->Arg(144);

}  // namespace

BENCHMARK_MAIN();
