#include <benchmark/benchmark.h>

#include "latrbm/lattice.hpp"

namespace {

latrbm::RbmSpec gen2d() {
  latrbm::RbmSpec s;
  s.d = 2;
  s.b = {-1, -1};
  s.A = {1, 0.2, 0.2, 1};
  s.R = {1, 0.5, -0.3, 1};
  return s;
}

void BM_build_chain(benchmark::State& state) {
  const auto spec = gen2d();
  latrbm::LatticeParams lp;
  lp.n = state.range(0);
  lp.K = 4;
  std::int64_t states = 0;
  for (auto _ : state) {
    const auto c = latrbm::build_chain(spec, lp);
    states = c.nstates;
    benchmark::DoNotOptimize(c.rate.data());
  }
  state.counters["states"] = static_cast<double>(states);
}
BENCHMARK(BM_build_chain)->Arg(16)->Arg(64)->Arg(256);

void BM_build_dual_chain(benchmark::State& state) {
  const auto spec = gen2d();
  latrbm::LatticeParams lp;
  lp.n = state.range(0);
  lp.K = 4;
  const auto c = latrbm::build_chain(spec, lp);
  for (auto _ : state) {
    const auto dc = latrbm::build_dual_chain(c);
    benchmark::DoNotOptimize(dc.log_ratio.data());
  }
}
BENCHMARK(BM_build_dual_chain)->Arg(16)->Arg(64)->Arg(256);

}  // namespace
