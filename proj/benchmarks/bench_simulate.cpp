#include <benchmark/benchmark.h>

#include "latrbm/sim.hpp"

namespace {

latrbm::RbmSpec skew2d() {
  latrbm::RbmSpec s;
  s.d = 2;
  s.b = {-1, -1};
  s.A = {1, 0, 0, 1};
  s.R = {1, 0, 0, 1};
  return s;
}

// Jump throughput of the single-path runner; the counter reports jumps/s.
void BM_run_path(benchmark::State& state) {
  latrbm::LatticeParams lp;
  lp.n = state.range(0);
  lp.K = 4;
  const auto c = latrbm::build_chain(skew2d(), lp);
  const auto x0 = c.index_of(std::vector<int>(2, c.m / 2));
  auto rng = latrbm::path_rng(7, 0);
  std::int64_t jumps = 0;
  for (auto _ : state) {
    latrbm::ClockVisitor cv(c);
    benchmark::DoNotOptimize(latrbm::run_path(c, x0, 10.0, rng, cv));
    jumps += cv.clocks.jumps;
  }
  state.counters["jumps/s"] =
      benchmark::Counter(static_cast<double>(jumps), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_run_path)->Arg(16)->Arg(64)->Arg(256);

void BM_ensemble(benchmark::State& state) {
  latrbm::LatticeParams lp;
  lp.n = 64;
  lp.K = 4;
  const auto c = latrbm::build_chain(skew2d(), lp);
  const auto x0 = c.index_of(std::vector<int>(2, c.m / 2));
  const int threads = static_cast<int>(state.range(0));
  for (auto _ : state) {
    const auto rows = latrbm::run_ensemble(
        2000, 1, 11, threads, [&](std::int64_t, latrbm::Xoshiro256pp& rng, double* out) {
          latrbm::ClockVisitor cv(c);
          latrbm::run_path(c, x0, 1.0, rng, cv);
          out[0] = cv.clocks.face_time[0];
        });
    benchmark::DoNotOptimize(rows.data());
  }
}
BENCHMARK(BM_ensemble)->Arg(1)->Arg(4)->Arg(8)->UseRealTime();

}  // namespace
