#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "latrbm/sim.hpp"

using namespace latrbm;

namespace {

RbmSpec one_dim() {
  RbmSpec s;
  s.d = 1;
  s.b = {-1};
  s.A = {1};
  s.R = {1};
  return s;
}

RbmSpec skew2d() {
  RbmSpec s;
  s.d = 2;
  s.b = {-1, -1};
  s.A = {1, 0, 0, 1};
  s.R = {1, 0, 0, 1};
  return s;
}

Chain chain_1d() {
  LatticeParams lp;
  lp.n = 1;
  lp.K = 2;
  return build_chain(one_dim(), lp);
}

}  // namespace

TEST_CASE("counter-seeded streams are reproducible and distinct") {
  auto r1 = path_rng(42, 7);
  auto r2 = path_rng(42, 7);
  for (int i = 0; i < 16; ++i) CHECK(r1.next() == r2.next());

  auto r3 = path_rng(42, 8);
  auto r4 = path_rng(43, 7);
  bool same3 = true, same4 = true;
  auto r5 = path_rng(42, 7);
  for (int i = 0; i < 16; ++i) {
    const auto v = r5.next();
    same3 = same3 && (r3.next() == v);
    same4 = same4 && (r4.next() == v);
  }
  CHECK_FALSE(same3);
  CHECK_FALSE(same4);

  auto r = path_rng(1, 0);
  for (int i = 0; i < 1000; ++i) {
    const double u = r.uniform();
    CHECK(u > 0.0);
    CHECK(u < 1.0);
  }
  CHECK(r.exponential(2.0) > 0.0);
}

TEST_CASE("ensemble driver: constant functional, exact stats, layout") {
  const auto rows = run_ensemble(100, 2, 7, 2,
                                 [](std::int64_t i, Xoshiro256pp&, double* out) {
                                   out[0] = 1.0;
                                   out[1] = static_cast<double>(i);
                                 });
  REQUIRE(rows.size() == 200);
  const auto stats = column_stats(rows, 100, 2);
  CHECK(stats[0].mean == 1.0);
  CHECK(stats[0].se == 0.0);
  CHECK(stats[0].M == 100);
  CHECK(stats[1].mean == doctest::Approx(49.5));
  CHECK(rows[2 * 17 + 1] == 17.0);
}

TEST_CASE("ensemble results do not depend on the thread count") {
  const Chain c = chain_1d();
  const auto fn = [&](std::int64_t i, Xoshiro256pp& rng, double* out) {
    ClockVisitor cv(c);
    const auto end = run_path(c, 0, 5.0, rng, cv);
    out[0] = static_cast<double>(end) + 1e-6 * static_cast<double>(cv.clocks.jumps);
    (void)i;
  };
  const auto a = run_ensemble(500, 1, 99, 1, fn);
  const auto b = run_ensemble(500, 1, 99, 3, fn);
  const auto d = run_ensemble(500, 1, 99, 8, fn);
  CHECK(a == b);
  CHECK(a == d);

  const auto e = run_ensemble(500, 1, 100, 1, fn);
  CHECK(a != e);
}

TEST_CASE("column stats, frozen values") {
  const std::vector<double> rows = {1, 2, 3, 4};
  const auto st = column_stats(rows, 4, 1);
  CHECK(st[0].mean == doctest::Approx(2.5));
  CHECK(st[0].se == doctest::Approx(std::sqrt(5.0 / 3.0) / 2.0));
}

TEST_CASE("path clocks partition the horizon") {
  const Chain c = chain_1d();
  auto rng = path_rng(11, 0);
  ClockVisitor cv(c);
  run_path(c, 1, 25.0, rng, cv);
  const auto& k = cv.clocks;
  CHECK(k.interior_time + k.face_time[0] == doctest::Approx(25.0));
  CHECK(k.clamp_time <= 25.0);
  CHECK(k.jumps > 0);
  CHECK(k.face_local(1.0)[0] == doctest::Approx(k.face_time[0]));
  CHECK(k.face_local(8.0)[0] == doctest::Approx(8.0 * k.face_time[0]));
}

TEST_CASE("snapshots pick the occupied state at each requested time") {
  const Chain c = chain_1d();
  auto rng = path_rng(5, 3);
  SnapshotVisitor sv({0.0, 2.5, 10.0, 50.0});
  const auto end = run_path(c, 2, 10.0, rng, sv);
  sv.finish();
  CHECK(sv.states[0] == 2);
  CHECK(sv.states[1] >= 0);
  CHECK(sv.states[1] <= 2);
  CHECK(sv.states[2] == end);
  CHECK(sv.states[3] == end);
}

TEST_CASE("long-run occupation matches the stationary law of the small chain") {
  const Chain c = chain_1d();
  // pi = (9, 6, 2) / 17 for this chain.
  const auto occ = occupation_measure(c, 0, 200.0, 20000.0, 31);
  double total = 0;
  for (double m : occ.mass) total += m;
  CHECK(total == doctest::Approx(1.0));
  CHECK(occ.mass[0] == doctest::Approx(9.0 / 17).epsilon(0.03));
  CHECK(occ.mass[1] == doctest::Approx(6.0 / 17).epsilon(0.04));
  CHECK(occ.mass[2] == doctest::Approx(2.0 / 17).epsilon(0.08));
  CHECK(face_mass(c, occ.mass, 0) == occ.mass[0]);
  CHECK(marginal_mean(c, occ.mass, 0) ==
        doctest::Approx((occ.mass[1] + 2 * occ.mass[2])));
  CHECK(occ.clamp_fraction == doctest::Approx(occ.mass[2]));

  const auto again = occupation_measure(c, 0, 200.0, 20000.0, 31);
  CHECK(occ.mass == again.mass);
  CHECK(occ.jumps == again.jumps);
}

TEST_CASE("bin aggregation spreads each cell over its overlap, frozen values") {
  const Chain c = chain_1d();
  const std::vector<double> pi = {9.0 / 17, 6.0 / 17, 2.0 / 17};
  const auto bins = binned_marginal(c, pi, 0, 0.5, 4);
  REQUIRE(bins.size() == 4);
  // Cell of site 0 is [0, 0.5); cells of sites 1 and 2 straddle two bins.
  CHECK(bins[0] == doctest::Approx(9.0 / 17));
  CHECK(bins[1] == doctest::Approx(3.0 / 17));
  CHECK(bins[2] == doctest::Approx(3.0 / 17));
  CHECK(bins[3] == doctest::Approx(1.0 / 17));
}

TEST_CASE("sampling from a mass vector") {
  auto rng = path_rng(77, 0);
  const std::vector<double> point = {0.0, 0.0, 1.0};
  for (int i = 0; i < 50; ++i) CHECK(sample_mass(point, rng) == 2);

  const std::vector<double> half = {0.5, 0.5, 0.0};
  int zeros = 0;
  for (int i = 0; i < 20000; ++i) {
    const auto s = sample_mass(half, rng);
    CHECK(s <= 1);
    zeros += (s == 0);
  }
  CHECK(zeros == doctest::Approx(10000).epsilon(0.03));
}

TEST_CASE("path increments minus accumulated drift average to zero") {
  // Drift compensation identity for the jump chain: X_T - X_0 minus the
  // integrated per-site mean velocity is a martingale, so its ensemble mean
  // must vanish within the Monte Carlo error, at every site class (the
  // boundary rows included).
  LatticeParams lp;
  lp.n = 16;
  lp.K = 4;
  const Chain c = build_chain(skew2d(), lp);

  std::vector<double> vel(static_cast<size_t>(c.nstates) * c.d, 0.0);
  for (std::int64_t s = 0; s < c.nstates; ++s)
    for (std::int64_t e = c.row_ptr[s]; e < c.row_ptr[s + 1]; ++e)
      for (int k = 0; k < c.d; ++k)
        vel[static_cast<size_t>(s) * c.d + k] +=
            c.rate[e] * (c.coords_of(c.col[e])[k] - c.coords_of(s)[k]) * c.h;

  struct DriftVisitor {
    const std::vector<double>* vel;
    int d;
    double acc[2] = {0, 0};
    void sojourn(std::int64_t x, double t0, double t1) {
      for (int k = 0; k < d; ++k)
        acc[k] += (t1 - t0) * (*vel)[static_cast<size_t>(x) * d + k];
    }
    void jump(std::int64_t, std::int64_t, std::int64_t) {}
  };

  const std::int64_t x0 = c.index_of({8, 8});
  const auto x0pos = c.site_position(x0);
  const std::int64_t M = 20000;
  const auto rows = run_ensemble(
      M, 2, 2024, 0, [&](std::int64_t i, Xoshiro256pp& rng, double* out) {
        DriftVisitor dv{&vel, c.d, {0, 0}};
        const auto end = run_path(c, x0, 1.0, rng, dv);
        const auto pos = c.site_position(end);
        for (int k = 0; k < 2; ++k) out[k] = pos[k] - x0pos[k] - dv.acc[k];
        (void)i;
      });
  const auto st = column_stats(rows, M, 2);
  for (int k = 0; k < 2; ++k) {
    CHECK(st[k].se < 0.02);
    CHECK(std::abs(st[k].mean) < 4 * st[k].se);
  }
}
