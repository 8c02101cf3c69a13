#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "latrbm/lattice.hpp"

using namespace latrbm;

namespace {

RbmSpec skew2d() {
  RbmSpec s;
  s.d = 2;
  s.b = {-1, -1};
  s.A = {1, 0, 0, 1};
  s.R = {1, 0, 0, 1};
  return s;
}

RbmSpec gen2d() {
  RbmSpec s;
  s.d = 2;
  s.b = {-1, -1};
  s.A = {1, 0.2, 0.2, 1};
  s.R = {1, 0.5, -0.3, 1};
  return s;
}

RbmSpec one_dim() {
  RbmSpec s;
  s.d = 1;
  s.b = {-1};
  s.A = {1};
  s.R = {1};
  return s;
}

}  // namespace

TEST_CASE("one-dimensional chain at unit scale, frozen rate table") {
  LatticeParams lp;
  lp.n = 1;
  lp.K = 2;
  const Chain c = build_chain(one_dim(), lp);
  REQUIRE(c.nstates == 3);
  CHECK(c.m == 2);
  CHECK(c.h == 1.0);

  CHECK(c.rate_of(0, 1) == doctest::Approx(1.0));   // face raising, n r gap / a
  CHECK(c.rate_of(1, 2) == doctest::Approx(0.5));
  CHECK(c.rate_of(1, 0) == doctest::Approx(1.5));
  CHECK(c.rate_of(2, 1) == doctest::Approx(1.5));
  CHECK(c.rate_of(2, 0) == 0.0);
  CHECK(c.rate_of(0, 2) == 0.0);

  CHECK(c.total_rate[0] == doctest::Approx(1.0));
  CHECK(c.total_rate[1] == doctest::Approx(2.0));
  CHECK(c.total_rate[2] == doctest::Approx(1.5));  // up jump censored at the top

  CHECK(c.index_of({0}) == 0);
  CHECK(c.index_of({2}) == 2);
  CHECK(c.site_position(1)[0] == doctest::Approx(1.0));
  CHECK(c.zero_mask[0] == 1);
  CHECK(c.zero_mask[1] == 0);
  CHECK(c.clamp_mask[2] == 1);
  CHECK(c.near_wall[2] == 0);
  CHECK(c.near_wall[1] == 1);
}

TEST_CASE("small planar chain: geometry flags and site rate tables") {
  LatticeParams lp;
  lp.n = 4;
  lp.K = 1;
  const Chain c = build_chain(skew2d(), lp);
  REQUIRE(c.nstates == 9);
  CHECK(c.m == 2);
  CHECK(c.h == doctest::Approx(0.5));

  const auto corner = c.index_of({0, 0});
  const auto face01 = c.index_of({0, 1});
  const auto inner = c.index_of({1, 1});
  const auto top = c.index_of({2, 2});

  // Corner with no coupling: independent raises at rate n per axis.
  CHECK(c.rate_of(corner, c.index_of({1, 0})) == doctest::Approx(4.0));
  CHECK(c.rate_of(corner, c.index_of({0, 1})) == doctest::Approx(4.0));
  CHECK(c.rate_of(corner, c.index_of({1, 1})) == 0.0);

  // Single-zero face: raise at n r_11, tangential at n c0 both ways.
  CHECK(c.rate_of(face01, c.index_of({1, 1})) == doctest::Approx(4.0));
  CHECK(c.rate_of(face01, c.index_of({0, 2})) == doctest::Approx(4.0));
  CHECK(c.rate_of(face01, c.index_of({0, 0})) == doctest::Approx(4.0));

  // Interior site: up 2, down 4 on each axis.
  CHECK(c.rate_of(inner, c.index_of({2, 1})) == doctest::Approx(2.0));
  CHECK(c.rate_of(inner, c.index_of({0, 1})) == doctest::Approx(4.0));
  CHECK(c.total_rate[inner] == doctest::Approx(12.0));

  // Top corner keeps only the down moves.
  CHECK(c.total_rate[top] == doctest::Approx(8.0));
  CHECK(c.rate_of(top, c.index_of({2, 1})) == doctest::Approx(4.0));

  CHECK(c.zero_mask[corner] == 3);
  CHECK(c.zero_mask[face01] == 1);
  CHECK(c.clamp_mask[top] == 3);
  CHECK(c.near_wall[inner] == 1);
  CHECK(c.near_wall[top] == 0);

  int wall_count = 0;
  for (std::int64_t s = 0; s < c.nstates; ++s) wall_count += c.near_wall[s];
  CHECK(wall_count == 8);
}

TEST_CASE("geometry guards") {
  LatticeParams lp;
  lp.n = 4;
  lp.K = 0.4;  // K / h = 0.8, not integral
  CHECK_THROWS_AS(build_chain(skew2d(), lp), BuildError);

  lp.K = 0.5;  // m = 1
  CHECK_THROWS_AS(build_chain(skew2d(), lp), BuildError);

  lp.K = 1;
  lp.max_states = 5;
  CHECK_THROWS_AS(build_chain(skew2d(), lp), BuildError);

  lp = LatticeParams{};
  lp.n = 0;
  lp.K = 1;
  CHECK_THROWS_AS(build_chain(skew2d(), lp), BuildError);

  RbmSpec big;
  big.d = 9;
  big.b.assign(9, -1.0);
  big.A.assign(81, 0.0);
  big.R.assign(81, 0.0);
  for (int i = 0; i < 9; ++i) big.A[static_cast<size_t>(i) * 10] = 1.0;
  for (int i = 0; i < 9; ++i) big.R[static_cast<size_t>(i) * 10] = 1.0;
  lp = LatticeParams{};
  lp.n = 4;
  lp.K = 1;
  CHECK_THROWS_AS(build_chain(big, lp), BuildError);
}

TEST_CASE("scale below the admissible minimum is rejected with the bound named") {
  RbmSpec up = one_dim();
  up.b = {3};
  CHECK(min_scale(up) == 36);
  LatticeParams lp;
  lp.n = 16;
  lp.K = 1;
  CHECK_THROWS_AS(build_chain(up, lp, false), BuildError);
  lp.n = 36;
  lp.K = 0.5;  // h = 1/6, m = 3
  CHECK_THROWS_AS(build_chain(up, lp, true), ModelError);  // drift points outward
  const Chain c = build_chain(up, lp, false);
  CHECK(c.nstates == 4);
}

TEST_CASE("site rate table wrappers") {
  const auto interior = interior_rates(gen2d(), 100);
  CHECK(interior.size() == 6);
  double up1 = 0, diag = 0;
  for (const auto& j : interior) {
    if (j.dir == std::vector<int>{1, 0}) up1 = j.rate;
    if (j.dir == std::vector<int>{1, 1}) diag = j.rate;
  }
  CHECK(up1 == doctest::Approx(40.0));
  CHECK(diag == doctest::Approx(10.0));

  const rates::ConstantsT<double> k{1.0, 0.5};
  const auto face = boundary_rates(gen2d(), 100, {0}, k);
  double down2 = 0;
  for (const auto& j : face)
    if (j.dir == std::vector<int>{0, -1}) down2 = j.rate;
  CHECK(down2 == doctest::Approx(150.0));

  const auto corner = boundary_rates(gen2d(), 100, {1, 0}, k);  // order-insensitive
  double both = 0;
  for (const auto& j : corner)
    if (j.dir == std::vector<int>{1, 1}) both = j.rate;
  CHECK(both == doctest::Approx(35.0));

  CHECK_THROWS_AS(interior_rates(gen2d(), 0), BuildError);
  CHECK_THROWS_AS(boundary_rates(gen2d(), 4, {}, k), BuildError);
  CHECK_THROWS_AS(boundary_rates(gen2d(), 4, {0, 0}, k), BuildError);
  CHECK_THROWS_AS(boundary_rates(gen2d(), 4, {2}, k), BuildError);
  CHECK_THROWS_AS(boundary_rates(gen2d(), 4, {0}, rates::ConstantsT<double>{0.0, 0.5}),
                  BuildError);
  CHECK_THROWS_AS(boundary_rates(gen2d(), 4, {0}, rates::ConstantsT<double>{1.0, 1.0}),
                  BuildError);

  RbmSpec flipped = gen2d();
  flipped.R = {-1, 0.5, -0.3, 1};
  CHECK_THROWS_AS(boundary_rates(flipped, 4, {0}, k), std::domain_error);
}

TEST_CASE("adjoint chain: transpose rows away from the wall, support everywhere") {
  LatticeParams lp;
  lp.n = 4;
  lp.K = 1.5;
  const Chain c = build_chain(gen2d(), lp);
  const DualChain dual = build_dual_chain(c);
  REQUIRE(dual.c.nstates == c.nstates);

  for (std::int64_t x = 0; x < c.nstates; ++x) {
    if (c.near_wall[x]) continue;
    // Fully interior rows of the adjoint table are the exact transpose.
    for (std::int64_t e = dual.c.row_ptr[x]; e < dual.c.row_ptr[x + 1]; ++e) {
      const std::int64_t y = dual.c.col[e];
      CHECK(dual.c.rate[e] == c.rate_of(y, x));
    }
    if (!c.clamp_mask[x]) CHECK(dual.V[x] == 0.0);
    CHECK(dual.excess[x] == 0.0);
  }

  // Support condition: every primal edge y -> x has an adjoint edge x -> y.
  for (std::int64_t y = 0; y < c.nstates; ++y)
    for (std::int64_t e = c.row_ptr[y]; e < c.row_ptr[y + 1]; ++e)
      CHECK(dual.c.rate_of(c.col[e], y) > 0.0);

  // Clock-rate identity behind the reweighting: the adjoint total rate is
  // the primal one shifted by potential and excess.
  for (std::int64_t x = 0; x < c.nstates; ++x)
    CHECK(dual.c.total_rate[x] ==
          doctest::Approx(c.total_rate[x] + dual.V[x] - dual.excess[x]).epsilon(1e-12));

  // Per-edge weights vanish identically on transposed rows.
  for (std::int64_t x = 0; x < c.nstates; ++x) {
    if (c.near_wall[x]) continue;
    for (std::int64_t e = dual.c.row_ptr[x]; e < dual.c.row_ptr[x + 1]; ++e)
      CHECK(dual.log_ratio[e] == 0.0);
  }
}

TEST_CASE("adjoint chain of the compatible example flips the drift") {
  LatticeParams lp;
  lp.n = 4;
  lp.K = 1;
  const Chain c = build_chain(skew2d(), lp);
  const DualChain dual = build_dual_chain(c);
  const auto inner = c.index_of({1, 1});
  // Copied transpose edge: the primal down rate 4 becomes the adjoint up rate,
  // so the adjoint drifts away from the origin (mean +2 per axis here).
  CHECK(dual.c.rate_of(inner, c.index_of({2, 1})) == doctest::Approx(4.0));
  // Moves onto a face use the drift-free interior rate n gap / 2.
  CHECK(dual.c.rate_of(inner, c.index_of({0, 1})) == doctest::Approx(2.0));

  // Edge weight bookkeeping at that site: the constructed move onto the face
  // carries log(primal reverse rate / adjoint rate) = log(4/2); the copied
  // move carries exactly zero.
  const auto onto_face = c.index_of({0, 1});
  const auto away = c.index_of({2, 1});
  for (std::int64_t e = dual.c.row_ptr[inner]; e < dual.c.row_ptr[inner + 1]; ++e) {
    if (dual.c.col[e] == onto_face) CHECK(dual.log_ratio[e] == doctest::Approx(std::log(2.0)));
    if (dual.c.col[e] == away) CHECK(dual.log_ratio[e] == 0.0);
  }
}

TEST_CASE("edge dump is stable and carries the boundary rows") {
  LatticeParams lp;
  lp.n = 100;
  lp.K = 0.2;
  const Chain c = build_chain(gen2d(), lp);
  const std::string a = dump_csv(c);
  const std::string b = dump_csv(c);
  CHECK(a == b);
  CHECK(a.find("# site") == 0);
  CHECK(a.find("150") != std::string::npos);  // the tangential down rate
  // One line per edge plus the header.
  const auto lines = static_cast<size_t>(std::count(a.begin(), a.end(), '\n'));
  CHECK(lines == c.col.size() + 1);
}
