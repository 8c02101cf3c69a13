#include <doctest.h>

#include <cmath>

#include "latrbm/model.hpp"

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

}  // namespace

TEST_CASE("admissibility: standard examples pass") {
  auto rep = validate_assumption(skew2d());
  CHECK(rep.ok);
  CHECK(rep.failures.empty());
  CHECK(rep.det_R == doctest::Approx(1.0));
  CHECK(rep.min_row_sum == doctest::Approx(1.0));
  REQUIRE(rep.Rinv_b.size() == 2);
  CHECK(rep.Rinv_b[0] == doctest::Approx(-1.0));

  rep = validate_assumption(gen2d());
  CHECK(rep.ok);
  CHECK(rep.det_R == doctest::Approx(1.15));
  // min over principal row sums of R and R*: the {1,2} subset of R* gives
  // 1 - 0.5 = 0.5.
  CHECK(rep.min_row_sum == doctest::Approx(0.5));
  CHECK(rep.Rinv_b[0] == doctest::Approx(-0.5 / 1.15));
  CHECK(rep.Rinv_b[1] == doctest::Approx(-1.3 / 1.15));
}

TEST_CASE("admissibility: each condition is caught") {
  RbmSpec s = skew2d();
  s.A = {1, 1, 1, 2};  // zero dominance gap in the first row only
  auto rep = validate_assumption(s);
  CHECK_FALSE(rep.ok);
  CHECK(rep.failures.size() == 1);

  s = skew2d();
  s.R = {1, 1, 1, 1};
  rep = validate_assumption(s);
  CHECK_FALSE(rep.ok);

  // Off-diagonal -2 makes the full-set row sum of R negative while R stays
  // invertible and R^{-1} b stays componentwise negative.
  s = skew2d();
  s.R = {1, -2, 0, 1};
  rep = validate_assumption(s);
  CHECK_FALSE(rep.ok);
  CHECK(rep.min_row_sum == doctest::Approx(-1.0));

  s = skew2d();
  s.b = {1, -1};
  rep = validate_assumption(s);
  CHECK_FALSE(rep.ok);
  CHECK_THROWS_AS(require_valid(s), ModelError);
}

TEST_CASE("admissibility: stability waiver keeps ok but records the witness") {
  RbmSpec s = skew2d();
  s.b = {3, 3};  // drift away from the origin, as for a candidate reversed motion
  auto rep = validate_assumption(s, false);
  CHECK(rep.ok);
  REQUIRE(rep.failures.size() == 1);
  CHECK(rep.failures[0].rfind("[waived] ", 0) == 0);
  CHECK_NOTHROW(require_valid(s, false));
  CHECK_THROWS_AS(require_valid(s, true), ModelError);
}

TEST_CASE("shape checks throw") {
  RbmSpec s = skew2d();
  s.b = {-1};
  CHECK_THROWS_AS(validate_assumption(s), ModelError);
  s = skew2d();
  s.A = {1, 0.5, 0, 1};  // asymmetric
  CHECK_THROWS_AS(validate_assumption(s), ModelError);
  s = skew2d();
  s.d = 0;
  s.b.clear();
  s.A.clear();
  s.R.clear();
  CHECK_THROWS_AS(validate_assumption(s), ModelError);
}

TEST_CASE("dual reflection negates off-diagonals and is an involution") {
  const std::vector<double> R = {1, 0.5, -0.3, 1};
  const auto Rs = dual_reflection(R, 2);
  CHECK(Rs[0] == 1.0);
  CHECK(Rs[1] == -0.5);
  CHECK(Rs[2] == 0.3);
  CHECK(Rs[3] == 1.0);
  CHECK(dual_reflection(Rs, 2) == R);
}

TEST_CASE("compatibility check yields the product-exponential density") {
  auto p = skew_check(skew2d());
  REQUIRE(p.has_value());
  REQUIRE(p->eta.size() == 2);
  CHECK(p->eta[0] == doctest::Approx(2.0));
  CHECK(p->eta[1] == doctest::Approx(2.0));
  CHECK(p->logC == doctest::Approx(std::log(4.0)));
  const double origin[2] = {0, 0};
  CHECK(p->density(origin, 2) == doctest::Approx(4.0));
  const double x[2] = {0.5, 1.0};
  CHECK(p->log_density(x, 2) == doctest::Approx(std::log(4.0) - 2 * 0.5 - 2 * 1.0));

  CHECK_FALSE(skew_check(gen2d()).has_value());

  RbmSpec one;
  one.d = 1;
  one.b = {-1};
  one.A = {1};
  one.R = {1};
  p = skew_check(one);
  REQUIRE(p.has_value());
  CHECK(p->eta[0] == doctest::Approx(2.0));
}

TEST_CASE("compatibility with unstable drift is rejected, not silently used") {
  RbmSpec s = skew2d();
  s.b = {1, 1};  // eta would come out at -2
  CHECK_THROWS_AS(skew_check(s), ModelError);
}

TEST_CASE("symmetric square root") {
  const auto I = sym_sqrt({1, 0, 0, 1}, 2);
  CHECK(I[0] == doctest::Approx(1.0));
  CHECK(I[1] == doctest::Approx(0.0));

  const auto D = sym_sqrt({4, 0, 0, 9}, 2);
  CHECK(D[0] == doctest::Approx(2.0));
  CHECK(D[3] == doctest::Approx(3.0));
  CHECK(D[1] == doctest::Approx(0.0).epsilon(1e-12));

  // Eigenvalues 1.2 and 0.8; entries frozen from an independent computation.
  const auto M = sym_sqrt({1, 0.2, 0.2, 1}, 2);
  CHECK(M[0] == doctest::Approx(0.994936153005124).epsilon(1e-12));
  CHECK(M[1] == doctest::Approx(0.1005089620052081).epsilon(1e-12));
  CHECK(M[1] == doctest::Approx(M[2]).epsilon(1e-14));
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      double mm = M[2 * i] * M[j] + M[2 * i + 1] * M[2 + j];
      double a = (i == j) ? 1.0 : 0.2;
      CHECK(mm == doctest::Approx(a).epsilon(1e-10));
    }

  CHECK_THROWS_AS(sym_sqrt({1, 2, 2, 1}, 2), ModelError);  // eigenvalue -1
}

TEST_CASE("dense solve") {
  const auto x = solve_dense({1, 0.5, -0.3, 1}, {-1, -1}, 2);
  CHECK(x[0] == doctest::Approx(-0.5 / 1.15));
  CHECK(x[1] == doctest::Approx(-1.3 / 1.15));
  CHECK_THROWS_AS(solve_dense({1, 1, 1, 1}, {1, 1}, 2), ModelError);
}
