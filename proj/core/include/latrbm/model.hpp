#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

// Problem definition for a reflected Brownian motion in the nonnegative
// orthant: drift b, covariance A, reflection matrix R (column i is the push
// direction on the face {x_i = 0}), together with the admissibility checks
// the construction rests on, the dual reflection matrix, and the
// product-exponential invariant density available when A and R are
// compatible.  Matrices are stored row-major in flat vectors; everything
// here is small and dense (d of a handful).

namespace latrbm {

struct ModelError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RbmSpec {
  int d = 0;
  std::vector<double> b;  // length d
  std::vector<double> A;  // d*d, symmetric
  std::vector<double> R;  // d*d

  double a(int i, int j) const { return A[static_cast<size_t>(i) * d + j]; }
  double r(int i, int j) const { return R[static_cast<size_t>(i) * d + j]; }
};

// Outcome of the admissibility check, one entry per failed condition plus
// the witnesses a caller might want to report.
struct ValidationReport {
  bool ok = false;
  std::vector<std::string> failures;
  double det_R = 0;
  double min_row_sum = 0;        // over all principal submatrices of R and R*
  std::vector<double> Rinv_b;    // the stability witness (wants < 0 componentwise)
};

// Checks, in order: shape consistency; symmetry of A; strict diagonal
// dominance of A; invertibility of R; componentwise R^{-1} b < 0; strict
// positivity of the row sums of every principal submatrix of R and of R*.
// All 2^d - 1 subsets are enumerated (d stays small).  With
// require_stability = false the R^{-1} b condition is reported but not
// enforced; chains for candidate reversed drifts need that relaxation,
// since those drifts point away from the origin by design.
ValidationReport validate_assumption(const RbmSpec& spec, bool require_stability = true);

// Throws ModelError (with the failure list in the message) unless spec passes.
void require_valid(const RbmSpec& spec, bool require_stability = true);

// R* = 2 diag(diag R) - R: each column reflected about the inward normal
// of its face.  Involution; fixes diagonals.
std::vector<double> dual_reflection(const std::vector<double>& R, int d);

// Product-exponential invariant density p(x) = C exp(-eta' x) on the
// orthant, with eta > 0 and C = prod eta_i.
struct InvariantDensity {
  std::vector<double> eta;
  double logC = 0;
  double log_density(const double* x, int d) const;
  double density(const double* x, int d) const;
};

// Detects the compatibility condition 2A = R D + D R' (D = diag of A,
// tolerance 1e-9 absolute entrywise).  When it holds, returns the density
// with eta = -2 (R D)^{-1} b; eta with a nonpositive component raises
// ModelError (inconsistent inputs).  Returns nullopt when the condition
// fails.
std::optional<InvariantDensity> skew_check(const RbmSpec& spec);

// Symmetric positive-definite square root M of A (M M = A, relative
// Frobenius tolerance 1e-10), via a symmetric eigendecomposition.  Throws
// ModelError on a nonpositive eigenvalue.
std::vector<double> sym_sqrt(const std::vector<double>& A, int d);

// Dense solve M x = y for small d (partial-pivot LU).  Throws ModelError
// on singular M.
std::vector<double> solve_dense(const std::vector<double>& M, const std::vector<double>& y,
                                int d);

}  // namespace latrbm
