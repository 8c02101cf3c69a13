#pragma once

#include <cstdint>
#include <vector>

#include "latrbm/lattice.hpp"

// Reference linear algebra on enumerated lattices: matrix exponential
// actions by uniformization with certified truncation, stationary solves,
// and the chain-reversal oracle.  These are the exact values the
// statistical estimators are checked against; the module is a
// small-instance oracle, not a production solver (state cap in
// LatticeParams applies).  Eigen stays an implementation detail of the
// .cpp; the public interface speaks CSR vectors.

namespace latrbm {

// Sparse rate table in its own right (off-diagonal rates; the diagonal is
// implied as -total_rate).  Row sums of the full matrix are zero.
struct GeneratorMatrix {
  std::int64_t nstates = 0;
  std::vector<std::int64_t> row_ptr;
  std::vector<std::int32_t> col;
  std::vector<double> rate;
  std::vector<double> total_rate;
};

// Extracts the generator of a built chain and verifies irreducibility by
// forward reachability from state 0 on the symmetrized edge set; throws
// BuildError with a witness state if the chain does not connect.
GeneratorMatrix assemble_generator(const Chain& c);

// u = exp(t * M) v  with M = Q + diag(U) or its transpose.  Uniformization
// with a rigorous tail bound: the Poisson series over the shifted kernel
// P = I + M/Lambda is truncated only when the certified remainder drops
// below `tol` relative to the running sup norms; large Lambda*t is split
// into sub-steps so the weights stay representable.  The transpose and
// potential cases inflate row sums above 1; the certificate tracks that
// inflation instead of assuming stochasticity.
struct ExpmResult {
  std::vector<double> u;
  double tail_bound = 0;  // certified bound on the dropped remainder, sup norm
  int terms = 0;          // Poisson terms used in the largest sub-step
  int substeps = 1;
};
ExpmResult expm_apply(const GeneratorMatrix& Q, const std::vector<double>& v, double t,
                      bool transpose = false, const std::vector<double>* U = nullptr,
                      double tol = 1e-13);

// mu_t = mu_0 exp(tQ): distribution evolution (row-vector action).
std::vector<double> transient(const GeneratorMatrix& Q, const std::vector<double>& mu0,
                              double t, double tol = 1e-13);

// (exp(tQ') g)(x) = sum_y (exp(tQ))_{y,x} g(y): the transposed semigroup
// the duality identity is phrased in.
std::vector<double> fk_semigroup_apply(const GeneratorMatrix& Q,
                                       const std::vector<double>& g, double t,
                                       double tol = 1e-13);

// Row `from_state` of exp(tQ) via a dense scaling-and-squaring
// exponential; O(nstates^2) memory, guarded to <= 500 states.  Test oracle
// for the uniformization path.
std::vector<double> dense_expm_row(const GeneratorMatrix& Q, std::int64_t from_state,
                                   double t);

// pi with pi Q = 0, sum pi = 1: sparse LU on Q' with the normalization
// replacing one equation.  Verifies residual and strict positivity; throws
// BuildError on failure.
std::vector<double> stationary_solve(const GeneratorMatrix& Q, double residual_tol = 1e-9);

// The pi-reversal: edges x -> y at rate pi(y) q(y, x) / pi(x).  Stationary
// law and total exit rates are preserved (checked by the caller's tests,
// not here).
GeneratorMatrix reversal_generator(const GeneratorMatrix& Q, const std::vector<double>& pi);

// Maximum relative gap between corresponding edges of two generators on
// the same state enumeration; edges present in one but not the other count
// with gap 1 unless both rates are below `support_floor`.
double max_rate_gap(const GeneratorMatrix& a, const GeneratorMatrix& b,
                    double support_floor = 1e-12);

// | f' exp(tQ') g - g' exp(tQ) f |, algebraically zero; the return
// measures the numerical error of the two exponential actions.
double duality_check_exact(const GeneratorMatrix& Q, const std::vector<double>& f,
                           const std::vector<double>& g, double t);

// Assembles the generator the reweighted dual walk realizes (off-diagonal
// q~ * exp(log_ratio), diagonal -(total) + V - excess) and returns its
// maximum absolute entrywise gap to the transposed primal generator.  The
// change of measure is exact precisely when this vanishes.
double dual_representation_gap(const DualChain& dc, const Chain& primal);

}  // namespace latrbm
