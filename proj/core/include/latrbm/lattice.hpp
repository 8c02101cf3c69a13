#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "latrbm/model.hpp"
#include "latrbm/rates.hpp"

// Materialized jump chains on the truncated lattice h*Z_+^d intersected with
// the box [0, K]^d, h = 1/sqrt(n).  States are the integer coordinate vectors
// 0..m per axis (m = K/h), enumerated lexicographically with coordinate 0 the
// most significant digit.  Jumps that would leave the box are suppressed
// (reflecting-by-censoring at the top; the genuine reflection physics lives
// at the zero faces).

namespace latrbm {

struct BuildError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct LatticeParams {
  long n = 0;        // scale; h = 1/sqrt(n)
  double K = 0;      // box half-size in continuum units
  double c0 = 1.0;   // base tangential constant
  double corner_fraction = 0.5;
  long max_states = 200000;
};

// Sparse row-compressed jump-rate table plus per-state geometry flags.
struct Chain {
  RbmSpec spec;
  LatticeParams lp;
  int d = 0;
  int m = 0;          // sites per axis minus one
  double h = 0;
  double sqrt_n = 0;
  std::int64_t nstates = 0;

  std::vector<std::int64_t> row_ptr;  // nstates + 1
  std::vector<std::int32_t> col;
  std::vector<double> rate;
  std::vector<double> total_rate;     // per state

  std::vector<std::int16_t> coord;    // nstates * d, lattice units
  std::vector<std::uint8_t> zero_mask;   // bit i set iff coord_i == 0
  std::vector<std::uint8_t> clamp_mask;  // bit i set iff coord_i == m
  std::vector<std::uint8_t> near_wall;   // 1 iff some coord_i <= 1

  const std::int16_t* coords_of(std::int64_t s) const { return &coord[s * d]; }
  std::int64_t index_of(const std::vector<int>& c) const;
  // Rate of the edge s -> t, 0 if absent (binary search within the row).
  double rate_of(std::int64_t s, std::int64_t t) const;
  std::vector<double> site_position(std::int64_t s) const;  // continuum units
};

// The adjoint chain shares the Chain layout and carries the extra per-state
// and per-edge data needed to reweight its paths into primal ones:
//   V        = (column sum minus row sum) of the primal table at each state,
//              the clock-rate mismatch picked up continuously along a path;
//   excess   = (primal in-rate sum minus adjoint out-rate sum), nonzero only
//              within one step of a zero face, integrated against occupation
//              time there;
//   log_ratio = log(primal reverse-edge rate / adjoint edge rate) per edge,
//              charged on jumps out of near-wall states.
struct DualChain {
  Chain c;
  std::vector<double> V;
  std::vector<double> excess;
  std::vector<double> log_ratio;  // aligned with c.col / c.rate; exact 0 off the wall
};

// Smallest n making every rate of the interior table nonnegative.
long min_scale(const RbmSpec& spec);

// Jump table at a strictly positive site, scale n (directions in lattice
// units, rates in continuum time; zero-rate directions omitted).  Throws
// std::domain_error when n is below min_scale.
std::vector<rates::Jump<double>> interior_rates(const RbmSpec& spec, long n);

// Jump table at a face site whose zero coordinate set is I (distinct
// indices into [0, d)), for the primal reflection matrix and the given
// tangential / corner constants.  Throws BuildError on malformed I or
// nonpositive constants, std::domain_error when a principal row sum of R
// over I fails to be positive.
std::vector<rates::Jump<double>> boundary_rates(const RbmSpec& spec, long n,
                                                const std::vector<int>& I,
                                                const rates::ConstantsT<double>& constants);

// Build the primal chain.  Validates the model (require_stability applies to
// the drift condition only; rate positivity is checked directly) and the
// lattice geometry: n >= 1, K >= 2h, state count within lp.max_states.
Chain build_chain(const RbmSpec& spec, const LatticeParams& lp,
                  bool require_stability = true);

// Build the adjoint chain of `primal` on the same lattice.  Throws BuildError
// if the support condition fails (a primal edge y -> x with no adjoint edge
// x -> y), which would make the reweighting undefined.
DualChain build_dual_chain(const Chain& primal);

// Human-oriented CSV dump of a chain's edges: one line per edge with the
// source site index, its coordinates (lattice units), the jump vector, and
// the rate; ordered by site then jump direction, stable across runs.
std::string dump_csv(const Chain& c);

}  // namespace latrbm
