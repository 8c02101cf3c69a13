#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "latrbm/sim.hpp"

// Recorded trajectories and the path-level API built on them: sampling one
// path as an explicit event list, extracting its boundary observables,
// replaying it against the adjoint chain's reweighting tables, and small
// ensemble / occupation-histogram drivers.  The verification harness streams
// paths through visitors and never stores events; the record form is for
// unit tests, debugging and CSV export, so memory is O(jumps) per path.

namespace latrbm {

// One jump: the chain moved from `from` to `to` at `time`, along CSR edge
// index `edge` of the chain the path was sampled from.
struct TrajectoryEvent {
  double time;
  std::int64_t from;
  std::int64_t to;
  std::int64_t edge;
};

// Event-list form of one path on [0, T].  The path sits in x0 until
// events[0].time, then in events[k].to until events[k+1].time (the final
// sojourn ends at T); an empty list means it never left x0.
struct TrajectoryRecord {
  std::uint64_t seed = 0;
  std::int64_t path_index = 0;  // slot within an ensemble, 0 for single paths
  std::int64_t x0 = -1;
  double T = 0;
  std::vector<TrajectoryEvent> events;

  std::int64_t end_state() const { return events.empty() ? x0 : events.back().to; }
};

// Pathwise observables: the interior clock, the sqrt(n)-scaled face local
// times and pair occupations, and the boundary-layer bookkeeping that the
// reweighting consumes: occupation time per wall-layer state and jump count
// per wall-layer edge (sparse, sorted by key, visited entries only).
struct TrajectoryObservables {
  double interior_time = 0;             // time with every coordinate > 0
  std::vector<double> local_time;       // per axis, sqrt(n) * time on {x_i = 0}
  std::vector<double> pair_occupation;  // per pair i<j flattened, sqrt(n)-scaled
  std::vector<std::pair<std::int64_t, double>> wall_site_time;        // (state, time)
  std::vector<std::pair<std::int64_t, std::int64_t>> wall_edge_jumps; // (edge, count)
  double clamp_time = 0;                // time pressed against the top of the box
  std::int64_t upper_hits = 0;          // jumps landing on a clamped site
  std::int64_t jumps = 0;
};

// Samples one trajectory from x0 over [0, T], reproducible in `seed`.
// T = 0 yields an empty event list (and all-zero observables downstream).
TrajectoryRecord sample_path(const Chain& c, std::int64_t x0, double T, std::uint64_t seed);

// Same, drawing randomness from an existing stream; seed and path_index are
// recorded for bookkeeping only.  This is what the ensemble driver calls,
// with the stream for (root_seed, path_index).
TrajectoryRecord record_path(const Chain& c, std::int64_t x0, double T, Xoshiro256pp& rng,
                             std::uint64_t seed = 0, std::int64_t path_index = 0);

// Exact pathwise integrals and jump counts of a recorded trajectory.  Throws
// BuildError if the events do not line up with the chain's edge table.
TrajectoryObservables observables(const TrajectoryRecord& traj, const Chain& c);

// Likelihood-ratio weight of a dual-chain trajectory against the primal law
// over [0, t]: exp of (integral of the potential V) + (sum of per-jump log
// rate ratios) - (integral of the wall rate excess), all read off the tables
// `dual` carries.  `traj` must have been sampled from dual.c, which must sit
// on the same lattice as `primal`; t may not exceed the recorded horizon.
// A jump along a dual-only edge (no primal reverse rate) yields weight 0.
double fk_weight(const TrajectoryRecord& traj, const Chain& primal, const DualChain& dual,
                 double t);

// Monte Carlo mean / standard error of a path functional over M independent
// trajectories from x0, counter-seeded from root_seed.  Thread count <= 0
// picks hardware concurrency; the result is bit-identical for any thread
// count.  A functional that throws or returns a non-finite value aborts the
// run with a BuildError naming the offending path.
MeanErr ensemble_estimate(const Chain& c, std::int64_t x0, double T,
                          const std::function<double(const TrajectoryRecord&)>& functional,
                          std::int64_t M, std::uint64_t root_seed, int threads = 0);

// Occupation-time estimate of the stationary law from one long path: the
// first T_burn units are discarded, the remaining T_run - T_burn accumulate
// per-site occupation fractions, which are then aggregated into bins of
// width `bin_width` along every axis (cell-averaged, clipped at 0; see
// binned_marginal).  site_mass keeps the full lattice resolution for error
// assessment; clamp_fraction monitors how often the truncation box actually
// bound.
struct StationaryHistogram {
  double bin_width = 0;
  int nbins = 0;
  std::vector<double> axis_mass;  // d * nbins, row-major by axis, each row sums to <= 1
  std::vector<double> site_mass;  // per state, sums to 1
  double clamp_fraction = 0;
  std::int64_t jumps = 0;
  double span = 0;  // post-burn-in horizon actually accumulated
};
StationaryHistogram stationary_histogram(const Chain& c, double T_burn, double T_run,
                                         double bin_width, std::uint64_t seed,
                                         std::int64_t x0 = -1);

// One CSV row per trajectory: path index, seed, end-state coordinates
// (lattice units), clocks, local times, pair occupations, jump counts, and
// and, when the adjoint tables are supplied, the reweighting factor at the
// full horizon.  Stable column order, header included.
std::string paths_csv(const Chain& c, const std::vector<TrajectoryRecord>& paths,
                      const DualChain* dual = nullptr);

}  // namespace latrbm
