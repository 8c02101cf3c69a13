#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "latrbm/lattice.hpp"

// Path simulation:  a small counter-seeded generator, an inlined
// jump-chain runner templated on an observer, and the observable
// accumulators the verification harness consumes.  Everything here is
// deterministic given (root seed, path index): the ensemble driver hands
// each path its own stream derived from the pair, writes results into
// per-path slots, and reduces serially, so runs are bit-identical for a
// fixed seed regardless of thread count.

namespace latrbm {

// splitmix64 step; used to spread seeds, per Vigna's recommendation.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// xoshiro256++ (Blackman/Vigna), state filled from splitmix64.
class Xoshiro256pp {
 public:
  explicit Xoshiro256pp(std::uint64_t seed) {
    for (auto& w : s_) w = splitmix64(seed);
  }
  std::uint64_t next() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }
  // uniform on (0, 1); the zero mantissa pattern is rerolled so that
  // -log(u) is always finite.
  double uniform() {
    for (;;) {
      const double u = static_cast<double>(next() >> 11) * 0x1.0p-53;
      if (u > 0.0) return u;
    }
  }
  double exponential(double rate) { return -std::log(uniform()) / rate; }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::uint64_t s_[4];
};

inline Xoshiro256pp path_rng(std::uint64_t root_seed, std::int64_t path_index) {
  std::uint64_t mix = root_seed;
  (void)splitmix64(mix);
  mix ^= 0x632BE59BD9B4E019ull * static_cast<std::uint64_t>(path_index + 1);
  return Xoshiro256pp(mix);
}

// Runs the jump chain from `x0` over [0, T].  The visitor sees every
// sojourn interval and every jump:
//   vis.sojourn(state, t0, t1)            -- occupation of `state` on [t0, t1)
//   vis.jump(state, edge, target)         -- transition along CSR edge index
// The final sojourn is truncated at T and reported with t1 == T.
// Returns the state occupied at time T.
template <class Visitor>
std::int64_t run_path(const Chain& c, std::int64_t x0, double T, Xoshiro256pp& rng,
                      Visitor&& vis) {
  std::int64_t x = x0;
  double t = 0.0;
  while (t < T) {
    const double lam = c.total_rate[x];
    if (lam <= 0.0) {  // absorbing (cannot arise on these lattices, but be safe)
      vis.sojourn(x, t, T);
      return x;
    }
    double dt = rng.exponential(lam);
    if (t + dt >= T) {
      vis.sojourn(x, t, T);
      return x;
    }
    vis.sojourn(x, t, t + dt);
    t += dt;
    // linear scan of the row; rows are short (at most 2d + d(d-1) edges)
    double u = rng.uniform() * lam;
    std::int64_t e = c.row_ptr[x];
    const std::int64_t last = c.row_ptr[x + 1] - 1;
    for (; e < last; ++e) {
      u -= c.rate[e];
      if (u <= 0.0) break;
    }
    const std::int64_t y = c.col[e];
    vis.jump(x, e, y);
    x = y;
  }
  return x;
}

struct NullVisitor {
  void sojourn(std::int64_t, double, double) {}
  void jump(std::int64_t, std::int64_t, std::int64_t) {}
};

// Boundary clocks and the time-in-interior clock of one path, all in
// continuum units: face_local[i] estimates the reflection local time as
// sqrt(n) * (time with coordinate i at zero), pair_local[{i,j}] the
// sqrt(n)-scaled time with both coordinates at zero, clamp_time the time
// spent pressed against the top of the box (a truncation artifact to be
// monitored, not a feature of the target process).
struct PathClocks {
  double interior_time = 0;
  std::vector<double> face_time;       // d, unscaled occupation of {x_i = 0}
  std::vector<double> pair_time;       // d*(d-1)/2, unscaled, upper-tri order
  double clamp_time = 0;
  std::int64_t jumps = 0;
  std::int64_t clamp_hits = 0;         // jumps landing on a clamped site

  std::vector<double> face_local(double sqrt_n) const;
  std::vector<double> pair_local(double sqrt_n) const;
};

class ClockVisitor {
 public:
  explicit ClockVisitor(const Chain& c) : c_(&c) {
    clocks.face_time.assign(c.d, 0.0);
    clocks.pair_time.assign(static_cast<size_t>(c.d) * (c.d - 1) / 2, 0.0);
  }
  void sojourn(std::int64_t x, double t0, double t1) {
    const double dt = t1 - t0;
    const std::uint8_t zm = c_->zero_mask[x];
    if (zm == 0) {
      clocks.interior_time += dt;
    } else {
      int idx = 0;
      for (int i = 0; i < c_->d; ++i) {
        if (zm & (1u << i)) clocks.face_time[i] += dt;
        for (int j = i + 1; j < c_->d; ++j, ++idx)
          if ((zm & (1u << i)) && (zm & (1u << j))) clocks.pair_time[idx] += dt;
      }
    }
    if (c_->clamp_mask[x]) clocks.clamp_time += dt;
  }
  void jump(std::int64_t, std::int64_t, std::int64_t y) {
    ++clocks.jumps;
    if (c_->clamp_mask[y]) ++clocks.clamp_hits;
  }
  PathClocks clocks;

 private:
  const Chain* c_;
};

// Snapshots of the path at fixed times (sorted ascending).  Records the
// state occupied at each requested time; times beyond T get the final state.
class SnapshotVisitor {
 public:
  explicit SnapshotVisitor(std::vector<double> times)
      : states(times.size(), -1), times_(std::move(times)) {}
  void sojourn(std::int64_t x, double t0, double t1) {
    while (next_ < times_.size() && times_[next_] >= t0 && times_[next_] < t1)
      states[next_++] = x;
    last_ = x;
  }
  void jump(std::int64_t, std::int64_t, std::int64_t) {}
  void finish() {  // call after run_path to resolve t_k == T (or beyond)
    while (next_ < times_.size()) states[next_++] = last_;
  }
  std::vector<std::int64_t> states;

 private:
  std::vector<double> times_;
  size_t next_ = 0;
  std::int64_t last_ = -1;
};

// Log-weight of a dual path, accumulated in the three pieces of the change
// of measure (kept separate for diagnostics; the physical weight is the sum).
struct LogWeight {
  double potential = 0;   // integral of V along the path
  double excess = 0;      // minus integral of the wall rate excess
  double jumps = 0;       // sum of per-jump log rate ratios
  double total() const { return potential + excess + jumps; }
};

class WeightVisitor {
 public:
  explicit WeightVisitor(const DualChain& dc) : dc_(&dc) {}
  void sojourn(std::int64_t x, double t0, double t1) {
    const double dt = t1 - t0;
    w.potential += dt * dc_->V[x];
    w.excess -= dt * dc_->excess[x];
  }
  void jump(std::int64_t, std::int64_t e, std::int64_t) { w.jumps += dc_->log_ratio[e]; }
  LogWeight w;

 private:
  const DualChain* dc_;
};

// Applies two visitors in sequence (compose ad hoc for richer observers).
template <class V1, class V2>
struct PairVisitor {
  V1& a;
  V2& b;
  void sojourn(std::int64_t x, double t0, double t1) {
    a.sojourn(x, t0, t1);
    b.sojourn(x, t0, t1);
  }
  void jump(std::int64_t x, std::int64_t e, std::int64_t y) {
    a.jump(x, e, y);
    b.jump(x, e, y);
  }
};
template <class V1, class V2>
PairVisitor<V1, V2> pair_visitor(V1& a, V2& b) {
  return PairVisitor<V1, V2>{a, b};
}

// Deterministic multi-threaded ensemble: evaluates `fn(path_index, rng)`
// for path_index in [0, M), each with its own counter-derived stream, and
// stores the k results of each path contiguously in the returned row-major
// M x k matrix.  Thread count <= 0 means hardware concurrency.  The
// partition is static and the reduction is left to the caller, so results
// do not depend on the thread count.
std::vector<double> run_ensemble(
    std::int64_t M, int k, std::uint64_t root_seed, int threads,
    const std::function<void(std::int64_t, Xoshiro256pp&, double*)>& fn);

struct MeanErr {
  double mean = 0;
  double se = 0;     // standard error of the mean
  std::int64_t M = 0;
};

// Column-wise mean and standard error of a run_ensemble result.
std::vector<MeanErr> column_stats(const std::vector<double>& rows, std::int64_t M, int k);

// Occupation-time histogram of a single long path started at x0: burn_in is
// discarded, the remaining span is accumulated per state and normalized to
// sum 1.  Also reports the fraction of (post-burn-in) time on clamped sites.
struct OccupationResult {
  std::vector<double> mass;   // per state, sums to 1
  double clamp_fraction = 0;
  std::int64_t jumps = 0;
};
OccupationResult occupation_measure(const Chain& c, std::int64_t x0, double burn_in,
                                    double span, std::uint64_t seed);

// Marginal mean of coordinate `axis` under a per-state mass vector.
double marginal_mean(const Chain& c, const std::vector<double>& mass, int axis);

// Mass of {coordinate `axis` == 0} under a per-state mass vector.
double face_mass(const Chain& c, const std::vector<double>& mass, int axis);

// Aggregates a per-state mass vector into bins of the given width along one
// axis.  Each lattice site carries its mass spread uniformly over the cell
// [x - h/2, x + h/2) (clipped to x >= 0), and the bin takes the overlapping
// proportion, so comparing against the cell-averaged density of a smooth law
// is resolution-consistent.  Returns per-bin probability mass.
std::vector<double> binned_marginal(const Chain& c, const std::vector<double>& mass,
                                    int axis, double bin_width, int nbins);

// Samples from a per-state mass vector (linear scan of the cumulative sums).
std::int64_t sample_mass(const std::vector<double>& mass, Xoshiro256pp& rng);

}  // namespace latrbm
