#include "latrbm/traj.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <mutex>
#include <string>

namespace latrbm {

namespace {

// Captures run_path's jumps as an event list.  The jump time equals the end
// of the sojourn reported just before it.
struct RecordingVisitor {
  std::vector<TrajectoryEvent>* ev;
  double t_end = 0;
  void sojourn(std::int64_t, double, double t1) { t_end = t1; }
  void jump(std::int64_t x, std::int64_t e, std::int64_t y) {
    ev->push_back(TrajectoryEvent{t_end, x, y, e});
  }
};

// Feeds a stored trajectory, truncated at `t`, through a visitor exactly as
// run_path would have (jumps strictly before t count; the final sojourn is
// cut at t).
template <class Visitor>
void replay(const TrajectoryRecord& tr, double t, Visitor&& vis) {
  double t0 = 0;
  std::int64_t x = tr.x0;
  for (const auto& ev : tr.events) {
    if (ev.time >= t) break;
    vis.sojourn(x, t0, ev.time);
    vis.jump(ev.from, ev.edge, ev.to);
    t0 = ev.time;
    x = ev.to;
  }
  vis.sojourn(x, t0, t);
}

// A record is only meaningful against the chain it was sampled from; edge
// indices silently pointing into a different CSR table would corrupt every
// downstream quantity, so check them before replaying.
void check_alignment(const TrajectoryRecord& tr, const Chain& c) {
  if (tr.x0 < 0 || tr.x0 >= c.nstates)
    throw BuildError("trajectory does not belong to this chain: bad initial site");
  std::int64_t x = tr.x0;
  for (const auto& ev : tr.events) {
    if (ev.from != x || ev.edge < c.row_ptr[ev.from] || ev.edge >= c.row_ptr[ev.from + 1] ||
        c.col[ev.edge] != ev.to)
      throw BuildError("trajectory does not belong to this chain: edge mismatch");
    x = ev.to;
  }
}

}  // namespace

TrajectoryRecord record_path(const Chain& c, std::int64_t x0, double T, Xoshiro256pp& rng,
                             std::uint64_t seed, std::int64_t path_index) {
  if (x0 < 0 || x0 >= c.nstates) throw BuildError("initial site outside the lattice box");
  if (!(T >= 0)) throw BuildError("path horizon must be nonnegative");
  TrajectoryRecord tr;
  tr.seed = seed;
  tr.path_index = path_index;
  tr.x0 = x0;
  tr.T = T;
  RecordingVisitor vis{&tr.events};
  run_path(c, x0, T, rng, vis);
  return tr;
}

TrajectoryRecord sample_path(const Chain& c, std::int64_t x0, double T, std::uint64_t seed) {
  Xoshiro256pp rng = path_rng(seed, 0);
  return record_path(c, x0, T, rng, seed, 0);
}

TrajectoryObservables observables(const TrajectoryRecord& traj, const Chain& c) {
  check_alignment(traj, c);

  // Sparse wall-layer bookkeeping; std::map keeps the output sorted by key.
  struct WallVisitor {
    const Chain* ch;
    std::map<std::int64_t, double> site_time;
    std::map<std::int64_t, std::int64_t> edge_jumps;
    void sojourn(std::int64_t x, double t0, double t1) {
      if (ch->near_wall[x]) site_time[x] += t1 - t0;
    }
    void jump(std::int64_t x, std::int64_t e, std::int64_t) {
      if (ch->near_wall[x]) ++edge_jumps[e];
    }
  };

  ClockVisitor cv(c);
  WallVisitor wv{&c, {}, {}};
  auto both = pair_visitor(cv, wv);
  replay(traj, traj.T, both);

  TrajectoryObservables o;
  o.interior_time = cv.clocks.interior_time;
  o.local_time = cv.clocks.face_local(c.sqrt_n);
  o.pair_occupation = cv.clocks.pair_local(c.sqrt_n);
  o.clamp_time = cv.clocks.clamp_time;
  o.upper_hits = cv.clocks.clamp_hits;
  o.jumps = static_cast<std::int64_t>(traj.events.size());
  o.wall_site_time.assign(wv.site_time.begin(), wv.site_time.end());
  o.wall_edge_jumps.assign(wv.edge_jumps.begin(), wv.edge_jumps.end());
  return o;
}

double fk_weight(const TrajectoryRecord& traj, const Chain& primal, const DualChain& dual,
                 double t) {
  if (primal.d != dual.c.d || primal.m != dual.c.m || primal.nstates != dual.c.nstates)
    throw BuildError("primal and adjoint chains do not share a lattice");
  if (!(t >= 0) || t > traj.T)
    throw BuildError("weight horizon must lie within the recorded trajectory");
  check_alignment(traj, dual.c);
  WeightVisitor wv(dual);
  replay(traj, t, wv);
  return std::exp(wv.w.total());  // -inf total (dual-only edge) maps to weight 0
}

MeanErr ensemble_estimate(const Chain& c, std::int64_t x0, double T,
                          const std::function<double(const TrajectoryRecord&)>& functional,
                          std::int64_t M, std::uint64_t root_seed, int threads) {
  if (M < 2) throw BuildError("ensemble needs at least two paths");
  if (x0 < 0 || x0 >= c.nstates) throw BuildError("initial site outside the lattice box");
  if (!(T >= 0)) throw BuildError("path horizon must be nonnegative");

  std::mutex mu;
  std::string first_error;
  auto rows = run_ensemble(M, 1, root_seed, threads,
                           [&](std::int64_t i, Xoshiro256pp& rng, double* out) {
                             try {
                               TrajectoryRecord tr = record_path(c, x0, T, rng, root_seed, i);
                               out[0] = functional(tr);
                             } catch (const std::exception& ex) {
                               out[0] = std::nan("");
                               std::lock_guard<std::mutex> lk(mu);
                               if (first_error.empty()) first_error = ex.what();
                             }
                           });
  if (!first_error.empty())
    throw BuildError("path functional failed: " + first_error);
  for (std::int64_t i = 0; i < M; ++i)
    if (!std::isfinite(rows[static_cast<size_t>(i)]))
      throw BuildError("non-finite functional value on path " + std::to_string(i));
  return column_stats(rows, M, 1)[0];
}

StationaryHistogram stationary_histogram(const Chain& c, double T_burn, double T_run,
                                         double bin_width, std::uint64_t seed,
                                         std::int64_t x0) {
  if (!(T_burn >= 0) || !(T_run > T_burn))
    throw BuildError("running horizon must exceed the burn-in");
  if (!(bin_width > 0)) throw BuildError("bin width must be positive");
  if (x0 < 0) {
    std::vector<int> mid(c.d, c.m / 2);
    x0 = c.index_of(mid);
  } else if (x0 >= c.nstates) {
    throw BuildError("initial site outside the lattice box");
  }

  auto occ = occupation_measure(c, x0, T_burn, T_run - T_burn, seed);

  StationaryHistogram hist;
  hist.bin_width = bin_width;
  hist.nbins = static_cast<int>(std::ceil(c.lp.K / bin_width - 1e-9));
  hist.site_mass = std::move(occ.mass);
  hist.clamp_fraction = occ.clamp_fraction;
  hist.jumps = occ.jumps;
  hist.span = T_run - T_burn;
  hist.axis_mass.assign(static_cast<size_t>(c.d) * hist.nbins, 0.0);
  for (int ax = 0; ax < c.d; ++ax) {
    auto bm = binned_marginal(c, hist.site_mass, ax, bin_width, hist.nbins);
    std::copy(bm.begin(), bm.end(),
              hist.axis_mass.begin() + static_cast<size_t>(ax) * hist.nbins);
  }
  return hist;
}

std::string paths_csv(const Chain& c, const std::vector<TrajectoryRecord>& paths,
                      const DualChain* dual) {
  std::string out = "path,seed";
  char buf[64];
  const int npair = c.d * (c.d - 1) / 2;
  for (int i = 0; i < c.d; ++i) out += ",end_" + std::to_string(i);
  out += ",interior_time";
  for (int i = 0; i < c.d; ++i) out += ",local_time_" + std::to_string(i);
  for (int i = 0; i < c.d; ++i)
    for (int j = i + 1; j < c.d; ++j)
      out += ",pair_time_" + std::to_string(i) + "_" + std::to_string(j);
  out += ",clamp_time,upper_hits,jumps";
  if (dual) out += ",weight";
  out += "\n";

  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, ",%.17g", v);
    out += buf;
  };
  for (const auto& tr : paths) {
    auto o = observables(tr, c);
    out += std::to_string(tr.path_index) + "," + std::to_string(tr.seed);
    const std::int16_t* xc = c.coords_of(tr.end_state());
    for (int i = 0; i < c.d; ++i) out += "," + std::to_string(xc[i]);
    num(o.interior_time);
    for (int i = 0; i < c.d; ++i) num(o.local_time[i]);
    for (int p = 0; p < npair; ++p) num(o.pair_occupation[p]);
    num(o.clamp_time);
    out += "," + std::to_string(o.upper_hits) + "," + std::to_string(o.jumps);
    if (dual) {
      // the paths are expected to come from dual->c itself
      if (dual->c.nstates != c.nstates || dual->c.d != c.d)
        throw BuildError("adjoint tables do not match the chain of these paths");
      WeightVisitor wv(*dual);
      replay(tr, tr.T, wv);
      num(std::exp(wv.w.total()));
    }
    out += "\n";
  }
  return out;
}

}  // namespace latrbm
