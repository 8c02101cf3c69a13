#include "latrbm/sim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace latrbm {

std::vector<double> PathClocks::face_local(double sqrt_n) const {
  std::vector<double> out(face_time.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = sqrt_n * face_time[i];
  return out;
}

std::vector<double> PathClocks::pair_local(double sqrt_n) const {
  std::vector<double> out(pair_time.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = sqrt_n * pair_time[i];
  return out;
}

std::vector<double> run_ensemble(
    std::int64_t M, int k, std::uint64_t root_seed, int threads,
    const std::function<void(std::int64_t, Xoshiro256pp&, double*)>& fn) {
  if (M < 0 || k <= 0) throw std::invalid_argument("run_ensemble: bad shape");
  std::vector<double> rows(static_cast<size_t>(M) * k, 0.0);
  int nt = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  if (nt < 1) nt = 1;
  nt = static_cast<int>(std::min<std::int64_t>(nt, std::max<std::int64_t>(M, 1)));

  auto worker = [&](std::int64_t lo, std::int64_t hi) {
    for (std::int64_t i = lo; i < hi; ++i) {
      Xoshiro256pp rng = path_rng(root_seed, i);
      fn(i, rng, rows.data() + static_cast<size_t>(i) * k);
    }
  };
  if (nt == 1) {
    worker(0, M);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(nt);
    for (int t = 0; t < nt; ++t) {
      const std::int64_t lo = M * t / nt;
      const std::int64_t hi = M * (t + 1) / nt;
      pool.emplace_back(worker, lo, hi);
    }
    for (auto& th : pool) th.join();
  }
  return rows;
}

std::vector<MeanErr> column_stats(const std::vector<double>& rows, std::int64_t M, int k) {
  std::vector<MeanErr> out(k);
  for (int j = 0; j < k; ++j) {
    double sum = 0;
    for (std::int64_t i = 0; i < M; ++i) sum += rows[static_cast<size_t>(i) * k + j];
    const double mean = sum / static_cast<double>(M);
    double ss = 0;
    for (std::int64_t i = 0; i < M; ++i) {
      const double d = rows[static_cast<size_t>(i) * k + j] - mean;
      ss += d * d;
    }
    out[j].mean = mean;
    out[j].M = M;
    out[j].se = M > 1 ? std::sqrt(ss / (static_cast<double>(M) * (M - 1))) : 0.0;
  }
  return out;
}

namespace {

// Accumulates occupation time per state over [burn_in, burn_in + span].
class OccupationVisitor {
 public:
  OccupationVisitor(const Chain& c, double burn_in, double end)
      : mass(c.nstates, 0.0), c_(&c), t_lo_(burn_in), t_hi_(end) {}
  void sojourn(std::int64_t x, double t0, double t1) {
    const double lo = std::max(t0, t_lo_);
    const double hi = std::min(t1, t_hi_);
    if (hi <= lo) return;
    mass[x] += hi - lo;
    if (c_->clamp_mask[x]) clamp += hi - lo;
  }
  void jump(std::int64_t, std::int64_t, std::int64_t) { ++jumps; }
  std::vector<double> mass;
  double clamp = 0;
  std::int64_t jumps = 0;

 private:
  const Chain* c_;
  double t_lo_, t_hi_;
};

}  // namespace

OccupationResult occupation_measure(const Chain& c, std::int64_t x0, double burn_in,
                                    double span, std::uint64_t seed) {
  if (!(span > 0)) throw std::invalid_argument("occupation_measure: span must be positive");
  OccupationVisitor vis(c, burn_in, burn_in + span);
  Xoshiro256pp rng = path_rng(seed, 0);
  run_path(c, x0, burn_in + span, rng, vis);
  double total = 0;
  for (double v : vis.mass) total += v;
  OccupationResult res;
  res.mass.resize(c.nstates);
  for (std::int64_t s = 0; s < c.nstates; ++s) res.mass[s] = vis.mass[s] / total;
  res.clamp_fraction = vis.clamp / total;
  res.jumps = vis.jumps;
  return res;
}

double marginal_mean(const Chain& c, const std::vector<double>& mass, int axis) {
  double m = 0;
  for (std::int64_t s = 0; s < c.nstates; ++s)
    m += mass[s] * c.coord[s * c.d + axis] * c.h;
  return m;
}

double face_mass(const Chain& c, const std::vector<double>& mass, int axis) {
  double m = 0;
  for (std::int64_t s = 0; s < c.nstates; ++s)
    if (c.coord[s * c.d + axis] == 0) m += mass[s];
  return m;
}

std::vector<double> binned_marginal(const Chain& c, const std::vector<double>& mass,
                                    int axis, double bin_width, int nbins) {
  std::vector<double> bins(nbins, 0.0);
  const double half = c.h / 2;
  for (std::int64_t s = 0; s < c.nstates; ++s) {
    if (mass[s] == 0) continue;
    const double x = c.coord[s * c.d + axis] * c.h;
    const double lo = std::max(0.0, x - half);
    const double hi = x + half;
    const double cell = hi - lo;
    const int b0 = std::max(0, static_cast<int>(std::floor(lo / bin_width)));
    const int b1 = std::min(nbins - 1, static_cast<int>(std::floor((hi - 1e-15) / bin_width)));
    for (int b = b0; b <= b1; ++b) {
      const double olo = std::max(lo, b * bin_width);
      const double ohi = std::min(hi, (b + 1) * bin_width);
      if (ohi > olo) bins[b] += mass[s] * (ohi - olo) / cell;
    }
  }
  return bins;
}

std::int64_t sample_mass(const std::vector<double>& mass, Xoshiro256pp& rng) {
  double total = 0;
  for (double v : mass) total += v;
  double u = rng.uniform() * total;
  for (size_t s = 0; s < mass.size(); ++s) {
    u -= mass[s];
    if (u <= 0.0) return static_cast<std::int64_t>(s);
  }
  // numerical slack: fall back to the last positive entry
  for (size_t s = mass.size(); s-- > 0;)
    if (mass[s] > 0) return static_cast<std::int64_t>(s);
  throw std::invalid_argument("sample_mass: empty mass vector");
}

}  // namespace latrbm
