// Command-line front end: config ingestion, experiment orchestration and
// result emission.  Exit codes: 0 success / all tests pass, 1 a test failed
// or the model is inadmissible, 2 configuration problem, 3 internal error.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <exception>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "latrbm/config.hpp"
#include "latrbm/exact.hpp"
#include "latrbm/report.hpp"
#include "latrbm/traj.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

struct Overrides {
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = 0;
  bool threads_set = false;
};

// Precedence for the thread count: --threads flag, then LATRBM_THREADS,
// then the config value (0 = hardware concurrency).
void apply_overrides(latrbm::ExperimentConfig& cfg, const Overrides& ov) {
  if (ov.seed_set) cfg.seed = ov.seed;
  if (ov.threads_set) {
    cfg.threads = ov.threads;
  } else if (const char* env = std::getenv("LATRBM_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0')
      throw latrbm::ConfigError("LATRBM_THREADS is not an integer: " + std::string(env));
    cfg.threads = static_cast<int>(v);
  }
  if (!ov.out.empty()) cfg.out_dir = ov.out;
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

int cmd_validate(const Overrides& ov) {
  auto cfg = latrbm::load_config(ov.config);
  const auto rep = latrbm::validate_assumption(cfg.spec, true);

  std::printf("model: d=%d\n", cfg.spec.d);
  std::printf("det(R) = %.6g, min principal row sum of R/R* = %.6g\n", rep.det_R,
              rep.min_row_sum);
  std::string rb;
  for (double v : rep.Rinv_b) rb += (rb.empty() ? "" : ", ") + std::to_string(v);
  std::printf("R^-1 b = (%s)   (stability wants every entry < 0)\n", rb.c_str());
  std::printf("min_scale = %ld\n", latrbm::min_scale(cfg.spec));

  if (auto dens = latrbm::skew_check(cfg.spec)) {
    std::string eta;
    for (double v : dens->eta) eta += (eta.empty() ? "" : ", ") + std::to_string(v);
    std::printf("invariant density: product-exponential, eta = (%s)\n", eta.c_str());
  } else {
    std::printf("invariant density: no closed form (2A != RD + DR')\n");
  }

  for (long n : cfg.n_list) {
    latrbm::LatticeParams lp = cfg.lattice;
    lp.n = n;
    try {
      const auto c = latrbm::build_chain(cfg.spec, lp);
      std::printf("n=%ld: %lld states (box %d^%d), %lld edges\n", n,
                  static_cast<long long>(c.nstates), c.m + 1, c.d,
                  static_cast<long long>(c.rate.size()));
    } catch (const std::exception& ex) {
      std::printf("n=%ld: not buildable (%s)\n", n, ex.what());
    }
  }

  if (!rep.ok) {
    std::printf("INVALID:\n");
    for (const auto& f : rep.failures) std::printf("  - %s\n", f.c_str());
    return 1;
  }
  std::printf("VALID\n");
  return 0;
}

int cmd_dump_chain(const Overrides& ov) {
  auto cfg = latrbm::load_config(ov.config);
  apply_overrides(cfg, ov);
  for (long n : cfg.n_list) {
    latrbm::LatticeParams lp = cfg.lattice;
    lp.n = n;
    const auto primal = latrbm::build_chain(cfg.spec, lp);
    const auto dual = latrbm::build_dual_chain(primal);
    const std::string base = cfg.out_dir + "/chain_n" + std::to_string(n);
    latrbm::write_file(base + "_primal.csv", latrbm::dump_csv(primal));
    latrbm::write_file(base + "_dual.csv", latrbm::dump_csv(dual.c));
    std::printf("n=%ld: wrote %s_primal.csv and %s_dual.csv (%lld states)\n", n, base.c_str(),
                base.c_str(), static_cast<long long>(primal.nstates));
  }
  return 0;
}

int cmd_run(const Overrides& ov) {
  auto cfg = latrbm::load_config(ov.config);
  apply_overrides(cfg, ov);
  if (cfg.tests.empty()) throw latrbm::ConfigError("config declares no tests to run");

  const latrbm::RunContext ctx{cfg.seed, cfg.threads};
  const auto t_start = std::chrono::steady_clock::now();
  const std::string started = utc_now();

  std::vector<latrbm::VerificationReport> reports;
  for (const auto& sel : cfg.tests) {
    auto r = latrbm::run_named_test(cfg.spec, cfg.lattice, sel, ctx);
    const char* tag = r.skipped ? "SKIP" : (r.pass ? "PASS" : "FAIL");
    std::printf("[%s] %-22s gap=%-12.4g tol=%-12.4g (%.1fs)\n", tag, r.name.c_str(), r.gap,
                r.tolerance, r.runtime_sec);
    std::fflush(stdout);
    reports.push_back(std::move(r));
  }

  latrbm::ManifestInfo info;
  info.config_path = ov.config;
  info.config_sha1 = latrbm::sha1_hex(cfg.raw);
  info.seed = cfg.seed;
  info.threads = cfg.threads;
  info.started_utc = started;
  info.total_runtime_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  info.version = kVersion;

  latrbm::write_file(cfg.out_dir + "/report.json", latrbm::reports_to_json(reports));
  latrbm::write_file(cfg.out_dir + "/results.csv", latrbm::reports_to_csv(reports));
  latrbm::write_file(cfg.out_dir + "/report.txt", latrbm::reports_to_text(reports));
  latrbm::write_file(cfg.out_dir + "/manifest.json", latrbm::manifest_to_json(info, reports));
  std::printf("wrote %s/{report.json, results.csv, report.txt, manifest.json}\n",
              cfg.out_dir.c_str());

  for (const auto& r : reports)
    if (!r.skipped && !r.pass) return 1;
  return 0;
}

int cmd_stationary(const Overrides& ov, double T_run, double burn_frac, double bin_w, long n_flag) {
  auto cfg = latrbm::load_config(ov.config);
  apply_overrides(cfg, ov);
  latrbm::LatticeParams lp = cfg.lattice;
  if (n_flag > 0) lp.n = n_flag;

  const auto chain = latrbm::build_chain(cfg.spec, lp);
  const auto hist = latrbm::stationary_histogram(chain, burn_frac * T_run, T_run, bin_w, cfg.seed);

  std::string csv = "axis,bin_lo,bin_hi,mass\n";
  char buf[96];
  for (int ax = 0; ax < chain.d; ++ax)
    for (int b = 0; b < hist.nbins; ++b) {
      std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g\n", ax, b * bin_w, (b + 1) * bin_w,
                    hist.axis_mass[static_cast<size_t>(ax) * hist.nbins + b]);
      csv += buf;
    }
  const std::string path = cfg.out_dir + "/stationary_n" + std::to_string(lp.n) + ".csv";
  latrbm::write_file(path, csv);

  std::printf("n=%ld, T_run=%g (burn %g), %lld jumps\n", lp.n, T_run, burn_frac * T_run,
              static_cast<long long>(hist.jumps));
  for (int ax = 0; ax < chain.d; ++ax)
    std::printf("axis %d: mean=%.6g, mass on {x=0} = %.4g\n", ax,
                latrbm::marginal_mean(chain, hist.site_mass, ax),
                latrbm::face_mass(chain, hist.site_mass, ax));
  std::printf("clamped-site occupation fraction: %.4g\n", hist.clamp_fraction);
  std::printf("wrote %s\n", path.c_str());
  return 0;
}

int cmd_report(const std::string& dir) {
  const std::string path = dir + "/report.json";
  std::ifstream in(path, std::ios::binary);
  if (!in) throw latrbm::ConfigError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  bool all_ok = true;
  std::string text;
  try {
    text = latrbm::summarize_report_json(buf.str(), &all_ok);
  } catch (const std::exception& ex) {
    throw latrbm::ConfigError(path + ": " + ex.what());
  }
  std::fputs(text.c_str(), stdout);
  return all_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lattice approximation of reflected Brownian motion: chains, duals, verification"};
  app.require_subcommand(1);

  Overrides ov;
  double T_run = 1e4, burn_frac = 0.2, bin_w = 0.25;
  long n_flag = 0;
  std::string report_dir = "out";

  auto add_common = [&](CLI::App* sub, bool need_config) {
    auto* c = sub->add_option("--config", ov.config, "experiment config (JSON)");
    if (need_config) c->required();
    sub->add_option("--out", ov.out, "output directory (overrides config)");
    sub->add_option("--seed", ov.seed, "root seed (overrides config)")
        ->each([&](const std::string&) { ov.seed_set = true; });
    sub->add_option("--threads", ov.threads,
                    "worker threads; 0 = hardware (overrides LATRBM_THREADS and config)")
        ->each([&](const std::string&) { ov.threads_set = true; });
  };

  auto* v = app.add_subcommand("validate", "check the model assumption and lattice geometry");
  add_common(v, true);
  auto* d = app.add_subcommand("dump-chain", "write primal/dual edge tables as CSV");
  add_common(d, true);
  auto* r = app.add_subcommand("run", "run the configured verification tests");
  add_common(r, true);
  auto* s = app.add_subcommand("stationary", "occupation-time histogram of one long path");
  add_common(s, true);
  s->add_option("--T", T_run, "total horizon (burn-in included)");
  s->add_option("--burn-frac", burn_frac, "fraction of --T discarded as burn-in");
  s->add_option("--bin", bin_w, "histogram bin width");
  s->add_option("--n", n_flag, "lattice scale (default: first of the config n_list)");
  auto* p = app.add_subcommand("report", "re-render a previously written report.json");
  p->add_option("--out", report_dir, "artifact directory holding report.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) ? 2 : 0;
  }

  try {
    if (v->parsed()) return cmd_validate(ov);
    if (d->parsed()) return cmd_dump_chain(ov);
    if (r->parsed()) return cmd_run(ov);
    if (s->parsed()) return cmd_stationary(ov, T_run, burn_frac, bin_w, n_flag);
    if (p->parsed()) return cmd_report(report_dir);
  } catch (const latrbm::ConfigError& ex) {
    std::fprintf(stderr, "config error: %s\n", ex.what());
    return 2;
  } catch (const latrbm::ModelError& ex) {
    std::fprintf(stderr, "config error: %s\n", ex.what());
    return 2;
  } catch (const latrbm::BuildError& ex) {
    std::fprintf(stderr, "config error: %s\n", ex.what());
    return 2;
  } catch (const std::exception& ex) {
    std::fprintf(stderr, "internal error: %s\n", ex.what());
    return 3;
  }
  return 3;  // unreachable: a subcommand is required
}
