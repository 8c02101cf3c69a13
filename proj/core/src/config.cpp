#include "latrbm/config.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace latrbm {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError("config field '" + path + "': " + what);
}

const json* maybe(const json& j, const char* key) {
  const auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

const json& need(const json& j, const char* key, const std::string& path) {
  const json* v = maybe(j, key);
  if (!v) fail(path + "." + key, "missing");
  return *v;
}

double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

long as_integer(const json& j, const std::string& path) {
  if (j.is_number_integer()) return j.get<long>();
  if (j.is_number()) {
    const double v = j.get<double>();
    const long r = std::lround(v);
    if (v == static_cast<double>(r)) return r;
  }
  fail(path, "expected an integer");
}

// A matrix may be flat (length d*d) or a list of d rows.
std::vector<double> as_matrix(const json& j, int d, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array");
  std::vector<double> out;
  if (!j.empty() && j[0].is_array()) {
    if (static_cast<int>(j.size()) != d) fail(path, "expected d rows");
    for (int i = 0; i < d; ++i) {
      if (!j[i].is_array() || static_cast<int>(j[i].size()) != d)
        fail(path + "[" + std::to_string(i) + "]", "expected a row of d numbers");
      for (int k = 0; k < d; ++k)
        out.push_back(as_number(j[i][k], path + "[" + std::to_string(i) + "]"));
    }
  } else {
    if (static_cast<int>(j.size()) != d * d) fail(path, "expected d*d numbers");
    for (const auto& v : j) out.push_back(as_number(v, path));
  }
  return out;
}

void reject_unknown(const json& j, const std::set<std::string>& known,
                    const std::string& path) {
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!known.count(key)) fail(path + "." + key, "unknown key");
  }
}

}  // namespace

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();

  ExperimentConfig cfg;
  cfg.source_path = path;
  cfg.raw = buf.str();

  json root;
  try {
    root = json::parse(cfg.raw);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("config root must be an object");
  reject_unknown(root, {"spec", "lattice", "run", "tests", "output"}, "");

  // spec
  {
    const json& s = need(root, "spec", "");
    reject_unknown(s, {"d", "b", "A", "R"}, "spec");
    const int d = static_cast<int>(as_integer(need(s, "d", "spec"), "spec.d"));
    if (d < 1 || d > 8) fail("spec.d", "must be between 1 and 8");
    cfg.spec.d = d;
    const json& b = need(s, "b", "spec");
    if (!b.is_array() || static_cast<int>(b.size()) != d)
      fail("spec.b", "expected d numbers");
    for (const auto& v : b) cfg.spec.b.push_back(as_number(v, "spec.b"));
    cfg.spec.A = as_matrix(need(s, "A", "spec"), d, "spec.A");
    cfg.spec.R = as_matrix(need(s, "R", "spec"), d, "spec.R");
  }

  // lattice
  {
    const json& l = need(root, "lattice", "");
    reject_unknown(l, {"n_list", "K", "c0", "corner_fraction", "max_states"}, "lattice");
    const json& nl = need(l, "n_list", "lattice");
    if (!nl.is_array() || nl.empty()) fail("lattice.n_list", "expected a nonempty array");
    long prev = 0;
    for (const auto& v : nl) {
      const long n = as_integer(v, "lattice.n_list");
      if (n < 1) fail("lattice.n_list", "scales must be positive");
      if (n <= prev) fail("lattice.n_list", "scales must be strictly increasing");
      cfg.n_list.push_back(n);
      prev = n;
    }
    cfg.lattice.n = cfg.n_list.front();
    cfg.lattice.K = as_number(need(l, "K", "lattice"), "lattice.K");
    if (!(cfg.lattice.K > 0)) fail("lattice.K", "must be positive");
    if (const json* v = maybe(l, "c0")) {
      cfg.lattice.c0 = as_number(*v, "lattice.c0");
      if (!(cfg.lattice.c0 > 0)) fail("lattice.c0", "must be positive");
    }
    if (const json* v = maybe(l, "corner_fraction")) {
      cfg.lattice.corner_fraction = as_number(*v, "lattice.corner_fraction");
      if (!(cfg.lattice.corner_fraction > 0) || !(cfg.lattice.corner_fraction < 1))
        fail("lattice.corner_fraction", "must lie in (0, 1)");
    }
    if (const json* v = maybe(l, "max_states")) {
      cfg.lattice.max_states = as_integer(*v, "lattice.max_states");
      if (cfg.lattice.max_states < 1) fail("lattice.max_states", "must be positive");
    }
  }

  // run-wide defaults, merged into each test below unless the test sets them
  std::map<std::string, double> run_defaults;
  if (const json* run = maybe(root, "run")) {
    reject_unknown(*run, {"seed", "threads", "T", "M", "burn_frac"}, "run");
    if (const json* v = maybe(*run, "seed"))
      cfg.seed = static_cast<std::uint64_t>(as_integer(*v, "run.seed"));
    if (const json* v = maybe(*run, "threads"))
      cfg.threads = static_cast<int>(as_integer(*v, "run.threads"));
    for (const char* key : {"T", "M", "burn_frac"})
      if (const json* v = maybe(*run, key))
        run_defaults[key] = as_number(*v, std::string("run.") + key);
  }

  // tests
  if (const json* tests = maybe(root, "tests")) {
    if (!tests->is_array()) fail("tests", "expected an array");
    int idx = 0;
    for (const auto& t : *tests) {
      const std::string tpath = "tests[" + std::to_string(idx++) + "]";
      if (!t.is_object()) fail(tpath, "expected an object");
      TestSelection sel;
      for (const auto& [key, value] : t.items()) {
        if (key == "name") {
          if (!value.is_string()) fail(tpath + ".name", "expected a string");
          sel.name = value.get<std::string>();
        } else if (value.is_string()) {
          sel.strings[key] = value.get<std::string>();
        } else if (value.is_boolean()) {
          sel.scalars[key] = value.get<bool>() ? 1.0 : 0.0;
        } else if (value.is_number()) {
          sel.scalars[key] = value.get<double>();
        } else if (value.is_array()) {
          std::vector<double> list;
          for (const auto& v : value) list.push_back(as_number(v, tpath + "." + key));
          sel.lists[key] = std::move(list);
        } else {
          fail(tpath + "." + key, "expected a number, string, boolean, or array");
        }
      }
      if (sel.name.empty()) fail(tpath + ".name", "missing");
      static const std::set<std::string> known_tests = {
          "rate_identities", "duality_exact",     "fk_vs_exact",
          "stationary_law",  "continuum_duality", "time_reversal_fdd",
          "reversed_rbm",    "pair_decay"};
      if (!known_tests.count(sel.name)) fail(tpath + ".name", "unknown test name");
      for (const char* key : {"tolerance", "sup_tol", "cdf_tol", "mean_rel_tol"}) {
        const auto it = sel.scalars.find(key);
        if (it != sel.scalars.end() && !(it->second > 0))
          fail(tpath + "." + key, "must be positive");
      }
      for (const auto& [key, value] : run_defaults)
        sel.scalars.emplace(key, value);  // no overwrite of per-test settings
      cfg.tests.push_back(std::move(sel));
    }
  }

  // output
  if (const json* out = maybe(root, "output")) {
    reject_unknown(*out, {"dir"}, "output");
    if (const json* v = maybe(*out, "dir")) {
      if (!v->is_string()) fail("output.dir", "expected a string");
      cfg.out_dir = v->get<std::string>();
    }
  }
  return cfg;
}

}  // namespace latrbm
