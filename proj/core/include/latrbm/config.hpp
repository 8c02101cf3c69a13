#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "latrbm/lattice.hpp"
#include "latrbm/verify.hpp"

// Experiment configuration: JSON on disk, flattened here into plain structs
// so the public interface carries no parser types.  Schema (all units
// continuum unless stated):
//   spec:    { d, b: [d], A: [d*d row-major], R: [d*d row-major] }
//   lattice: { n_list: [ascending], K, c0?, corner_fraction?, max_states? }
//   run:     { seed?, threads?, T?, M?, burn_frac? }       (defaults for tests)
//   tests:   [ { name, <scalar/list/string params>... } ]
//   output:  { dir? }

namespace latrbm {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  RbmSpec spec;
  LatticeParams lattice;      // n = first entry of n_list
  std::vector<long> n_list;
  std::uint64_t seed = 1;
  int threads = 0;
  std::vector<TestSelection> tests;
  std::string out_dir = "out";
  std::string source_path;    // where this config was loaded from
  std::string raw;            // verbatim file contents (hashed into the manifest)
};

// Parses and validates; throws ConfigError naming the offending field
// (and the parser's line/byte position for syntax errors).
ExperimentConfig load_config(const std::string& path);

}  // namespace latrbm
