#pragma once

#include <string>
#include <vector>

#include "latrbm/verify.hpp"

// Result emission.  Everything except the manifest is byte-deterministic
// for a fixed config and seed: fixed key order, 17-significant-digit
// shortest-round-trip floats, no timestamps.  The manifest carries the
// volatile context (wall-clock, runtimes, config hash) and is excluded
// from reproducibility comparisons.

namespace latrbm {

// %.17g with NaN/inf spelled out; used for every float the artifact emits.
std::string format_double(double v);

std::string reports_to_json(const std::vector<VerificationReport>& reports);
std::string reports_to_csv(const std::vector<VerificationReport>& reports);
std::string reports_to_text(const std::vector<VerificationReport>& reports);

struct ManifestInfo {
  std::string config_path;
  std::string config_sha1;
  std::uint64_t seed = 0;
  int threads = 0;
  std::string started_utc;   // wall clock; manifest only
  double total_runtime_sec = 0;
  std::string version;
};
std::string manifest_to_json(const ManifestInfo& info,
                             const std::vector<VerificationReport>& reports);

// Re-render the one-line-per-test summary from a report.json produced by
// reports_to_json.  Sets *all_pass to "no non-skipped test failed" when the
// pointer is given.  Throws nlohmann::json exceptions on malformed input.
std::string summarize_report_json(const std::string& json_text, bool* all_pass = nullptr);

// SHA-1 of the raw config bytes, hex-encoded; ties a run to its exact input.
std::string sha1_hex(const std::string& bytes);

void write_file(const std::string& path, const std::string& content);

}  // namespace latrbm
