#include "latrbm/report.hpp"

#include <boost/uuid/detail/sha1.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

namespace latrbm {

namespace {

std::string json_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 8);
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out;
}

// JSON value for a double: bare number when finite, quoted token otherwise
// (strict JSON has no spelling for them, and silent nulls hide mistakes).
std::string json_number(double v) {
  if (std::isfinite(v)) return format_double(v);
  return "\"" + format_double(v) + "\"";
}

void emit_report_json(std::ostringstream& os, const VerificationReport& r,
                      const std::string& indent) {
  os << indent << "{\n";
  const std::string in2 = indent + "  ";
  os << in2 << "\"name\": \"" << json_escape(r.name) << "\",\n";
  os << in2 << "\"pass\": " << (r.pass ? "true" : "false") << ",\n";
  os << in2 << "\"skipped\": " << (r.skipped ? "true" : "false") << ",\n";
  if (!r.skip_reason.empty())
    os << in2 << "\"skip_reason\": \"" << json_escape(r.skip_reason) << "\",\n";
  os << in2 << "\"estimate\": " << json_number(r.estimate) << ",\n";
  os << in2 << "\"std_error\": " << json_number(r.std_error) << ",\n";
  os << in2 << "\"reference\": " << json_number(r.reference) << ",\n";
  os << in2 << "\"reference_kind\": \"" << json_escape(r.reference_kind) << "\",\n";
  os << in2 << "\"gap\": " << json_number(r.gap) << ",\n";
  os << in2 << "\"tolerance\": " << json_number(r.tolerance) << ",\n";
  os << in2 << "\"tolerance_rule\": \"" << json_escape(r.tolerance_rule) << "\",\n";
  os << in2 << "\"seed\": " << r.seed << ",\n";
  os << in2 << "\"values\": {";
  for (size_t i = 0; i < r.values.size(); ++i) {
    if (i) os << ", ";
    os << "\"" << json_escape(r.values[i].first) << "\": "
       << json_number(r.values[i].second);
  }
  os << "},\n";
  os << in2 << "\"detail\": \"" << json_escape(r.detail) << "\"\n";
  os << indent << "}";
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Thread count and runtimes deliberately stay out of these three: their
// content must be byte-identical for a fixed config and seed no matter how
// the work was scheduled.  The manifest is the one place for volatile facts.
std::string reports_to_json(const std::vector<VerificationReport>& reports) {
  std::ostringstream os;
  os << "{\n  \"reports\": [\n";
  for (size_t i = 0; i < reports.size(); ++i) {
    emit_report_json(os, reports[i], "    ");
    os << (i + 1 < reports.size() ? ",\n" : "\n");
  }
  os << "  ]\n}\n";
  return os.str();
}

std::string reports_to_csv(const std::vector<VerificationReport>& reports) {
  std::ostringstream os;
  os << "test,metric,value\n";
  for (const auto& r : reports) {
    os << r.name << ",pass," << (r.pass ? 1 : 0) << "\n";
    os << r.name << ",skipped," << (r.skipped ? 1 : 0) << "\n";
    os << r.name << ",estimate," << format_double(r.estimate) << "\n";
    os << r.name << ",std_error," << format_double(r.std_error) << "\n";
    os << r.name << ",reference," << format_double(r.reference) << "\n";
    os << r.name << ",gap," << format_double(r.gap) << "\n";
    os << r.name << ",tolerance," << format_double(r.tolerance) << "\n";
    for (const auto& [key, value] : r.values)
      os << r.name << "," << key << "," << format_double(value) << "\n";
  }
  return os.str();
}

std::string reports_to_text(const std::vector<VerificationReport>& reports) {
  std::ostringstream os;
  for (const auto& r : reports) {
    const char* tag = r.skipped ? "[SKIP]" : (r.pass ? "[PASS]" : "[FAIL]");
    os << tag << " " << r.name;
    if (r.skipped) {
      os << "  (" << r.skip_reason << ")\n";
      continue;
    }
    os << "  gap=" << format_double(r.gap);
    if (std::isfinite(r.tolerance)) os << "  tol=" << format_double(r.tolerance);
    if (std::isfinite(r.std_error)) os << "  se=" << format_double(r.std_error);
    os << "  (" << format_double(r.runtime_sec) << "s)\n";
  }
  return os.str();
}

std::string summarize_report_json(const std::string& json_text, bool* all_pass) {
  const nlohmann::json j = nlohmann::json::parse(json_text);
  std::ostringstream os;
  bool ok = true;
  for (const auto& t : j.at("reports")) {
    const bool skipped = t.value("skipped", false);
    const bool pass = t.value("pass", false);
    if (!skipped && !pass) ok = false;
    os << (skipped ? "[SKIP]" : pass ? "[PASS]" : "[FAIL]") << " " << t.value("name", "?");
    if (skipped) {
      os << "  (" << t.value("skip_reason", "") << ")";
    } else {
      // numeric fields arrive as strings when not finite; print what parses
      const auto num = [&](const char* key) {
        return t.contains(key) && t[key].is_number();
      };
      if (num("estimate")) os << "  estimate=" << format_double(t["estimate"].get<double>());
      if (num("reference")) os << "  reference=" << format_double(t["reference"].get<double>());
      if (num("gap")) os << "  gap=" << format_double(t["gap"].get<double>());
      if (num("tolerance")) os << "  tol=" << format_double(t["tolerance"].get<double>());
    }
    os << "\n";
  }
  if (all_pass) *all_pass = ok;
  return os.str();
}

std::string manifest_to_json(const ManifestInfo& info,
                             const std::vector<VerificationReport>& reports) {
  std::ostringstream os;
  os << "{\n";
  os << "  \"config_path\": \"" << json_escape(info.config_path) << "\",\n";
  os << "  \"config_sha1\": \"" << info.config_sha1 << "\",\n";
  os << "  \"seed\": " << info.seed << ",\n";
  os << "  \"threads\": " << info.threads << ",\n";
  os << "  \"started_utc\": \"" << json_escape(info.started_utc) << "\",\n";
  os << "  \"total_runtime_sec\": " << format_double(info.total_runtime_sec) << ",\n";
  os << "  \"version\": \"" << json_escape(info.version) << "\",\n";
  os << "  \"test_runtimes_sec\": {";
  for (size_t i = 0; i < reports.size(); ++i) {
    if (i) os << ", ";
    os << "\"" << json_escape(reports[i].name) << "\": "
       << format_double(reports[i].runtime_sec);
  }
  os << "},\n";
  os << "  \"test_threads\": {";
  for (size_t i = 0; i < reports.size(); ++i) {
    if (i) os << ", ";
    os << "\"" << json_escape(reports[i].name) << "\": " << reports[i].threads;
  }
  os << "}\n}\n";
  return os.str();
}

std::string sha1_hex(const std::string& bytes) {
  boost::uuids::detail::sha1 h;
  h.process_bytes(bytes.data(), bytes.size());
  boost::uuids::detail::sha1::digest_type digest;
  h.get_digest(digest);
  std::ostringstream os;
  for (unsigned int word : digest) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%08x", word);
    os << buf;
  }
  return os.str();
}

void write_file(const std::string& path, const std::string& content) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw std::runtime_error("short write: " + path);
}

}  // namespace latrbm
