#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "latrbm/config.hpp"
#include "latrbm/report.hpp"

using namespace latrbm;

namespace {

std::filesystem::path scratch_dir() {
  const auto dir = std::filesystem::temp_directory_path() / "latrbm_cfg_test";
  std::filesystem::create_directories(dir);
  return dir;
}

std::string write_temp(const std::string& name, const std::string& content) {
  const auto p = scratch_dir() / name;
  write_file(p.string(), content);
  return p.string();
}

const char* kGoodConfig = R"({
  "spec": {"d": 2, "b": [-1, -1], "A": [[1, 0.2], [0.2, 1]], "R": [[1, 0.5], [-0.3, 1]]},
  "lattice": {"n_list": [4, 16], "K": 2, "c0": 1.5},
  "run": {"seed": 77, "threads": 2, "M": 500},
  "tests": [
    {"name": "rate_identities", "n_list": [4, 100]},
    {"name": "fk_vs_exact", "t": 0.25, "M": 900, "x0": [1, 1]},
    {"name": "stationary_law", "mode": "means"}
  ],
  "output": {"dir": "out/here"}
})";

}  // namespace

TEST_CASE("config loads into flat structs") {
  const auto path = write_temp("good.json", kGoodConfig);
  const auto cfg = load_config(path);

  CHECK(cfg.spec.d == 2);
  CHECK(cfg.spec.b[0] == -1.0);
  CHECK(cfg.spec.a(0, 1) == 0.2);
  CHECK(cfg.spec.r(1, 0) == -0.3);
  REQUIRE(cfg.n_list.size() == 2);
  CHECK(cfg.n_list[1] == 16);
  CHECK(cfg.lattice.n == 4);
  CHECK(cfg.lattice.K == 2.0);
  CHECK(cfg.lattice.c0 == 1.5);
  CHECK(cfg.lattice.corner_fraction == 0.5);  // default
  CHECK(cfg.seed == 77);
  CHECK(cfg.threads == 2);
  CHECK(cfg.out_dir == "out/here");
  CHECK(cfg.source_path == path);
  CHECK(cfg.raw == kGoodConfig);

  REQUIRE(cfg.tests.size() == 3);
  CHECK(cfg.tests[0].name == "rate_identities");
  REQUIRE(cfg.tests[0].lists.count("n_list") == 1);
  CHECK(cfg.tests[0].lists.at("n_list")[1] == 100.0);
  // run-wide M flows into tests that did not set it, without overwriting.
  CHECK(cfg.tests[0].scalars.at("M") == 500.0);
  CHECK(cfg.tests[1].scalars.at("M") == 900.0);
  CHECK(cfg.tests[1].scalars.at("t") == 0.25);
  CHECK(cfg.tests[2].strings.at("mode") == "means");
}

TEST_CASE("config rejections name the offending field") {
  auto expect_reject = [](const char* name, const std::string& body,
                          const std::string& needle) {
    const auto path = write_temp(name, body);
    try {
      load_config(path);
      FAIL_CHECK("expected ConfigError for " << name);
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
  };

  CHECK_THROWS_AS(load_config("/nonexistent/nowhere.json"), ConfigError);
  expect_reject("syntax.json", "{ not json", "parse error");
  expect_reject("rootkey.json",
                R"({"spec": {}, "lattice": {}, "zzz": 1})", "zzz");
  expect_reject("badb.json",
                R"({"spec": {"d": 2, "b": [-1], "A": [1,0,0,1], "R": [1,0,0,1]},
                    "lattice": {"n_list": [1], "K": 2}})",
                "spec.b");
  expect_reject("badrow.json",
                R"({"spec": {"d": 2, "b": [-1,-1], "A": [[1,0.2],[0.2]], "R": [1,0,0,1]},
                    "lattice": {"n_list": [1], "K": 2}})",
                "spec.A");
  expect_reject("unsorted.json",
                R"({"spec": {"d": 1, "b": [-1], "A": [1], "R": [1]},
                    "lattice": {"n_list": [16, 4], "K": 2}})",
                "increasing");
  expect_reject("badk.json",
                R"({"spec": {"d": 1, "b": [-1], "A": [1], "R": [1]},
                    "lattice": {"n_list": [4], "K": 0}})",
                "lattice.K");
  expect_reject("unknown_test.json",
                R"({"spec": {"d": 1, "b": [-1], "A": [1], "R": [1]},
                    "lattice": {"n_list": [4], "K": 2},
                    "tests": [{"name": "no_such_check"}]})",
                "unknown test name");
  expect_reject("badtol.json",
                R"({"spec": {"d": 1, "b": [-1], "A": [1], "R": [1]},
                    "lattice": {"n_list": [4], "K": 2},
                    "tests": [{"name": "duality_exact", "tolerance": 0}]})",
                "tolerance");
  expect_reject("noname.json",
                R"({"spec": {"d": 1, "b": [-1], "A": [1], "R": [1]},
                    "lattice": {"n_list": [4], "K": 2},
                    "tests": [{"n": 4}]})",
                "name");
}

TEST_CASE("float formatting round-trips and spells special values") {
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(-2.5) == "-2.5");
  CHECK(format_double(std::nan("")) == "nan");
  CHECK(format_double(HUGE_VAL) == "inf");
  CHECK(format_double(-HUGE_VAL) == "-inf");
}

TEST_CASE("sha1 standard vectors") {
  CHECK(sha1_hex("abc") == "a9993e364706816aba3e25717850c26c9cd0d89d");
  CHECK(sha1_hex("") == "da39a3ee5e6b4b0d3255bfef95601890afd80709");
}

TEST_CASE("report serialization is deterministic and free of volatile fields") {
  VerificationReport a;
  a.name = "alpha";
  a.pass = true;
  a.estimate = 1.25;
  a.std_error = 0.01;
  a.reference = 1.24;
  a.reference_kind = "closed form";
  a.gap = 0.01;
  a.tolerance = 0.05;
  a.tolerance_rule = "gap <= tol";
  a.runtime_sec = 3.25;
  a.threads = 8;
  a.seed = 42;
  a.values = {{"n_16", 0.5}, {"n_64", 0.25}};
  a.detail = "line one\nline two";

  VerificationReport b;
  b.name = "beta";
  b.skipped = true;
  b.skip_reason = "needs at least two coordinates";

  const auto js = reports_to_json({a, b});
  CHECK(js == reports_to_json({a, b}));
  CHECK(js.find("\"alpha\"") != std::string::npos);
  CHECK(js.find("\"n_16\": 0.5") != std::string::npos);
  CHECK(js.find("threads") == std::string::npos);
  CHECK(js.find("runtime") == std::string::npos);
  CHECK(js.find("3.25") == std::string::npos);
  CHECK(js.find("line one\\nline two") != std::string::npos);

  const auto csv = reports_to_csv({a, b});
  CHECK(csv.rfind("test,metric,value\n", 0) == 0);
  CHECK(csv.find("alpha,pass,1") != std::string::npos);
  CHECK(csv.find("beta,skipped,1") != std::string::npos);
  CHECK(csv.find("alpha,n_64,0.25") != std::string::npos);
  CHECK(csv.find("threads") == std::string::npos);

  const auto text = reports_to_text({a, b});
  CHECK(text.find("[PASS] alpha") != std::string::npos);
  CHECK(text.find("[SKIP] beta") != std::string::npos);
  CHECK(text.find("needs at least two coordinates") != std::string::npos);

  ManifestInfo info;
  info.config_path = "configs/x.json";
  info.config_sha1 = sha1_hex("abc");
  info.seed = 42;
  info.threads = 8;
  info.started_utc = "2026-01-01T00:00:00Z";
  info.total_runtime_sec = 12.5;
  info.version = "0.1.0";
  const auto mf = manifest_to_json(info, {a, b});
  CHECK(mf.find("\"threads\": 8") != std::string::npos);
  CHECK(mf.find("a9993e36") != std::string::npos);
  CHECK(mf.find("\"alpha\": 3.25") != std::string::npos);
  CHECK(mf.find("0.1.0") != std::string::npos);
}

TEST_CASE("report.json round-trips through the summary renderer") {
  VerificationReport a;
  a.name = "alpha";
  a.pass = true;
  a.estimate = 1.25;
  a.gap = 0.01;
  a.tolerance = 0.05;

  VerificationReport b;
  b.name = "beta";
  b.skipped = true;
  b.skip_reason = "needs at least two coordinates";

  VerificationReport c;
  c.name = "gamma";
  c.pass = false;
  c.gap = 0.9;
  c.tolerance = 0.1;

  bool all = false;
  auto text = summarize_report_json(reports_to_json({a, b, c}), &all);
  CHECK_FALSE(all);
  CHECK(text.find("[PASS] alpha") != std::string::npos);
  CHECK(text.find("gap=0.01") != std::string::npos);
  CHECK(text.find("tol=0.05") != std::string::npos);
  CHECK(text.find("[SKIP] beta") != std::string::npos);
  CHECK(text.find("needs at least two coordinates") != std::string::npos);
  CHECK(text.find("[FAIL] gamma") != std::string::npos);

  // a skip does not spoil all_pass
  text = summarize_report_json(reports_to_json({a, b}), &all);
  CHECK(all);

  CHECK_THROWS(summarize_report_json("{\"wrong\": []}", nullptr));
  CHECK_THROWS(summarize_report_json("not json", nullptr));
}

TEST_CASE("file writer creates parent directories") {
  const auto base = scratch_dir() / "nested" / "deeper";
  const auto target = base / "file.txt";
  std::filesystem::remove_all(scratch_dir() / "nested");
  write_file(target.string(), "payload");
  std::ifstream in(target);
  std::string got;
  std::getline(in, got);
  CHECK(got == "payload");
}
