#include <doctest.h>

#include <cmath>
#include <fstream>

#include "lps/errors.hpp"
#include "lps/report.hpp"
#include "lps/symmetry.hpp"
#include "lps/transform.hpp"

using namespace lps;

namespace {

std::string corpus(const std::string& name) { return std::string(LPS_CORPUS_DIR) + "/" + name + ".eq"; }

}  // namespace

TEST_SUITE("analyze") {
  TEST_CASE("Brownian diffusion: dim 6 and the arctan transform") {
    AnalysisReport r = analyze_file(corpus("brownian"));
    CHECK(r.dim == 6);
    CHECK(r.exit_code == 0);
    CHECK(r.verified);
    const auto& t = r.doc["transform"];
    REQUIRE_FALSE(t.is_null());
    CHECK(t["x_tilde"]["text"] == "atan(x)");
    CHECK(t["T"]["text"] == "t");
    for (const auto& p : t["pullback"]) CHECK(p["max_relative"].get<double>() <= 1e-6);

    // u = e^{t} (1 + x^2)^{1/2} u~ up to a constant factor.
    ParabolicEquation eq = ParabolicEquation::from_program(parse_file(corpus("brownian")));
    InvariantTriple inv = compute_invariants(eq);
    HeatTransform ht = build_heat_transform(classify(inv), inv);
    const double ref = ht.multiplier(0.0, 0.5) / std::exp(0.5);
    for (double x : {-2.0, 0.3, 1.7})
      for (double s : {0.2, 0.9}) CHECK(ht.multiplier(x, s) / (std::exp(s) * std::sqrt(1 + x * x)) == doctest::Approx(ref).epsilon(1e-12));
  }

  TEST_CASE("radial drift k = 5: dim 4, mu = -15/4") {
    AnalysisReport r = analyze_file(corpus("radial"));
    CHECK(r.dim == 4);
    CHECK(std::abs(r.doc["classification"]["mu"].get<double>() + 15.0 / 4) <= 1e-9);
    CHECK(r.doc["transform"].is_null());
    CHECK(r.doc["symmetry"]["generators"].size() == 4);
    CHECK(r.doc["symmetry"]["algebra"] == "sl(2,R)+R");
  }

  TEST_CASE("heat equation: identity transform and the six heat generators") {
    AnalysisReport r = analyze_file(corpus("heat"));
    CHECK(r.dim == 6);
    const auto& t = r.doc["transform"];
    CHECK(t["T"]["text"] == "t");
    CHECK(t["x_tilde"]["text"] == "x");
    CHECK(t["log_multiplier"]["text"] == "0");
    const auto& s = r.doc["symmetry"];
    CHECK(s["generators"].size() == 6);
    CHECK(s["algebra"] == "sl(2,R)|x heis(3)");
    CHECK(s["reference_table"]["flagged_lines"].empty());
    CHECK(s["reference_table"]["max_deviation"].get<double>() <= 1e-7);
  }

  TEST_CASE("determinism and seed") {
    AnalyzeOptions opt;
    std::string a = analyze_file(corpus("tanh_drift"), opt).doc.dump();
    std::string b = analyze_file(corpus("tanh_drift"), opt).doc.dump();
    CHECK(a == b);
    opt.seed = 99;
    AnalysisReport c = analyze_file(corpus("tanh_drift"), opt);
    CHECK(c.doc["config"]["seed"] == 99);
    CHECK(c.doc["config_hash"] != nlohmann::ordered_json::parse(a)["config_hash"]);
  }

  TEST_CASE("every top-level field is present") {
    for (const char* name : {"heat", "radial", "impostor_exp"}) {
      AnalysisReport r = analyze_file(corpus(name));
      for (const char* key : {"schema_version", "tool", "config", "config_hash", "input", "invariants", "classification",
                              "transform", "symmetry", "verified", "warnings"})
        CHECK(r.doc.contains(key));
      CHECK(r.doc["schema_version"] == kSchemaVersion);
      CHECK(r.doc["invariants"]["K"].contains("sexpr"));
    }
  }

  TEST_CASE("exit codes") {
    CHECK(analyze_file(corpus("impostor_exp")).exit_code == 0);
    AnalyzeOptions opt;
    opt.require_nontrivial = true;
    CHECK(analyze_file(corpus("impostor_exp"), opt).exit_code == 2);
    CHECK(analyze_file(corpus("heat"), opt).exit_code == 0);
  }

  TEST_CASE("errors carry file and line") {
    try {
      analyze_source("const k = 1\na = 1 +\n", "bad.eq");
      FAIL("no error");
    } catch (const SyntaxError& e) {
      CHECK(describe_error(e, "bad.eq").rfind("bad.eq:2:", 0) == 0);
    }
    CHECK_THROWS_AS(analyze_source("a = -(x^2)\n", "neg.eq"), NonparabolicError);
    CHECK_THROWS_AS(analyze_file("/nonexistent.eq"), Error);
  }

  TEST_CASE("backward equations report the reflection") {
    AnalysisReport r = analyze_file(corpus("logdiff_a0"));
    CHECK(r.doc["input"]["backward"] == true);
    CHECK(r.doc["symmetry"]["time_reflected"] == true);
    CHECK(r.doc["symmetry"]["reflection"].is_string());
  }
}

TEST_SUITE("kernel reports") {
  TEST_CASE("heat_1d passes") {
    KernelEntry e = kernel("heat_1d");
    auto j = kernel_report_json(e, verify_entry(e));
    CHECK(j["pass"] == true);
    CHECK(j["normalization"]["points"].size() == 3);
    CHECK(j["delta_limit"]["tests"][0]["deviations"].size() == 3);
  }

  TEST_CASE("Black-Scholes with sigma 0.4 and r 0.06 passes") {
    KernelEntry e = kernel("black_scholes", {{"sigma", 0.4}, {"r", 0.06}});
    auto j = kernel_report_json(e, verify_entry(e));
    CHECK(j["pass"] == true);
    CHECK(j["constants"]["sigma"] == 0.4);
  }

  TEST_CASE("unknown entry") { CHECK_THROWS_AS(kernel("nosuch"), UnknownKernel); }

  TEST_CASE("two-dimensional resolution is reported") {
    auto j = heat_2d_json(resolve_heat_2d());
    CHECK(j["chosen"] == "with_four");
    CHECK(j["with_four"]["passes"] == true);
    CHECK(j["without_four"]["passes"] == false);
  }
}

TEST_SUITE("selftest") {
  TEST_CASE("fresh corpus is all green") {
    SelftestOptions opt;
    opt.corpus_dir = LPS_CORPUS_DIR;
    auto rows = run_selftest(opt);
    CHECK(rows.size() >= 80);
    for (const auto& r : rows) {
      CAPTURE(r.group + "/" + r.name + ": " + r.detail);
      CHECK(r.passed);
    }
  }

  TEST_CASE("a sign flip in the Mehler entry turns that row red") {
    SelftestOptions opt;
    opt.corpus_dir = LPS_CORPUS_DIR;
    opt.sign_flips = {"mehler_hyperbolic"};
    int failed = 0;
    for (const auto& r : run_selftest(opt)) {
      if (r.passed) continue;
      ++failed;
      CHECK(r.name.rfind("mehler_hyperbolic", 0) == 0);
    }
    CHECK(failed == 1);
  }
}
