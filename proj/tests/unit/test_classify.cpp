#include <doctest.h>

#include <cmath>

#include "lps/classify.hpp"
#include "lps/corpus.hpp"
#include "lps/errors.hpp"

using namespace lps;

namespace {

double constant_of(const SymmetryClassification& c, const std::string& key) {
  if (key == "c2") return c.c2;
  if (key == "c1") return c.c1;
  if (key == "c0") return c.c0;
  return c.mu;
}

SymmetryClassification classify_src(const std::string& src, ClassifyOptions opt = {}) {
  return classify(compute_invariants(ParabolicEquation::from_program(parse(src))), opt);
}

}  // namespace

TEST_SUITE("classify") {
  TEST_CASE("golden corpus") {
    auto corpus = load_corpus(LPS_CORPUS_DIR);
    CHECK(corpus.size() >= 12);
    for (const auto& e : corpus) {
      CAPTURE(e.name);
      auto c = classify(compute_invariants(ParabolicEquation::from_program(e.program)));
      CHECK(c.dim == e.expect_dim);
      for (const auto& [key, value] : e.expect) {
        CAPTURE(key);
        CHECK(std::abs(constant_of(c, key) - value) <= e.tolerance);
      }
      if (c.dim != 2) CHECK(c.residual <= 1e-7 * c.scale);
      if (c.dim == 4) CHECK(std::abs(c.mu) > 1e-8);
    }
  }

  TEST_CASE("power diffusion mu = gamma(gamma - 2)/(4(1 - gamma)^2)") {
    for (double g : {3.0, 0.5, -1.0, 2.5, 4.0}) {
      CAPTURE(g);
      auto c = classify_src("const s = 2, g = " + std::to_string(g) + "\na = s*x^(2*g)\ndomain = (0, inf)");
      CHECK(c.dim == 4);
      CHECK(c.mu == doctest::Approx(g * (g - 2) / (4 * (1 - g) * (1 - g))).epsilon(1e-9));
    }
    CHECK(classify_src("a = 3*x^4\ndomain = (0, inf)").dim == 6);
  }

  TEST_CASE("radial drift k/x") {
    for (int k : {1, 3, 5, -2}) {
      auto c = classify_src("const k = " + std::to_string(k) + "\na = 1\nb = k/x\ndomain = (0, inf)");
      CHECK(c.dim == 4);
      CHECK(c.mu == doctest::Approx(-k * (k - 2) / 4.0).epsilon(1e-9));
    }
    CHECK(classify_src("a = 1\nb = 2/x\ndomain = (0, inf)").dim == 6);
  }

  TEST_CASE("log-diffusion Fokker-Planck family") {
    auto a2 = check_fp_logdiffusion(2, 0);
    CHECK(a2.dim == 6);
    auto a0 = check_fp_logdiffusion(0, 0);
    CHECK(a0.dim == 4);
    CHECK(a0.c2 == doctest::Approx(-1.0).epsilon(1e-9));
    CHECK(a0.c0 == doctest::Approx(-2.0).epsilon(1e-9));
    CHECK(check_fp_logdiffusion(-2, 7).dim == 6);
    CHECK(check_fp_logdiffusion(1, 0).dim == 4);
    CHECK(check_fp_logdiffusion(3, 4).dim == 4);
  }

  TEST_CASE("CIR dimension follows 3 sigma^2 - 8 a sigma + 4 a^2 = 0") {
    // sigma = 2 a or sigma = 2a/3
    for (auto [s, a0, dim] : {std::tuple{2.0, 1.0, 6}, std::tuple{2.0, 3.0, 6}, std::tuple{1.0, 1.0, 4},
                              std::tuple{3.0, 1.0, 4}}) {
      CAPTURE(s);
      CAPTURE(a0);
      auto c = classify_src("const s = " + std::to_string(s) + ", a0 = " + std::to_string(a0) +
                            "\na = s*x\nb = a0 + 2*x\ndomain = (0, inf)");
      CHECK(c.dim == dim);
    }
  }

  TEST_CASE("Black-Scholes constant c0 = -D^2/(2A^2) - C") {
    for (auto [A, B, C] : {std::tuple{1.0, 1.0, 1.0}, std::tuple{0.4, 0.06, 0.06}, std::tuple{2.0, -1.0, 0.5}}) {
      auto c = classify_src("const A = " + std::to_string(A) + ", B = " + std::to_string(B) + ", C = " +
                            std::to_string(C) +
                            "\na = A^2*x^2/2\nb = B*x\nc = -C\ndomain = (0, inf)\ndirection = backward");
      double D = B - A * A / 2;
      CHECK(c.dim == 6);
      CHECK(c.c0 == doctest::Approx(-D * D / (2 * A * A) - C).epsilon(1e-9));
    }
  }

  TEST_CASE("shift invariance under I -> I + s") {
    for (const auto& e : load_corpus(LPS_CORPUS_DIR)) {
      CAPTURE(e.name);
      auto inv = compute_invariants(ParabolicEquation::from_program(e.program));
      auto base = classify(inv);
      for (int s = -3; s <= 3; ++s) {
        CAPTURE(s);
        ClassifyOptions opt;
        opt.i_offset = s;
        for (bool symbolic : {true, false}) {
          opt.symbolic = symbolic;
          auto c = classify(inv, opt);
          CHECK(c.dim == base.dim);
          double tol = 1e-6 * (1 + std::abs(base.c0) + std::abs(base.c1) + std::abs(base.c2) + std::abs(base.mu));
          if (c.dim == 6) {
            CHECK(std::abs(c.c2 - base.c2) <= tol);
            CHECK(std::abs(c.c1 - (base.c1 - 2 * base.c2 * s)) <= tol);
            CHECK(std::abs(c.c0 - (base.c0 - base.c1 * s + base.c2 * s * s)) <= tol * (1 + s * s));
          } else if (c.dim == 4) {
            CHECK(std::abs(c.mu - base.mu) <= tol);
            CHECK(std::abs(c.c2 - base.c2) <= tol);
            CHECK(std::abs(c.c0 - base.c0) <= tol);
            CHECK(std::abs(c.shift - (base.shift - s)) <= 1e-5);
          }
        }
      }
    }
  }

  TEST_CASE("symbolic and numeric paths agree") {
    int both = 0;
    for (const auto& e : load_corpus(LPS_CORPUS_DIR)) {
      CAPTURE(e.name);
      auto inv = compute_invariants(ParabolicEquation::from_program(e.program));
      auto sym = classify(inv);
      ClassifyOptions opt;
      opt.symbolic = false;
      auto num = classify(inv, opt);
      CHECK(num.fit_mode == FitMode::Numeric);
      CHECK(sym.dim == num.dim);
      if (sym.fit_mode == FitMode::Symbolic) ++both;
      CHECK(num.c2 == doctest::Approx(sym.c2).epsilon(1e-6).scale(1));
      CHECK(num.c1 == doctest::Approx(sym.c1).epsilon(1e-6).scale(1));
      CHECK(num.c0 == doctest::Approx(sym.c0).epsilon(1e-6).scale(1));
      CHECK(num.mu == doctest::Approx(sym.mu).epsilon(1e-6).scale(1));
    }
    CHECK(both >= 20);
  }

  TEST_CASE("impostor potentials are rejected") {
    for (std::string c : {"sin(x)", "exp(x)", "x^3", "1/(1 + x^2)", "x^4"}) {
      CAPTURE(c);
      CHECK(classify_src("a = 1\nc = " + c).dim == 2);
    }
  }

  TEST_CASE("degenerate window") {
    CHECK_THROWS_AS(classify_src("a = 1\nwindow = (1, 1.000000000001)"), IllConditionedFit);
  }

  TEST_CASE("inversion of I") {
    SampleSpec spec;
    spec.lo = 0.2;
    spec.hi = 3.0;
    for (std::string s : {"2*sqrt(x)", "log(3*x + 1)/3", "atan(2*x)/2", "-1/x", "x^(1/3)"}) {
      CAPTURE(s);
      Expr I = parse_expression(s);
      auto inv = invert_primitive(I, "x", "y", spec);
      REQUIRE(inv.has_value());
      for (double x : {0.3, 1.0, 2.5}) {
        double y = eval(I, {{"x", x}});
        CHECK(eval(*inv, {{"y", y}}) == doctest::Approx(x).epsilon(1e-12));
      }
    }
  }
}
