#include <doctest.h>

#include <cmath>
#include <numbers>

#include "lps/corpus.hpp"
#include "lps/errors.hpp"
#include "lps/transform.hpp"

using namespace lps;

namespace {

struct Setup {
  ParabolicEquation eq;
  InvariantTriple inv;
  SymmetryClassification cls;
};

Setup setup(const std::string& src) {
  Setup s{ParabolicEquation::from_program(parse(src)), {}, {}};
  s.inv = compute_invariants(s.eq);
  s.cls = classify(s.inv);
  return s;
}

double worst_pullback(const Setup& s, const HeatTransform& ht) {
  double worst = 0.0;
  for (const auto& [name, f] : reference_heat_solutions()) {
    worst = std::max(worst, pullback_residual(s.eq, ht, f).max_relative);
  }
  return worst;
}

}  // namespace

TEST_SUITE("schwarzian") {
  TEST_CASE("c2 = 0 gives the identity") {
    auto m = solve_schwarzian(0.0, {0.1, 1.0});
    CHECK(m.branch == MobiusBranch::Rational);
    CHECK(m.T == Expr::variable("t"));
    CHECK(schwarzian_residual(m, {0.1, 1.0}) == 0.0);
  }

  TEST_CASE("c2 = 1 gives tan 2t") {
    Interval r{-std::numbers::pi / 8, std::numbers::pi / 8};
    auto m = solve_schwarzian(1.0, r);
    CHECK(m.branch == MobiusBranch::Trigonometric);
    CHECK(m.value(0.1) == doctest::Approx(std::tan(0.2)).epsilon(1e-14));
    CHECK(m.schwarzian(0.05) == doctest::Approx(8.0).epsilon(1e-10));
    CHECK(schwarzian_residual(m, r) <= 1e-8);
  }

  TEST_CASE("c2 = -1 in source mode gives -coth(2t)/2") {
    Interval r{0.05, 2.0};
    auto m = solve_schwarzian(-1.0, r, true);
    CHECK(m.branch == MobiusBranch::Hyperbolic);
    for (double t : {0.1, 0.5, 1.5}) {
      CHECK(m.value(t) == doctest::Approx(-0.5 / std::tanh(2 * t)).epsilon(1e-12));
      CHECK(m.derivative(t, 1) == doctest::Approx(1 / std::pow(std::sinh(2 * t), 2)).epsilon(1e-12));
    }
    CHECK(schwarzian_residual(m, r) <= 1e-8);
  }

  TEST_CASE("poles are avoided or reported") {
    Interval r{0.5, 1.2};
    auto m = solve_schwarzian(1.0, r);
    CHECK(admissible(m, r));
    CHECK(schwarzian_residual(m, r) <= 1e-8);
    CHECK_THROWS_AS(solve_schwarzian(1.0, {0.0, 2.0}), SingularOnInterval);
    CHECK_THROWS_AS(solve_schwarzian(0.0, {-1.0, 1.0}, true), SingularOnInterval);
    CHECK_FALSE(admissible(make_mobius(0.0, {1, 0, 1, -0.5}), {0.1, 1.0}));
    CHECK_FALSE(admissible(make_mobius(0.0, {0, 1, 1, 0}), {0.1, 1.0}));
  }

  TEST_CASE("sampled branches satisfy the Schwarzian equation") {
    for (double c2 : {-2.25, -0.3, 0.0, 0.4, 3.0}) {
      CAPTURE(c2);
      Interval r = default_time_interval(c2);
      CHECK(schwarzian_residual(solve_schwarzian(c2, r), r) <= 1e-8 * (1 + 8 * std::abs(c2)));
    }
  }
}

TEST_SUITE("heat transform") {
  TEST_CASE("heat equation gets the identity class") {
    auto s = setup("a = 1");
    auto ht = build_heat_transform(s.cls, s.inv);
    for (double t : {0.2, 0.7}) {
      CHECK(ht.T(t) == t);
      CHECK(ht.omega_at(t) == 0.0);
      CHECK(ht.nu(t) == doctest::Approx(1.0));
      CHECK(ht.xt(0.4, t) == doctest::Approx(0.4));
    }
    auto u = map_solution(ht, [](double x, double t) { return x * x + 2 * t; });
    CHECK(u(1.5, 0.3) == doctest::Approx(1.5 * 1.5 + 0.6).epsilon(1e-14));
  }

  TEST_CASE("linear drift: T = e^{2bt}/(2b), x~ = e^{bt} x, u~ = u") {
    auto s = setup("const beta = 2\na = 1\nb = beta*x");
    auto ht = build_heat_transform(s.cls, s.inv);
    for (double t : {0.1, 0.3}) {
      CHECK(ht.T(t) == doctest::Approx(std::exp(4 * t) / 4).epsilon(1e-13));
      for (double x : {-1.0, 0.5, 2.0}) {
        CHECK(ht.xt(x, t) == doctest::Approx(std::exp(2 * t) * x).epsilon(1e-13));
        CHECK(ht.multiplier(x, t) == doctest::Approx(1.0).epsilon(1e-13));
      }
    }
  }

  TEST_CASE("a = x^2: x~ = ln x, u = sqrt(x) e^{-t/4} u~") {
    auto s = setup("a = x^2\ndomain = (0, inf)");
    auto ht = build_heat_transform(s.cls, s.inv);
    for (double x : {0.5, 1.0, 3.0}) {
      CHECK(ht.xt(x, 0.4) == doctest::Approx(std::log(x)).epsilon(1e-14));
      CHECK(ht.multiplier(x, 0.4) == doctest::Approx(std::sqrt(x) * std::exp(-0.1)).epsilon(1e-13));
    }
  }

  TEST_CASE("Fokker-Planck (Ax+B)^(4/3): x~ = (3/A)(Ax+B)^(1/3), u = (Ax+B)^(-1/3) u~") {
    auto s = setup("const A = 3, B = 1\na = (A*x + B)^(4/3)\nb = 4/3*A*(A*x + B)^(1/3)\ndomain = (0, inf)");
    auto ht = build_heat_transform(s.cls, s.inv);
    for (double x : {0.5, 1.0, 3.0}) {
      CHECK(ht.xt(x, 0.4) == doctest::Approx(std::cbrt(3 * x + 1)).epsilon(1e-13));
      CHECK(ht.multiplier(x, 0.4) == doctest::Approx(1 / std::cbrt(3 * x + 1)).epsilon(1e-13));
    }
  }

  TEST_CASE("closed-form multipliers") {
    struct Case {
      std::string src;
      std::function<double(double, double)> m;
      std::function<double(double, double)> xt;
    };
    std::vector<Case> cases{
        {"const k = 2\na = (1 + k^2*x^2)^2", [](double x, double t) { return std::exp(4 * t) * std::sqrt(1 + 4 * x * x); },
         [](double x, double) { return std::atan(2 * x) / 2; }},
        {"a = 1\nb = tanh(x/2)", [](double x, double t) { return std::exp(-t / 4) / std::cosh(x / 2); },
         [](double x, double) { return x; }},
        {"a = (1 - x^2)^2\nb = -8*x*(1 - x^2)\nc = 4*(3*x^2 - 1)\ndomain = (-1, 1)",
         [](double x, double t) { return std::pow(1 - x * x, -1.5) * std::exp(-t); },
         [](double x, double) { return std::atanh(x); }},
        {"const A = 3, B = 1\na = (A*x + B)^2\nb = 2*A*(A*x + B)\ndomain = (0, inf)",
         [](double x, double t) { return std::exp(-9 * t / 4) / std::sqrt(3 * x + 1); },
         [](double x, double) { return std::log(3 * x + 1) / 3; }},
        {"const A = 1, B = 1, C = 1\na = A^2*x^2/2\nb = B*x\nc = -C\ndomain = (0, inf)\ndirection = backward",
         [](double x, double t) { return std::exp(-9 * t / 8) * std::pow(x, -0.5); },
         [](double x, double) { return std::sqrt(2.0) * std::log(x); }},
    };
    for (const auto& c : cases) {
      CAPTURE(c.src);
      auto s = setup(c.src);
      auto ht = build_heat_transform(s.cls, s.inv);
      auto w = s.eq.analysis_window();
      double ratio = ht.multiplier(w.lo, 0.2) / c.m(w.lo, 0.2);
      double shift = ht.xt(w.lo, 0.2) - c.xt(w.lo, 0.2);
      for (double f : {0.1, 0.5, 0.9}) {
        double x = w.lo + f * (w.hi - w.lo);
        for (double t : {0.2, 0.6}) {
          CHECK(ht.multiplier(x, t) / c.m(x, t) == doctest::Approx(ratio).epsilon(1e-12));
          CHECK(ht.xt(x, t) - c.xt(x, t) == doctest::Approx(shift).epsilon(1e-12).scale(1));
        }
      }
    }
  }

  TEST_CASE("four-dimensional classes are not reducible") {
    auto s = setup("const k = 5\na = 1\nb = k/x\ndomain = (0, inf)");
    CHECK_THROWS_AS(build_heat_transform(s.cls, s.inv), NotReducible);
  }

  TEST_CASE("Appell transformation from a source point") {
    auto s = setup("a = 1");
    HeatTransformOptions opt;
    opt.source_y = 0.3;
    opt.t_interval = Interval{0.0, 2.0};
    auto ht = build_heat_transform(s.cls, s.inv, opt);
    auto u = map_solution(ht, [](double, double) { return 1.0; });
    auto appell = [](double x, double t) { return std::exp(-(x - 0.3) * (x - 0.3) / (4 * t)) / std::sqrt(t); };
    double ratio = u(0.0, 0.5) / appell(0.0, 0.5);
    for (double x : {-1.0, 0.3, 2.0}) {
      for (double t : {0.1, 0.5, 1.7}) CHECK(u(x, t) / appell(x, t) == doctest::Approx(ratio).epsilon(1e-12));
    }
  }

  TEST_CASE("linear potential source transform matches the closed-form rule") {
    auto s = setup("a = 1\nc = x");
    HeatTransformOptions opt;
    opt.source_y = -0.4;
    opt.t_interval = Interval{0.0, 2.0};
    auto ht = build_heat_transform(s.cls, s.inv, opt);
    const double y = -0.4;
    for (double t : {0.2, 1.1}) CHECK(ht.omega_at(t) == doctest::Approx(t * t - y).epsilon(1e-14));
    auto u = map_solution(ht, [](double, double) { return 1.0; });
    // u_t = u_xx + x u: the kernel with t^3/12 + t(x+y)/2
    auto k = [y](double x, double t) {
      return std::exp(-(x - y) * (x - y) / (4 * t) + t * t * t / 12 + t * (x + y) / 2) / std::sqrt(t);
    };
    double ratio = u(0.0, 0.5) / k(0.0, 0.5);
    for (double x : {-1.0, 0.3, 2.0}) {
      for (double t : {0.1, 0.5, 1.7}) CHECK(u(x, t) / k(x, t) == doctest::Approx(ratio).epsilon(1e-12));
    }
  }

  TEST_CASE("omega and nu equations on the corpus") {
    for (const auto& e : load_corpus(LPS_CORPUS_DIR)) {
      if (e.expect_dim != 6) continue;
      CAPTURE(e.name);
      Setup s{ParabolicEquation::from_program(e.program), {}, {}};
      s.inv = compute_invariants(s.eq);
      s.cls = classify(s.inv);
      auto ht = build_heat_transform(s.cls, s.inv);
      CHECK(schwarzian_residual(ht.mobius, ht.t_interval) <= 1e-8 * (1 + 8 * std::abs(ht.c2)));
      CHECK(omega_residual(ht) <= 1e-8);
      CHECK(nu_residual(ht) <= 1e-8);
      HeatTransformOptions q;
      q.quadrature_nu = true;
      auto hq = build_heat_transform(s.cls, s.inv, q);
      CHECK(nu_residual(hq) <= 1e-8);
      double offset = ht.log_nu_at(ht.t_interval.lo) - hq.log_nu_at(ht.t_interval.lo);
      for (const auto& row : ht.table(9)) {
        CHECK(ht.log_nu_at(row.t) - hq.log_nu_at(row.t) == doctest::Approx(offset).epsilon(1e-8).scale(1));
      }
    }
  }

  TEST_CASE("pullback of reference heat solutions on the corpus") {
    for (const auto& e : load_corpus(LPS_CORPUS_DIR)) {
      if (e.expect_dim != 6) continue;
      CAPTURE(e.name);
      Setup s{ParabolicEquation::from_program(e.program), {}, {}};
      s.inv = compute_invariants(s.eq);
      s.cls = classify(s.inv);
      auto ht = build_heat_transform(s.cls, s.inv);
      for (const auto& [name, f] : reference_heat_solutions()) {
        CAPTURE(name);
        auto rep = pullback_residual(s.eq, ht, f);
        CHECK(rep.points == 441);
        CHECK(rep.max_relative <= 1e-6);
      }
    }
  }

  TEST_CASE("a wrong multiplier fails the pullback test") {
    auto s = setup("a = x^2\ndomain = (0, inf)");
    auto ht = build_heat_transform(s.cls, s.inv);
    auto good = map_solution(ht, [](double x, double t) { return x * x + 2 * t; });
    auto bad = [good](double x, double t) { return good(x, t) * std::exp(0.01 * t); };
    auto w = s.eq.analysis_window();
    CHECK(pullback_residual(s.eq, good, w, {0.15, 0.95}).max_relative <= 1e-6);
    CHECK(pullback_residual(s.eq, bad, w, {0.15, 0.95}).max_relative >= 1e-3);
  }

  TEST_CASE("six-constant freedom") {
    struct Case {
      std::string src;
      std::array<double, 4> k;
      double h1, h2;
    };
    for (const auto& c : {Case{"a = 1\nc = -x", {2, 1, 1, 3}, 0.5, -0.25},
                          Case{"a = 1\nc = x^2 - 2*x", {1, 0.3, -0.2, 1}, 0.2, 0.1},
                          Case{"a = 1\nc = -(x^2) + x + 1", {1, 2, 1, 4}, -0.3, 0.4},
                          Case{"a = x^2\ndomain = (0, inf)", {1, 0, 1, 2}, 1.0, 0.5}}) {
      CAPTURE(c.src);
      auto s = setup(c.src);
      auto def = build_heat_transform(s.cls, s.inv);
      HeatTransformOptions opt;
      opt.mobius = c.k;
      opt.omega_h1 = c.h1;
      opt.omega_h2 = c.h2;
      opt.nu0 = 2.5;
      auto alt = build_heat_transform(s.cls, s.inv, opt);
      CHECK(alt.T(0.5) != doctest::Approx(def.T(0.5)));
      CHECK(worst_pullback(s, def) <= 1e-6);
      CHECK(worst_pullback(s, alt) <= 1e-6);
      CHECK(schwarzian_residual(alt.mobius, alt.t_interval) <= 1e-8 * (1 + 8 * std::abs(alt.c2)));
      CHECK(omega_residual(alt) <= 1e-8);
    }
  }

  TEST_CASE("report fields") {
    auto s = setup("const k = 1\na = (1 + k^2*x^2)^2");
    auto ht = build_heat_transform(s.cls, s.inv);
    auto text = ht.text();
    REQUIRE(text.has_value());
    CHECK(text->find("atan(x)") != std::string::npos);
    auto rows = ht.table(11);
    CHECK(rows.size() == 11);
    for (const auto& r : rows) CHECK(r.nu == doctest::Approx(std::exp(r.t)).epsilon(1e-12));
    auto q = setup("a = 2 + sin(x)\nc = 0");
    CHECK_FALSE(q.cls.dim == 6);
  }
}
