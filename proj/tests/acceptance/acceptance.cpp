// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "../unit/random_expr.hpp"
#include "lps/algebra.hpp"
#include "lps/classify.hpp"
#include "lps/corpus.hpp"
#include "lps/errors.hpp"
#include "lps/kernels.hpp"
#include "lps/symmetry.hpp"
#include "lps/transform.hpp"

using namespace lps;

namespace {

struct Outcome {
  bool ok = true;
  std::vector<std::string> failures;
  std::string summary;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      if (failures.size() < 5) failures.push_back(what);
    }
  }
};

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

struct Setup {
  std::string name;
  ParabolicEquation eq;
  InvariantTriple inv;
  SymmetryClassification cls;
};

std::vector<Setup> corpus_setups() {
  std::vector<Setup> out;
  for (const auto& e : load_corpus(LPS_CORPUS_DIR)) {
    Setup s{e.name, ParabolicEquation::from_program(e.program), {}, {}};
    s.inv = compute_invariants(s.eq);
    s.cls = classify(s.inv);
    out.push_back(std::move(s));
  }
  return out;
}

SymmetryClassification classify_source(const std::string& src) {
  return classify(compute_invariants(ParabolicEquation::from_program(parse(src))));
}

std::string num(double v) {
  std::ostringstream ss;
  ss.precision(17);
  ss << v;
  return ss.str();
}

Outcome ac1() {
  Outcome o;
  auto corpus = load_corpus(LPS_CORPUS_DIR);
  o.require(corpus.size() >= 12, "corpus has fewer than 12 equations");
  for (const auto& e : corpus) {
    auto c = classify(compute_invariants(ParabolicEquation::from_program(e.program)));
    o.require(c.dim == e.expect_dim, e.name + ": dim " + std::to_string(c.dim));
    for (const auto& [k, v] : e.expect) {
      const double got = k == "c2" ? c.c2 : k == "c1" ? c.c1 : k == "c0" ? c.c0 : c.mu;
      o.require(std::abs(got - v) <= e.tolerance, e.name + ": " + k + " = " + num(got));
    }
  }
  for (int k : {1, 2, 3})
    o.require(classify_source("const k = " + std::to_string(k) + "\na = (1 + k^2*x^2)^2").dim == 6, "Brownian dim");
  o.require(classify_source("a = x^4\ndomain = (0, inf)").dim == 6, "x^4 dim");
  o.require(classify_source("a = x^2\ndomain = (0, inf)").dim == 6, "x^2 dim");
  auto g3 = classify_source("const s = 1.5\na = s*x^6\ndomain = (0, inf)");
  o.require(g3.dim == 4 && std::abs(g3.mu - 3.0 / 16) <= 1e-9, "x^6: mu = " + num(g3.mu));
  auto r5 = classify_source("a = 1\nb = 5/x\ndomain = (0, inf)");
  o.require(r5.dim == 4 && std::abs(r5.mu + 15.0 / 4) <= 1e-9, "k/x: mu = " + num(r5.mu));
  auto th = classify_source("a = 1\nb = tanh(x/2)");
  o.require(th.dim == 6 && std::abs(th.c2) <= 1e-8 && std::abs(th.c1) <= 1e-8 && std::abs(th.c0 + 0.25) <= 1e-8,
            "tanh constants");
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ud(0.2, 2.0);
  for (int i = 0; i < 5; ++i) {
    const double A = ud(rng), B = ud(rng), C = ud(rng);
    auto bs = classify_source("const A = " + num(A) + ", B = " + num(B) + ", C = " + num(C) +
                              "\na = A^2*x^2/2\nb = B*x\nc = -C\ndomain = (0, inf)\ndirection = backward");
    const double D = B - A * A / 2;
    o.require(bs.dim == 6 && std::abs(bs.c0 - (-D * D / (2 * A * A) - C)) <= 1e-9, "Black-Scholes c0 = " + num(bs.c0));
  }
  for (double sigma : {2.0, 6.0}) {
    // 3 sigma^2 - 8 a sigma + 4 a^2 = 0 at a = sigma/2 and a = 3 sigma/2
    for (double a0 : {sigma / 2, 3 * sigma / 2})
      o.require(classify_source("a = " + num(sigma) + "*x\nb = " + num(a0) + " + 3*x\ndomain = (0, inf)").dim == 6,
                "CIR heat case dim");
  }
  o.require(classify_source("a = 1*x\nb = 1 + 3*x\ndomain = (0, inf)").dim == 4, "generic CIR dim");
  for (double A : {2.0, -2.0}) o.require(check_fp_logdiffusion(A, 0.0).dim == 6, "log-diffusion A = " + num(A));
  auto l0 = check_fp_logdiffusion(0.0, 0.0);
  o.require(l0.dim == 4 && std::abs(l0.c2 + 1) <= 1e-9 && std::abs(l0.c0 + 2) <= 1e-9, "log-diffusion A = 0");
  o.summary = std::to_string(corpus.size()) + " corpus equations and the named families";
  return o;
}

Outcome ac2() {
  Outcome o;
  int count = 0;
  double worst = 0.0;
  for (const auto& s : corpus_setups()) {
    if (s.cls.dim != 6) continue;
    HeatTransform ht = build_heat_transform(s.cls, s.inv);
    for (const auto& [name, f] : reference_heat_solutions()) {
      PullbackReport r = pullback_residual(s.eq, ht, f);
      worst = std::max(worst, r.max_relative);
      o.require(r.points == 441 && r.max_relative <= 1e-6, s.name + "/" + name + ": " + sci(r.max_relative));
      ++count;
    }
  }
  o.summary = std::to_string(count) + " pullbacks, worst relative residual " + sci(worst);
  return o;
}

Outcome ac3() {
  Outcome o;
  int fields = 0;
  double worst = 0.0, weakest_rejection = 1e300;
  for (const auto& s : corpus_setups()) {
    if (s.cls.dim < 4) continue;
    SymmetryBasis b = emit_basis(s.cls, s.inv, s.eq.backward);
    for (const auto& v : b.fields) {
      DeterminingReport r = check_determining(s.eq, v, b.t_window, 16);
      worst = std::max(worst, r.max());
      o.require(r.points == 256 && r.max() <= 1e-8, s.name + "/" + v.label + ": " + sci(r.max()));
      ++fields;
    }
    VectorField bogus = b.fields.front();
    bogus.phi = bogus.phi + Expr::variable(s.eq.variable);
    bogus.label = "injected";
    const double rej = check_determining(s.eq, bogus, b.t_window, 16).max();
    weakest_rejection = std::min(weakest_rejection, rej);
    o.require(rej >= 1e-3, s.name + ": injected field accepted at " + sci(rej));
  }
  o.summary = std::to_string(fields) + " generators, worst residual " + sci(worst) + ", weakest rejection " +
              sci(weakest_rejection);
  return o;
}

Outcome ac4() {
  Outcome o;
  const int dims[6] = {4, 4, 4, 6, 6, 6};
  const int signs[6] = {0, -1, 1, 0, -1, 1};
  std::mt19937_64 rng(20241016);
  std::uniform_real_distribution<double> kd(0.3, 1.5), cd(-2.0, 2.0), md(0.5, 3.0);
  double worst = 0.0;
  int flagged_total = 0;
  for (int fam = 0; fam < 6; ++fam)
    for (int draw = 0; draw < 20; ++draw) {
      const double k = kd(rng), c1 = dims[fam] == 6 ? cd(rng) : 0.0, c0 = cd(rng);
      const double mu = (draw % 2 ? 1 : -1) * md(rng);
      try {
        CanonicalSetup s = canonical_setup(dims[fam], signs[fam] * k * k, c1, c0, mu);
        const std::string tag = std::string(family_name(s.basis.family)) + " draw " + std::to_string(draw);
        o.require(static_cast<int>(s.basis.family) == fam, tag + ": wrong family");
        CommutatorTable t = commutator_table(s.basis);
        CommutatorTable p = published_table(s.basis.family, c1, c0, s.basis.kappa);
        TableReport rep = verify_table(t, p);
        auto flagged = rep.flagged_lines();
        flagged_total += static_cast<int>(flagged.size());
        o.require(flagged == known_flagged_lines(s.basis.family, c1), tag + ": unexpected flagged lines");
        for (int i = 0; i < t.n; ++i)
          for (int j = i + 1; j < t.n; ++j) {
            if (std::find(flagged.begin(), flagged.end(), std::pair{i, j}) != flagged.end()) continue;
            for (int l = 0; l < t.n; ++l) worst = std::max(worst, std::abs(t.at(i, j, l) - p.at(i, j, l)));
          }
        if (dims[fam] == 6 && signs[fam] != 0) {
          // [v2, v3] carries p = c1^2 + 4 c0 k^2 (c2 < 0) or r = 4 c0 k - c1^2/k (c2 > 0).
          const double expect = signs[fam] < 0 ? -2 * (c1 * c1 + 4 * c0 * k * k) / k : 4 * c0 * k - c1 * c1 / k;
          o.require(std::abs(t.at(1, 2, 5) - expect) <= 1e-7 * (1 + std::abs(expect)), tag + ": p/r constant");
        }
      } catch (const std::exception& e) {
        o.require(false, std::string("exception: ") + e.what());
      }
    }
  o.require(worst <= 1e-7, "worst unflagged deviation " + sci(worst));
  o.summary = "6 families x 20 draws, worst unflagged deviation " + sci(worst) + ", " + std::to_string(flagged_total) +
              " flagged lines reported";
  return o;
}

Outcome ac5() {
  Outcome o;
  double worst_res = 0.0, worst_norm = 0.0, worst_delta = 0.0;
  for (const auto& n : kernel_names()) {
    KernelEntry e = kernel(n);
    KernelReport r = verify_entry(e);
    worst_res = std::max(worst_res, r.residual);
    o.require(r.residual <= 1e-9, n + ": residual " + sci(r.residual));
    o.require(r.normalization.size() >= 3, n + ": fewer than 3 normalization times");
    if (e.normalization.density)
      for (const auto& p : r.normalization) {
        worst_norm = std::max(worst_norm, p.deviation);
        o.require(p.deviation <= 1e-6, n + ": normalization deviation " + sci(p.deviation));
      }
    for (const auto& d : r.delta) {
      worst_delta = std::max(worst_delta, d.final_deviation());
      o.require(d.monotone() && d.final_deviation() <= 1e-3 * d.sup, n + ": delta limit " + sci(d.final_deviation()));
    }
  }
  // second_canonical claims no density; its finite-t integral is compared with a quadrature oracle.
  auto c = verify_normalization(kernel("second_canonical", {{"mu", -2}}), {0.25}, {1.0});
  o.require(std::abs(c[0].value - 0.461920493087231580863612579592) <= 1e-6, "second_canonical integral");
  const double spread = std::max(mehler_transform_ratio_spread(0.0), mehler_transform_ratio_spread(0.6));
  o.require(spread <= 1e-7, "Mehler ratio spread " + sci(spread));
  o.summary = std::to_string(kernel_names().size()) + " entries, residual " + sci(worst_res) + ", normalization " +
              sci(worst_norm) + ", delta " + sci(worst_delta) + ", Mehler ratio spread " + sci(spread);
  return o;
}

Outcome ac6() {
  using boost::multiprecision::cpp_int;
  Outcome o;
  auto fact = [](int n) {
    cpp_int f = 1;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
  };
  const Expr lam = Expr::constant("lambda");
  for (int n = 0; n <= 10; ++n) {
    HeatPolynomial u = heat_polynomial(n);
    const std::string tag = "u_" + std::to_string(n);
    o.require(static_cast<int>(u.terms.size()) == n / 2 + 1, tag + ": term count");
    for (const auto& term : u.terms) {
      const int j = term.t_power;
      o.require(term.x_power == n - 2 * j, tag + ": powers");
      o.require(term.coefficient * fact(n - 2 * j) * fact(j) == fact(n), tag + ": coefficient");
    }
    Expr e = u.expr();
    o.require(rational_zero_test(differentiate(e, "t") - differentiate(e, "x", 2)) == std::optional<bool>(true),
              tag + ": heat equation");
    o.require(rational_zero_test(substitute(e, "t", Expr(0)) - power(Expr::variable("x"), Expr(n))) ==
                  std::optional<bool>(true),
              tag + ": initial value");
    Expr scaled = substitute(e, {{"x", lam * Expr::variable("x")}, {"t", lam * lam * Expr::variable("t")}});
    o.require(rational_zero_test(scaled - power(lam, Expr(n)) * e) == std::optional<bool>(true),
              tag + ": parabolic homogeneity");
  }
  double worst = 0.0;
  for (int m = 0; m <= 5; ++m)
    for (int n = 0; n <= 5; ++n) {
      const double scale = std::pow(2.0, n) * std::tgamma(n + 1.0);
      const double dev = std::abs(biorthogonality(m, n, 1.0) - (m == n ? scale : 0.0)) / scale;
      worst = std::max(worst, dev);
      o.require(dev <= 1e-6, "biorthogonality m=" + std::to_string(m) + " n=" + std::to_string(n));
    }
  o.summary = "u_0..u_10 exact, biorthogonality worst " + sci(worst) + " x 2^n n!";
  return o;
}

double central_difference(const Expr& e, Bindings at) {
  const double x = at["x"], h = 1e-4 * (1 + std::abs(x));
  at["x"] = x + h;
  const double fp = eval(e, at);
  at["x"] = x - h;
  const double fm = eval(e, at);
  at["x"] = x + 2 * h;
  const double fpp = eval(e, at);
  at["x"] = x - 2 * h;
  const double fmm = eval(e, at);
  return (8 * (fp - fm) - (fpp - fmm)) / (12 * h);
}

Outcome ac7() {
  Outcome o;
  testing::TreeGen gen(2024);
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> ux(-2.0, 2.0), uk(0.5, 1.5);
  int points = 0;
  for (int tree = 0; tree < 200; ++tree) {
    Expr e = gen.tree(6);
    Expr d = differentiate(e, "x");
    for (int p = 0; p < 20; ++p) {
      Bindings at{{"x", ux(rng)}, {"k", uk(rng)}};
      try {
        const double fd = central_difference(e, at), exact = eval(d, at);
        o.require(std::abs(exact - fd) <= 1e-5 * (1 + std::abs(exact)), "derivative of " + to_string(e));
        ++points;
      } catch (const DomainError&) {
      }
    }
  }
  testing::TreeGen gen2(31337);
  for (int i = 0; i < 200; ++i) {
    Expr s = simplify(gen2.tree(6));
    o.require(simplify(s) == s, "simplify not idempotent on " + to_string(s));
  }

  auto eq = ParabolicEquation::from_program(parse("const k = 1\na = (1 + k^2*x^2)^2\nb = x\nc = sin(x)"));
  auto inv = compute_invariants(eq);
  testing::TreeGen gen3(20240917);
  const Expr t = Expr::variable("t"), X = Expr::variable("x");
  int gauges = 0;
  double worst_gauge = 0.0;
  for (int trial = 0; gauges < 20 && trial < 200; ++trial) {
    Expr g = lps::bind(gen3.tree(3), {{"k", 1.0}});
    if (!g.depends_on("x")) continue;
    auto co = transformed_coefficients(eq, t, X, exp(tanh(g)));
    ++gauges;
    for (double x : {-1.3, -0.4, 0.2, 0.9, 1.6}) {
      const double kt = semi_invariant_numeric(co, [](double s, double) { return s; }, x, 0.5);
      const double dev = std::abs(kt - inv.K_at(x)) / (1 + std::abs(inv.K_at(x)));
      worst_gauge = std::max(worst_gauge, dev);
      o.require(dev <= 1e-6, "gauge deviation " + sci(dev));
    }
  }
  o.require(gauges == 20, "fewer than 20 gauge multipliers");

  int shifts = 0;
  for (const auto& s : corpus_setups()) {
    const auto& base = s.cls;
    const double tol = 1e-6 * (1 + std::abs(base.c0) + std::abs(base.c1) + std::abs(base.c2) + std::abs(base.mu));
    for (int sh = -3; sh <= 3; ++sh) {
      ClassifyOptions opt;
      opt.i_offset = sh;
      auto c = classify(s.inv, opt);
      const std::string tag = s.name + " shift " + std::to_string(sh);
      o.require(c.dim == base.dim, tag + ": dim");
      if (c.dim == 6) {
        o.require(std::abs(c.c2 - base.c2) <= tol, tag + ": c2");
        o.require(std::abs(c.c1 - (base.c1 - 2 * base.c2 * sh)) <= tol, tag + ": c1");
        o.require(std::abs(c.c0 - (base.c0 - base.c1 * sh + base.c2 * sh * sh)) <= tol * (1 + sh * sh), tag + ": c0");
      } else if (c.dim == 4) {
        o.require(std::abs(c.mu - base.mu) <= tol, tag + ": mu");
        o.require(std::abs(c.shift - (base.shift - sh)) <= 1e-5, tag + ": shift");
      }
      ++shifts;
    }
  }
  o.summary = std::to_string(points) + " derivative points on 200 trees, 200 simplify trees, 20 gauges (worst " +
              sci(worst_gauge) + "), " + std::to_string(shifts) + " shifted classifications";
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    const char* id;
    const char* title;
    std::function<Outcome()> run;
    double budget_s;
  };
  const std::vector<Criterion> criteria{
      {"AC1", "classification corpus", ac1, 10.0},   {"AC2", "transformation correctness", ac2, 20.0},
      {"AC3", "determining equations", ac3, 0.0},    {"AC4", "commutator tables", ac4, 0.0},
      {"AC5", "kernel catalog", ac5, 60.0},          {"AC6", "heat polynomials", ac6, 0.0},
      {"AC7", "property suites", ac7, 0.0},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.ok = false;
      o.failures.push_back(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.budget_s > 0 && secs > c.budget_s) o.require(false, "runtime " + sci(secs) + " s over budget");
    std::printf("%s %s: %s (%s; %.2f s)\n", c.id, o.ok ? "PASS" : "FAIL", c.title, o.summary.c_str(), secs);
    for (const auto& f : o.failures) std::printf("    %s\n", f.c_str());
    failed += o.ok ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
