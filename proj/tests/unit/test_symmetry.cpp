#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <random>

#include "lps/corpus.hpp"
#include "lps/errors.hpp"
#include "lps/symmetry.hpp"

using namespace lps;

namespace {

struct Setup {
  ParabolicEquation eq;
  InvariantTriple inv;
  SymmetryClassification cls;
  SymmetryBasis basis;
};

Setup from_source(const std::string& src) {
  Setup s{ParabolicEquation::from_program(parse(src)), {}, {}, {}};
  s.inv = compute_invariants(s.eq);
  s.cls = classify(s.inv);
  s.basis = emit_basis(s.cls, s.inv, s.eq.backward);
  return s;
}

Setup from_corpus(const std::string& name) {
  auto e = load_entry(std::string(LPS_CORPUS_DIR) + "/" + name + ".eq");
  Setup s{ParabolicEquation::from_program(e.program), {}, {}, {}};
  s.inv = compute_invariants(s.eq);
  s.cls = classify(s.inv);
  s.basis = emit_basis(s.cls, s.inv, s.eq.backward);
  return s;
}

VectorField field(const std::string& tau, const std::string& xi, const std::string& phi,
                  const std::string& label = "w") {
  VectorField v;
  v.tau = parse_expression(tau);
  v.xi = parse_expression(xi);
  v.phi = parse_expression(phi);
  v.label = label;
  return v;
}

double span_residual(const VectorField& w, const std::vector<VectorField>& fields, const SymmetryBasis& b) {
  return decompose(w, fields, b.x_window, b.t_window).second;
}

// u_t = u_xx + K(x) u with K = mu/x^2 + c2 x^2 + c1 x + c0 and a classification
// built from the same constants.
Setup potential_family(int dim, double c2, double c1, double c0, double mu) {
  Setup s;
  Expr x = Expr::variable("x");
  s.eq.a = Expr(1);
  s.eq.b = Expr(0);
  s.eq.c = Expr::real(c2) * x * x + Expr::real(c1) * x + Expr::real(c0);
  if (dim == 4) s.eq.c = s.eq.c + Expr::real(mu) / (x * x);
  s.eq.domain = dim == 4 ? Interval{0.5, 3.0} : Interval{-2.0, 2.0};
  s.inv = compute_invariants(s.eq);
  s.cls.dim = dim;
  s.cls.c2 = c2;
  s.cls.c1 = c1;
  s.cls.c0 = c0;
  s.cls.mu = mu;
  s.cls.shift = s.inv.I_at(0.0) == 0.0 ? 0.0 : -s.inv.I_at(0.0);
  s.basis = emit_basis(s.cls, s.inv);
  return s;
}

std::vector<std::pair<int, int>> expected_flags(BasisFamily f, double c1) {
  if (f == BasisFamily::Dim4Positive) return {{0, 1}, {0, 2}};
  if (f == BasisFamily::Dim6Zero && c1 != 0.0) return {{0, 4}};
  return {};
}

}  // namespace

TEST_SUITE("emit_basis") {
  TEST_CASE("every emitted field satisfies the determining equations on the corpus") {
    int checked = 0;
    for (const auto& e : load_corpus(LPS_CORPUS_DIR)) {
      ParabolicEquation eq = ParabolicEquation::from_program(e.program);
      InvariantTriple inv = compute_invariants(eq);
      SymmetryClassification cls = classify(inv);
      if (cls.dim < 4) {
        CHECK_THROWS_AS(emit_basis(cls, inv), NotReducible);
        continue;
      }
      SymmetryBasis b = emit_basis(cls, inv, eq.backward);
      CAPTURE(e.name);
      REQUIRE(static_cast<int>(b.fields.size()) == cls.dim);
      CHECK(b.time_reflected == eq.backward);
      CHECK(b.fields.front().tau == Expr(1));
      CHECK(b.fields.front().xi.is_zero());
      CHECK(b.fields.back().phi == Expr(1));
      CHECK(b.fields.back().tau.is_zero());
      for (const auto& v : b.fields) {
        CAPTURE(v.label);
        DeterminingReport r = check_determining(eq, v, b.t_window);
        CHECK(r.points == 256);
        CHECK(r.max() <= 1e-8);
        CHECK(r.xi_eq <= 1e-7);
      }
      ++checked;
    }
    CHECK(checked >= 20);
  }

  TEST_CASE("linear potential basis") {
    Setup s = from_corpus("linear_potential");
    REQUIRE(s.basis.family == BasisFamily::Dim6Zero);
    const auto& f = s.basis.fields;
    CHECK(span_residual(field("0", "t", "-(x + t^2)/2"), {f[3]}, s.basis) <= 1e-12);
    CHECK(span_residual(field("t", "(x + 3*t^2)/2", "-(3*x*t + t^3)/2"), {f[1]}, s.basis) <= 1e-12);
    CHECK(span_residual(field("1", "1", "-t"), f, s.basis) <= 1e-12);
    // The variant third field has 3x^2 t/2 where 3x t^2/2 is required.
    VectorField variant = field("t^2", "x*t + t^3", "-(x^2/4 + 3*x^2*t/2 + t^4/4 + t/2)");
    VectorField fixed = field("t^2", "x*t + t^3", "-(x^2/4 + 3*x*t^2/2 + t^4/4 + t/2)");
    CHECK(check_determining(s.eq, variant).max() > 1e-3);
    CHECK(check_determining(s.eq, fixed).max() <= 1e-9);
    CHECK(span_residual(fixed, {f[2]}, s.basis) <= 1e-12);
  }

  TEST_CASE("harmonic oscillator basis") {
    Setup s = from_corpus("harmonic");
    REQUIRE(s.basis.family == BasisFamily::Dim6Positive);
    const auto& f = s.basis.fields;
    CHECK(span_residual(field("cos(4*t)", "-2*sin(4*t)*x", "2*cos(4*t)*x^2 + sin(4*t)"), {f[1]}, s.basis) <= 1e-12);
    CHECK(span_residual(field("sin(4*t)", "2*cos(4*t)*x", "2*sin(4*t)*x^2 - cos(4*t)"), {f[2]}, s.basis) <= 1e-12);
    CHECK(span_residual(field("0", "sin(2*t)", "-cos(2*t)*x"), {f[4]}, s.basis) <= 1e-12);
    CHECK(span_residual(field("0", "cos(2*t)", "sin(2*t)*x"), {f[3]}, s.basis) <= 1e-12);
  }

  TEST_CASE("log-diffusion Fokker-Planck basis in the original time") {
    Setup s = from_corpus("logdiff_a0");
    REQUIRE(s.basis.family == BasisFamily::Dim4Negative);
    CHECK(s.basis.time_reflected);
    CHECK(s.basis.kappa == doctest::Approx(1.0));
    VectorField v2 = reflect_time(field("exp(4*t)", "4*exp(4*t)*x*log(x)", "0"));
    VectorField v3 = reflect_time(field("exp(-4*t)", "-4*exp(-4*t)*x*log(x)", "4*exp(-4*t)*(1 + log(x))"));
    CHECK(span_residual(v2, s.basis.fields, s.basis) <= 1e-10);
    CHECK(span_residual(v3, s.basis.fields, s.basis) <= 1e-10);
    CHECK(check_determining(s.eq, v2).max() <= 1e-9);
  }

  TEST_CASE("Sinkala gamma = 3/2 fields in the reflected time") {
    Setup s = from_corpus("sinkala_gamma32");
    REQUIRE(s.basis.dim == 4);
    CHECK(s.basis.time_reflected);
    // beta = rho = 1 in the corpus entry.
    VectorField v2 = field("-exp(-t)", "-exp(-t)*x", "0");
    CHECK(span_residual(v2, {s.basis.fields[2]}, s.basis) <= 1e-12);
    CHECK(check_determining(s.eq, v2).max() <= 1e-9);
    // The variant partner has 1 - beta/(x rho^2) where 1 + beta/(x rho^2) is required.
    VectorField variant = field("-exp(t)", "exp(t)*x", "2*exp(t)*(1 - 1/x)");
    VectorField fixed = field("-exp(t)", "exp(t)*x", "2*exp(t)*(1 + 1/x)");
    CHECK(check_determining(s.eq, variant).max() > 1e-3);
    CHECK(span_residual(fixed, {s.basis.fields[1]}, s.basis) <= 1e-12);
  }

  TEST_CASE("quadrature I gives a warning") {
    Setup s = from_corpus("fp_log_drift");
    if (!s.inv.symbolic_I) CHECK_FALSE(s.basis.warnings.empty());
    for (const auto& v : s.basis.fields) CHECK(check_determining(s.eq, v, s.basis.t_window).max() <= 1e-8);
  }

  TEST_CASE("reflect_time is an involution") {
    VectorField v = field("exp(2*t)", "x*t", "x^2 - t");
    VectorField r = reflect_time(reflect_time(v));
    for (double t : {-0.3, 0.2, 0.7}) {
      Bindings b{{"x", 1.3}, {"t", t}};
      CHECK(eval(r.tau, b) == doctest::Approx(eval(v.tau, b)).epsilon(1e-14));
      CHECK(eval(r.xi, b) == doctest::Approx(eval(v.xi, b)).epsilon(1e-14));
      CHECK(eval(r.phi, b) == doctest::Approx(eval(v.phi, b)).epsilon(1e-14));
    }
  }
}

TEST_SUITE("check_determining") {
  TEST_CASE("heat equation: C passes and a bogus field fails") {
    Setup s = from_source("a = 1\ndomain = (-inf, inf)\n");
    VectorField C = field("t^2", "x*t", "-(x^2 + 2*t)/4", "C");
    CHECK(check_determining(s.eq, C).max() <= 1e-9);
    VectorField bogus = field("0", "t^2", "0", "bogus");
    CHECK(check_determining(s.eq, bogus).max() > 1e-3);
  }

  TEST_CASE("second canonical form: D passes") {
    Setup s = from_source("a = 1\nc = 1/x^2\ndomain = (0, inf)\n");
    CHECK(s.cls.dim == 4);
    VectorField D = field("t", "x/2", "0", "D");
    CHECK(check_determining(s.eq, D).max() <= 1e-9);
    CHECK(check_determining(s.eq, field("0", "1", "0")).max() > 1e-3);
  }

  TEST_CASE("fields with all terms vanishing are not rejected") {
    Setup s = from_corpus("cir_heat");
    for (const auto& v : s.basis.fields) CHECK(check_determining(s.eq, v, s.basis.t_window).max() <= 1e-8);
  }
}

TEST_SUITE("lie_bracket") {
  TEST_CASE("heat basis brackets") {
    Setup s = from_source("a = 1\ndomain = (-inf, inf)\n");
    const auto& f = s.basis.fields;
    REQUIRE(f.size() == 6);
    // [v1, v2] = v1 with c0 = 0.
    auto [c12, r12] = decompose(lie_bracket(f[0], f[1]), f, s.basis.x_window, s.basis.t_window);
    CHECK(r12 <= 1e-12);
    CHECK(c12[0] == doctest::Approx(1.0));
    for (int k = 1; k < 6; ++k) CHECK(c12[static_cast<std::size_t>(k)] == doctest::Approx(0.0).epsilon(1e-12));
    // [P, B] = -M/2, i.e. [v4, v5] = v6/2.
    VectorField P = field("0", "1", "0", "P");
    VectorField B = field("0", "t", "-x/2", "B");
    VectorField pb = lie_bracket(P, B);
    CHECK(pb.tau.is_zero());
    CHECK(pb.xi.is_zero());
    CHECK(eval(pb.phi, {}) == doctest::Approx(-0.5));
    auto [c45, r45] = decompose(lie_bracket(f[3], f[4]), f, s.basis.x_window, s.basis.t_window);
    CHECK(r45 <= 1e-12);
    CHECK(c45[5] == doctest::Approx(0.5));
  }

  TEST_CASE("diagonal brackets vanish") {
    Setup s = from_corpus("black_scholes");
    for (const auto& v : s.basis.fields) {
      VectorField w = lie_bracket(v, v);
      CHECK(w.tau.is_zero());
      CHECK(w.xi.is_zero());
      CHECK(w.phi.is_zero());
    }
  }
}

TEST_SUITE("verify_table") {
  TEST_CASE("six families with random constants") {
    std::mt19937_64 rng(20241016);
    std::uniform_real_distribution<double> kd(0.3, 1.5), cd(-2.0, 2.0), md(0.5, 3.0);
    const int dims[6] = {4, 4, 4, 6, 6, 6};
    const int signs[6] = {0, -1, 1, 0, -1, 1};
    for (int fam = 0; fam < 6; ++fam) {
      for (int draw = 0; draw < 20; ++draw) {
        const double k = kd(rng), c1 = dims[fam] == 6 ? cd(rng) : 0.0, c0 = cd(rng);
        const double mu = (draw % 2 ? 1 : -1) * md(rng);
        Setup s = potential_family(dims[fam], signs[fam] * k * k, c1, c0, mu);
        CAPTURE(fam);
        CAPTURE(draw);
        REQUIRE(static_cast<int>(s.basis.family) == fam);
        for (const auto& v : s.basis.fields) CHECK(check_determining(s.eq, v, s.basis.t_window).max() <= 1e-8);
        CommutatorTable t = commutator_table(s.basis);
        CHECK(t.residual <= 1e-7);
        CHECK(t.antisymmetry_defect() == 0.0);
        CHECK(t.jacobi_defect() <= 1e-8 * std::max(1.0, k * k * (1 + c1 * c1 + std::abs(c0))));
        TableReport rep = verify_table(t, published_table(s.basis.family, c1, c0, s.basis.kappa));
        CHECK(rep.flagged_lines() == expected_flags(s.basis.family, c1));
        for (const auto& m : rep.mismatches) {
          CHECK(((m.i == 0 || m.j == 0)));
        }
      }
    }
  }

  TEST_CASE("p and r constants") {
    const double k = 0.7, c1 = 1.3, c0 = -0.4;
    Setup n = potential_family(6, -k * k, c1, c0, 0.0);
    CommutatorTable tn = commutator_table(n.basis);
    const double p = c1 * c1 + 4 * c0 * k * k;
    CHECK(tn.at(1, 2, 0) == doctest::Approx(-8 * k).epsilon(1e-9));
    CHECK(tn.at(1, 2, 5) == doctest::Approx(-2 * p / k).epsilon(1e-9));
    require_table(tn, published_table(BasisFamily::Dim6Negative, c1, c0, k));
    Setup q = potential_family(6, k * k, c1, c0, 0.0);
    CommutatorTable tp = commutator_table(q.basis);
    const double r = 4 * c0 * k - c1 * c1 / k;
    CHECK(tp.at(1, 2, 0) == doctest::Approx(4 * k).epsilon(1e-9));
    CHECK(tp.at(1, 2, 5) == doctest::Approx(r).epsilon(1e-9));
    require_table(tp, published_table(BasisFamily::Dim6Positive, c1, c0, k));
  }

  TEST_CASE("4-dim c2 > 0: [v2, v3] holds, the v1 lines are flagged") {
    const double k = 0.9, c0 = 0.6;
    Setup s = potential_family(4, k * k, 0.0, c0, 1.5);
    CommutatorTable t = commutator_table(s.basis);
    CHECK(t.at(1, 2, 0) == doctest::Approx(4 * k).epsilon(1e-9));
    CHECK(t.at(1, 2, 3) == doctest::Approx(4 * c0 * k).epsilon(1e-9));
    CHECK(t.at(0, 1, 2) == doctest::Approx(-4 * k).epsilon(1e-9));
    CHECK(t.at(0, 2, 1) == doctest::Approx(4 * k).epsilon(1e-9));
    CHECK_THROWS_AS(require_table(t, published_table(BasisFamily::Dim4Positive, 0.0, c0, k)), TableMismatch);
  }

  TEST_CASE("corpus tables match up to the flagged lines") {
    for (const auto& e : load_corpus(LPS_CORPUS_DIR)) {
      ParabolicEquation eq = ParabolicEquation::from_program(e.program);
      InvariantTriple inv = compute_invariants(eq);
      SymmetryClassification cls = classify(inv);
      if (cls.dim < 4) continue;
      SymmetryBasis b = emit_basis(cls, inv, eq.backward);
      CAPTURE(e.name);
      CommutatorTable t = commutator_table(b);
      CHECK(t.residual <= 1e-7);
      CHECK(t.jacobi_defect() <= 1e-8 * std::max(1.0, b.kappa * b.kappa * (1 + b.c1 * b.c1 + std::abs(b.c0))));
      TableReport rep = verify_table(t, published_table(b.family, b.c1, b.c0, b.kappa));
      CHECK(rep.flagged_lines() == expected_flags(b.family, std::abs(b.c1) > 1e-12 ? b.c1 : 0.0));
      CHECK(algebra_name(t) == (b.dim == 6 ? "sl(2,R)|x heis(3)" : "sl(2,R)+R"));
    }
  }

  TEST_CASE("sl(2) witness for the 4-dim families") {
    CommutatorTable canon = canonical_sl2_plus_r();
    for (int sign : {0, -1, 1}) {
      for (double c0 : {-1.3, 0.0, 0.8}) {
        Setup s = potential_family(4, sign * 0.64, 0.0, c0, 2.0);
        CommutatorTable t = commutator_table(s.basis);
        CommutatorTable w = transform_table(t, sl2_witness(s.basis));
        CAPTURE(sign);
        CAPTURE(c0);
        TableReport rep = verify_table(w, canon, 1e-9);
        CHECK(rep.ok());
        CHECK(algebra_name(w) == "sl(2,R)+R");
      }
    }
  }

  TEST_CASE("transform_table with the identity is a no-op") {
    Setup s = potential_family(4, 0.0, 0.0, 0.5, 1.0);
    CommutatorTable t = commutator_table(s.basis);
    CommutatorTable u = transform_table(t, {{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}});
    CHECK(verify_table(u, t, 1e-12).ok());
  }
}

TEST_SUITE("boundary_subalgebra") {
  TEST_CASE("heat equation, source at y") {
    Setup s = from_source("a = 1\ndomain = (-inf, inf)\n");
    const double y = 0.7;
    auto sub = boundary_subalgebra(s.basis, y);
    REQUIRE(sub.size() == 3);
    VectorField target = field("t^2", "x*t", "-(x^2 - 0.49 + 2*t)/4");
    CHECK(span_residual(target, sub, s.basis) <= 1e-10);
    for (const auto& v : sub) CHECK(check_determining(s.eq, v).max() <= 1e-9);
  }

  TEST_CASE("second canonical form has a single generator") {
    Setup s = from_source("a = 1\nc = 1/x^2\ndomain = (0, inf)\n");
    const double y = 1.4;
    auto sub = boundary_subalgebra(s.basis, y);
    REQUIRE(sub.size() == 1);
    VectorField target = field("t^2", "x*t", "-(x^2 - 1.96 + 2*t)/4");
    auto [co, res] = decompose(target, sub, s.basis.x_window, s.basis.t_window);
    CHECK(res <= 1e-10);
    CHECK(std::abs(co[0]) > 0.1);
  }

  TEST_CASE("forward Black-Scholes generators") {
    const double sigma = 0.8, r = 0.3, y = 1.7;
    const double ell = r - sigma * sigma / 2;
    Setup s = from_source("const sigma = 0.8, r = 0.3\na = sigma^2*x^2/2\nb = r*x\nc = -r\ndomain = (0, inf)\n");
    REQUIRE(s.cls.dim == 6);
    auto sub = boundary_subalgebra(s.basis, y);
    REQUIRE(sub.size() == 3);
    auto num = [](double v) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "(%.17g)", v);
      return std::string(buf);
    };
    const std::string L = num(ell), S2 = num(sigma * sigma), R = num(r), ly = num(std::log(y));
    VectorField X1 = field("2*t", "(-" + L + "*t + log(x) - " + ly + ")*x", "2*" + R + "*t - 1");
    VectorField X2 = field("0", "-" + S2 + "*x*t", L + "*t + log(x) - " + ly);
    VectorField X3 = field("2*" + S2 + "*t^2", "2*" + S2 + "*x*t*log(x)",
                           "-((log(x) + " + L + "*t)^2 + 2*" + R + "*" + S2 + "*t^2 + " + S2 + "*t - " + ly + "^2)");
    // The variant first generator has 2rt - 1 where -(2rt + 1) is required.
    CHECK(check_determining(s.eq, X1).max() > 1e-3);
    X1 = field("2*t", "(-" + L + "*t + log(x) - " + ly + ")*x", "-(2*" + R + "*t + 1)");
    for (const auto* X : {&X1, &X2, &X3}) {
      CHECK(check_determining(s.eq, *X).max() <= 1e-9);
      CHECK(span_residual(*X, sub, s.basis) <= 1e-9);
    }
  }

  TEST_CASE("rank deficiency where I + s vanishes") {
    Setup s = from_source("a = 1\nc = 1/x^2\ndomain = (0, inf)\n");
    CHECK_THROWS_AS(boundary_subalgebra(s.basis, 0.0), RankDeficiency);
  }
}
