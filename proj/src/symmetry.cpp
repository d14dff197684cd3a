#include "lps/symmetry.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <sstream>

#include "exact.hpp"
#include "lps/errors.hpp"
#include "lps/transform.hpp"

namespace lps {

namespace {

using detail::numeric_expr;
using detail::snap;

const Expr kT = Expr::variable("t");

struct FieldSampler {
  Compiled tau, xi, phi;
  FieldSampler(const VectorField& v, const Bindings& constants = {}) {
    std::vector<std::string> slots{v.variable, "t"};
    tau = Compiled(v.tau, slots, constants);
    xi = Compiled(v.xi, slots, constants);
    phi = Compiled(v.phi, slots, constants);
  }
};

std::vector<double> grid(const Interval& r, int n) {
  std::vector<double> g(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = r.lo + (r.hi - r.lo) * i / (n - 1);
  return g;
}

Expr scaled(double c, const Expr& e) {
  if (c == 1.0) return e;
  return snap(c) * e;
}

}  // namespace

std::string VectorField::text() const {
  std::ostringstream ss;
  ss << "(" << to_string(tau) << ") d_t + (" << to_string(xi) << ") d_" << variable << " + (" << to_string(phi)
     << ") u d_u";
  return ss.str();
}

VectorField field_from_generators(const InvariantTriple& inv, const Expr& I, const Expr& tau, const Expr& rho,
                                  const Expr& sigma, const std::string& label, const std::string& provenance) {
  Expr td = differentiate(tau, "t");
  Expr tdd = differentiate(td, "t");
  Expr rd = differentiate(rho, "t");
  Expr J = bind(inv.J, inv.constants);
  Expr sa = bind(inv.sqrt_a, inv.constants);
  VectorField v;
  v.variable = inv.variable;
  v.label = label;
  v.provenance = provenance;
  v.tau = simplify(tau);
  v.xi = simplify(sa * (td * I / Expr(2) + rho));
  v.phi = simplify(-tdd * I * I / Expr(8) - rd * I / Expr(2) + td * I * J / Expr(4) + rho * J / Expr(2) + sigma);
  return v;
}

VectorField reflect_time(const VectorField& v) {
  VectorField r = v;
  r.tau = simplify(-substitute(v.tau, "t", -kT));
  r.xi = simplify(substitute(v.xi, "t", -kT));
  r.phi = simplify(substitute(v.phi, "t", -kT));
  return r;
}

VectorField combine(const std::vector<VectorField>& basis, const std::vector<double>& coeffs,
                    const std::string& label) {
  std::vector<Expr> tau, xi, phi;
  for (std::size_t i = 0; i < basis.size(); ++i) {
    if (std::abs(coeffs[i]) < 1e-14) continue;
    tau.push_back(scaled(coeffs[i], basis[i].tau));
    xi.push_back(scaled(coeffs[i], basis[i].xi));
    phi.push_back(scaled(coeffs[i], basis[i].phi));
  }
  VectorField v;
  v.variable = basis.empty() ? "x" : basis.front().variable;
  v.label = label;
  v.provenance = "linear combination";
  v.tau = simplify(add(tau));
  v.xi = simplify(add(xi));
  v.phi = simplify(add(phi));
  return v;
}

const char* family_name(BasisFamily f) {
  switch (f) {
    case BasisFamily::Dim4Zero: return "4-dim, c2 = 0";
    case BasisFamily::Dim4Negative: return "4-dim, c2 < 0";
    case BasisFamily::Dim4Positive: return "4-dim, c2 > 0";
    case BasisFamily::Dim6Zero: return "6-dim, c2 = 0";
    case BasisFamily::Dim6Negative: return "6-dim, c2 < 0";
    case BasisFamily::Dim6Positive: return "6-dim, c2 > 0";
  }
  return "?";
}

SymmetryBasis emit_basis(const SymmetryClassification& cls, const InvariantTriple& inv, bool time_reflected) {
  if (cls.dim != 4 && cls.dim != 6) throw NotReducible("no symmetries beyond d_t and u d_u");
  SymmetryBasis out;
  out.dim = cls.dim;
  out.c2 = cls.c2;
  out.c1 = cls.dim == 6 ? cls.c1 : 0.0;
  out.c0 = cls.c0;
  out.mu = cls.mu;
  out.shift = cls.dim == 4 ? cls.shift : 0.0;
  out.time_reflected = time_reflected;
  out.variable = inv.variable;
  out.x_window = {inv.spec.lo, inv.spec.hi};
  if (!inv.symbolic_I) out.warnings.push_back("I is evaluated by quadrature; fields are numeric samplers");

  const bool six = cls.dim == 6;
  // Exact constants are (c2, c1, c0) for dim 6 and (mu, c2, c0) for dim 4.
  std::optional<Expr> ex2 = numeric_expr(cls.exact, six ? 0 : 1);
  if (std::abs(cls.c2) <= 1e-9 * std::max(1.0, cls.scale) || (ex2 && ex2->is_zero())) {
    out.c2 = 0.0;
    ex2 = Expr(0);
  }
  Expr c2 = ex2 ? *ex2 : snap(out.c2);
  Expr c1 = six ? numeric_expr(cls.exact, 1).value_or(snap(out.c1)) : Expr(0);
  Expr c0 = numeric_expr(cls.exact, 2).value_or(snap(out.c0));
  out.kappa = std::sqrt(std::abs(out.c2));
  Expr k = out.c2 == 0.0 ? Expr(0) : simplify(sqrt(out.c2 > 0 ? c2 : -c2));
  out.t_window = default_time_interval(out.c2);

  Expr I = bind(inv.I, inv.constants);
  if (out.shift != 0.0) I = I + snap(out.shift);

  std::vector<std::array<Expr, 3>> gens;  // (tau, rho, sigma)
  gens.push_back({Expr(1), Expr(0), Expr(0)});
  if (out.c2 == 0.0) {
    out.family = six ? BasisFamily::Dim6Zero : BasisFamily::Dim4Zero;
    Expr t2 = kT * kT, t3 = t2 * kT, t4 = t3 * kT;
    if (six) {
      gens.push_back({kT, -Rational(3, 2) * c1 * t2, c0 * kT - c1 * c1 * t3 / Expr(2)});
      gens.push_back({t2, -c1 * t3, -kT / Expr(2) + c0 * t2 - c1 * c1 * t4 / Expr(4)});
      gens.push_back({Expr(0), kT, c1 * t2 / Expr(2)});
      gens.push_back({Expr(0), Expr(1), c1 * kT});
    } else {
      gens.push_back({kT, Expr(0), c0 * kT});
      gens.push_back({t2, Expr(0), -kT / Expr(2) + c0 * t2});
    }
  } else if (out.c2 < 0) {
    out.family = six ? BasisFamily::Dim6Negative : BasisFamily::Dim4Negative;
    Expr ep = exp(Expr(4) * k * kT), em = exp(-Expr(4) * k * kT);
    if (six) {
      Expr q = c1 * c1 / (Expr(4) * k * k);
      gens.push_back({ep, -(c1 / k) * ep, ep * (c0 - k - q)});
      gens.push_back({em, (c1 / k) * em, em * (c0 + k - q)});
      Expr hp = exp(Expr(2) * k * kT), hm = exp(-Expr(2) * k * kT);
      gens.push_back({Expr(0), hp, c1 / (Expr(2) * k) * hp});
      gens.push_back({Expr(0), hm, -c1 / (Expr(2) * k) * hm});
    } else {
      gens.push_back({ep, Expr(0), (c0 - k) * ep});
      gens.push_back({em, Expr(0), (c0 + k) * em});
    }
  } else {
    out.family = six ? BasisFamily::Dim6Positive : BasisFamily::Dim4Positive;
    Expr c4 = cos(Expr(4) * k * kT), s4 = sin(Expr(4) * k * kT);
    if (six) {
      Expr q = c0 + c1 * c1 / (Expr(4) * k * k);
      gens.push_back({c4, -(c1 / k) * s4, k * s4 + q * c4});
      gens.push_back({s4, (c1 / k) * c4, -k * c4 + q * s4});
      Expr c2t = cos(Expr(2) * k * kT), s2t = sin(Expr(2) * k * kT);
      gens.push_back({Expr(0), c2t, c1 / (Expr(2) * k) * s2t});
      gens.push_back({Expr(0), s2t, -c1 / (Expr(2) * k) * c2t});
    } else {
      gens.push_back({c4, Expr(0), c0 * c4 + k * s4});
      gens.push_back({s4, Expr(0), c0 * s4 - k * c4});
    }
  }
  const std::string prov = std::string(family_name(out.family)) + " basis";
  for (std::size_t i = 0; i < gens.size(); ++i) {
    out.fields.push_back(field_from_generators(inv, I, gens[i][0], gens[i][1], gens[i][2],
                                               "v" + std::to_string(i + 1), prov));
  }
  VectorField m;
  m.variable = inv.variable;
  m.tau = Expr(0);
  m.xi = Expr(0);
  m.phi = Expr(1);
  m.label = "v" + std::to_string(gens.size() + 1);
  m.provenance = "scaling u d_u";
  out.fields.push_back(m);
  return out;
}

DeterminingReport check_determining(const ParabolicEquation& eq, const VectorField& v, const Interval& t_range,
                                    int n) {
  const std::string x = v.variable;
  std::vector<std::string> slots{x, "t"};
  auto C = [&](const Expr& e) { return Compiled(e, slots, eq.constants); };
  Compiled a = C(eq.a), ax = C(differentiate(eq.a, x)), axx = C(differentiate(eq.a, x, 2));
  Compiled b = C(eq.b), bx = C(differentiate(eq.b, x));
  Compiled c = C(eq.c), cx = C(differentiate(eq.c, x));
  Compiled tau = C(v.tau), td = C(differentiate(v.tau, "t"));
  Compiled xi = C(v.xi), xit = C(differentiate(v.xi, "t")), xix = C(differentiate(v.xi, x));
  Compiled phi = C(v.phi), phit = C(differentiate(v.phi, "t")), phix = C(differentiate(v.phi, x)),
           phixx = C(differentiate(v.phi, x, 2));

  const Interval w = eq.analysis_window();
  double r1 = 0, m1 = 0, r2 = 0, m2 = 0, r3 = 0, m3 = 0, fn = 0, cn = 0;
  DeterminingReport rep;
  for (double X : grid(w, n)) {
    for (double t : grid(t_range, n)) {
      const double p[2] = {X, t};
      double A = a(p), Ax = ax(p), Axx = axx(p), B = b(p), Bx = bx(p), Cc = c(p), Cx = cx(p);
      double Td = td(p), Xi = xi(p), Xit = xit(p), Xix = xix(p), Pt = phit(p), Px = phix(p), Pxx = phixx(p);
      double e1[5] = {8 * A * A * Px, (Ax - 2 * B) * (Xi * Ax - A * Td), -2 * A * Xi * Axx, 4 * A * Xit,
                      4 * A * Xi * Bx};
      double e2[5] = {Cc * Td, -Pt, Xi * Cx, B * Px, A * Pxx};
      double e3[3] = {2 * A * Xix, -Ax * Xi, -A * Td};
      double s1 = 0, s2 = 0, s3 = 0;
      for (double q : e1) s1 += q, m1 = std::max(m1, std::abs(q));
      for (double q : e2) s2 += q, m2 = std::max(m2, std::abs(q));
      for (double q : e3) s3 += q, m3 = std::max(m3, std::abs(q));
      fn = std::max(fn, std::abs(tau(p)) + std::abs(Td) + std::abs(Xi) + std::abs(Xit) + std::abs(Xix) + std::abs(phi(p)) +
                            std::abs(Pt) + std::abs(Px) + std::abs(Pxx));
      cn = std::max(cn, std::abs(A) + std::abs(Ax) + std::abs(Axx) + std::abs(B) + std::abs(Bx) + std::abs(Cc) + std::abs(Cx));
      r1 = std::max(r1, std::abs(s1));
      r2 = std::max(r2, std::abs(s2));
      r3 = std::max(r3, std::abs(s3));
      ++rep.points;
    }
  }
  // Floors keep identically vanishing terms from turning rounding into O(1).
  auto rel = [](double r, double m, double floor) {
    double d = std::max(m, floor);
    return d > 0 ? r / d : r;
  };
  rep.eq1 = rel(r1, m1, 1e-3 * fn * cn * cn);
  rep.eq2 = rel(r2, m2, 1e-3 * fn * cn);
  rep.xi_eq = rel(r3, m3, 1e-3 * fn * cn);
  return rep;
}

VectorField lie_bracket(const VectorField& v, const VectorField& w) {
  const std::string x = v.variable;
  auto D = [](const Expr& e, const std::string& s) { return differentiate(e, s); };
  VectorField r;
  r.variable = x;
  r.label = "[" + v.label + ", " + w.label + "]";
  r.provenance = "bracket";
  r.tau = simplify(v.tau * D(w.tau, "t") - w.tau * D(v.tau, "t"));
  r.xi = simplify(v.tau * D(w.xi, "t") + v.xi * D(w.xi, x) - w.tau * D(v.xi, "t") - w.xi * D(v.xi, x));
  r.phi = simplify(v.tau * D(w.phi, "t") + v.xi * D(w.phi, x) - w.tau * D(v.phi, "t") - w.xi * D(v.phi, x));
  return r;
}

void CommutatorTable::set(int i, int j, const std::vector<std::pair<int, double>>& coeffs) {
  for (auto [k, v] : coeffs) {
    at(i, j, k) = v;
    at(j, i, k) = -v;
  }
}

double CommutatorTable::antisymmetry_defect() const {
  double worst = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) worst = std::max(worst, std::abs(at(i, j, k) + at(j, i, k)));
  return worst;
}

double CommutatorTable::jacobi_defect() const {
  // [[a,b],c] + [[b,c],a] + [[c,a],b] in components.
  double worst = 0.0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int m = 0; m < n; ++m) {
          double s = 0.0;
          for (int k = 0; k < n; ++k) s += at(a, b, k) * at(k, c, m) + at(b, c, k) * at(k, a, m) + at(c, a, k) * at(k, b, m);
          worst = std::max(worst, std::abs(s));
        }
  return worst;
}

std::pair<std::vector<double>, double> decompose(const VectorField& w, const std::vector<VectorField>& basis,
                                                 const Interval& x_window, const Interval& t_window) {
  const int nx = 9, nt = 7;
  const int n = static_cast<int>(basis.size());
  const int rows = 3 * nx * nt;
  Eigen::MatrixXd A(rows, n);
  Eigen::VectorXd y(rows);
  std::vector<FieldSampler> bs;
  for (const auto& v : basis) bs.emplace_back(v);
  FieldSampler ws(w);
  auto xs = grid(x_window, nx), ts = grid(t_window, nt);
  int r = 0;
  for (double x : xs) {
    for (double t : ts) {
      const double p[2] = {x, t};
      y(r) = ws.tau(p);
      y(r + 1) = ws.xi(p);
      y(r + 2) = ws.phi(p);
      for (int j = 0; j < n; ++j) {
        A(r, j) = bs[static_cast<std::size_t>(j)].tau(p);
        A(r + 1, j) = bs[static_cast<std::size_t>(j)].xi(p);
        A(r + 2, j) = bs[static_cast<std::size_t>(j)].phi(p);
      }
      r += 3;
    }
  }
  std::vector<double> coeffs(static_cast<std::size_t>(n), 0.0);
  double scale = 0.0;
  for (int j = 0; j < n; ++j) scale = std::max(scale, A.col(j).norm());
  // Rounding-level targets are measured against the basis scale.
  const double ny = std::max(y.norm(), 1e-6 * scale);
  if (ny == 0.0) return {coeffs, 0.0};
  Eigen::VectorXd cs(n);
  for (int j = 0; j < n; ++j) {
    cs(j) = A.col(j).norm();
    if (cs(j) > 0) A.col(j) /= cs(j);
  }
  Eigen::VectorXd z = A.colPivHouseholderQr().solve(y);
  double res = (A * z - y).norm() / ny;
  for (int j = 0; j < n; ++j) coeffs[static_cast<std::size_t>(j)] = cs(j) > 0 ? z(j) / cs(j) : 0.0;
  return {coeffs, res};
}

CommutatorTable commutator_table(const SymmetryBasis& basis) {
  const int n = static_cast<int>(basis.fields.size());
  CommutatorTable t(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      VectorField br = lie_bracket(basis.fields[static_cast<std::size_t>(i)], basis.fields[static_cast<std::size_t>(j)]);
      auto [co, res] = decompose(br, basis.fields, basis.x_window, basis.t_window);
      t.residual = std::max(t.residual, res);
      for (int k = 0; k < n; ++k) {
        double v = co[static_cast<std::size_t>(k)];
        if (std::abs(v) < 1e-11) v = 0.0;
        t.at(i, j, k) = v;
        t.at(j, i, k) = -v;
      }
    }
  }
  return t;
}

CommutatorTable published_table(BasisFamily f, double c1, double c0, double kappa) {
  const double k = kappa;
  switch (f) {
    case BasisFamily::Dim4Zero: {
      CommutatorTable t(4);
      t.set(0, 1, {{0, 1}, {3, c0}});
      t.set(0, 2, {{1, 2}, {3, -0.5}});
      t.set(1, 2, {{2, 1}});
      return t;
    }
    case BasisFamily::Dim4Negative: {
      CommutatorTable t(4);
      t.set(0, 1, {{1, 4 * k}});
      t.set(0, 2, {{2, -4 * k}});
      t.set(1, 2, {{0, -8 * k}, {3, -8 * c0 * k}});
      return t;
    }
    case BasisFamily::Dim4Positive: {
      CommutatorTable t(4);
      t.set(0, 1, {{1, -4 * k}});
      t.set(0, 2, {{2, 4 * k}});
      t.set(1, 2, {{0, 4 * k}, {3, 4 * c0 * k}});
      return t;
    }
    case BasisFamily::Dim6Zero: {
      CommutatorTable t(6);
      t.set(0, 1, {{0, 1}, {3, -3 * c1}, {5, c0}});
      t.set(0, 2, {{1, 2}, {5, -0.5}});
      t.set(0, 3, {{4, 1}});
      t.set(0, 4, {{5, 2 * c1}});
      t.set(1, 2, {{2, 1}});
      t.set(1, 3, {{3, 0.5}});
      t.set(1, 4, {{4, -0.5}});
      t.set(2, 4, {{3, -1}});
      t.set(3, 4, {{5, 0.5}});
      return t;
    }
    case BasisFamily::Dim6Negative: {
      CommutatorTable t(6);
      const double p = c1 * c1 + 4 * c0 * k * k;
      t.set(0, 1, {{1, 4 * k}});
      t.set(0, 2, {{2, -4 * k}});
      t.set(0, 3, {{3, 2 * k}});
      t.set(0, 4, {{4, -2 * k}});
      t.set(1, 2, {{0, -8 * k}, {5, -2 * p / k}});
      t.set(1, 4, {{3, -4 * k}});
      t.set(2, 3, {{4, 4 * k}});
      t.set(3, 4, {{5, 2 * k}});
      return t;
    }
    case BasisFamily::Dim6Positive: {
      CommutatorTable t(6);
      const double r = 4 * c0 * k - c1 * c1 / k;
      t.set(0, 1, {{2, -4 * k}});
      t.set(0, 2, {{1, 4 * k}});
      t.set(0, 3, {{4, -2 * k}});
      t.set(0, 4, {{3, 2 * k}});
      t.set(1, 2, {{0, 4 * k}, {5, r}});
      t.set(1, 3, {{4, 2 * k}});
      t.set(1, 4, {{3, 2 * k}});
      t.set(2, 3, {{3, -2 * k}});
      t.set(2, 4, {{4, 2 * k}});
      t.set(3, 4, {{5, -k}});
      return t;
    }
  }
  return CommutatorTable(0);
}

std::vector<std::pair<int, int>> TableReport::flagged_lines() const {
  std::vector<std::pair<int, int>> out;
  for (const auto& m : mismatches) {
    std::pair<int, int> p{std::min(m.i, m.j), std::max(m.i, m.j)};
    if (std::find(out.begin(), out.end(), p) == out.end()) out.push_back(p);
  }
  return out;
}

TableReport verify_table(const CommutatorTable& computed, const CommutatorTable& expected, double tol) {
  if (computed.n != expected.n) throw TableMismatch("table sizes differ");
  TableReport rep;
  rep.closure_residual = computed.residual;
  const int n = computed.n;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        double e = expected.at(i, j, k), c = computed.at(i, j, k);
        double d = std::abs(e - c) / std::max(1.0, std::abs(e));
        rep.max_deviation = std::max(rep.max_deviation, d);
        if (d > tol) rep.mismatches.push_back({i, j, k, e, c});
      }
  return rep;
}

void require_table(const CommutatorTable& computed, const CommutatorTable& expected, double tol) {
  TableReport rep = verify_table(computed, expected, tol);
  if (rep.ok()) return;
  const auto& m = rep.mismatches.front();
  std::ostringstream ss;
  ss << "[v" << m.i + 1 << ", v" << m.j + 1 << "] coefficient of v" << m.k + 1 << ": expected " << m.expected
     << ", computed " << m.computed;
  throw TableMismatch(ss.str());
}

std::vector<std::vector<double>> sl2_witness(const SymmetryBasis& basis) {
  if (basis.dim != 4) throw NotReducible("sl(2) witness needs a 4-dim basis");
  const double c0 = basis.c0, k = basis.kappa;
  switch (basis.family) {
    case BasisFamily::Dim4Zero:
      return {{0, 2, 0, -0.5}, {0, 0, 1, 0}, {-1, 0, 0, -c0}, {0, 0, 0, 1}};
    case BasisFamily::Dim4Negative: {
      const double s = 1 / (16 * k * k);
      return {{-8 * k * s, 0, 0, -8 * c0 * k * s}, {0, 0, 1 / (4 * k), 0}, {0, -1 / (4 * k), 0, 0}, {0, 0, 0, 1}};
    }
    case BasisFamily::Dim4Positive: {
      const double s = 1 / (4 * k);
      return {{0, 1 / (2 * k), 0, 0}, {s, 0, s, c0 * s}, {-s, 0, s, -c0 * s}, {0, 0, 0, 1}};
    }
    default: break;
  }
  throw NotReducible("sl(2) witness needs a 4-dim basis");
}

CommutatorTable transform_table(const CommutatorTable& t, const std::vector<std::vector<double>>& rows) {
  const int n = t.n;
  Eigen::MatrixXd R(n, n);
  for (int a = 0; a < n; ++a)
    for (int i = 0; i < n; ++i) R(a, i) = rows[static_cast<std::size_t>(a)][static_cast<std::size_t>(i)];
  Eigen::MatrixXd Rinv = R.inverse();
  CommutatorTable out(n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      Eigen::VectorXd s = Eigen::VectorXd::Zero(n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int k = 0; k < n; ++k) s(k) += R(a, i) * R(b, j) * t.at(i, j, k);
      Eigen::VectorXd w = Rinv.transpose() * s;
      for (int m = 0; m < n; ++m) out.at(a, b, m) = std::abs(w(m)) < 1e-12 ? 0.0 : w(m);
    }
  out.residual = t.residual;
  return out;
}

CommutatorTable canonical_sl2_plus_r() {
  CommutatorTable t(4);
  t.set(0, 1, {{1, 2}});
  t.set(0, 2, {{2, -2}});
  t.set(1, 2, {{0, 1}});
  return t;
}

std::string algebra_name(const CommutatorTable& t) {
  const int n = t.n;
  const double tol = 1e-8;
  Eigen::MatrixXd brackets(n * n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) brackets(i * n + j, k) = t.at(i, j, k);
  Eigen::FullPivLU<Eigen::MatrixXd> lu_d(brackets);
  lu_d.setThreshold(tol);
  const int derived = static_cast<int>(lu_d.rank());
  // Center: x with sum_i x_i c_ij^k = 0 for all j, k.
  Eigen::MatrixXd Z(n * n, n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i) Z(j * n + k, i) = t.at(i, j, k);
  Eigen::FullPivLU<Eigen::MatrixXd> lu_z(Z);
  lu_z.setThreshold(tol);
  const int center = n - static_cast<int>(lu_z.rank());
  std::vector<Eigen::MatrixXd> ad(static_cast<std::size_t>(n), Eigen::MatrixXd::Zero(n, n));
  for (int a = 0; a < n; ++a)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) ad[static_cast<std::size_t>(a)](k, j) = t.at(a, j, k);
  Eigen::MatrixXd killing(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) killing(a, b) = (ad[static_cast<std::size_t>(a)] * ad[static_cast<std::size_t>(b)]).trace();
  Eigen::FullPivLU<Eigen::MatrixXd> lu_k(killing);
  lu_k.setThreshold(tol);
  const int krank = static_cast<int>(lu_k.rank());
  if (n == 4 && derived == 3 && center == 1 && krank == 3) return "sl(2,R)+R";
  if (n == 6 && derived == 6 && center == 1 && krank == 3) return "sl(2,R)|x heis(3)";
  return "unknown";
}

std::vector<VectorField> boundary_subalgebra(const SymmetryBasis& basis, double x0) {
  const int n = static_cast<int>(basis.fields.size());
  Eigen::MatrixXd C(3, n);
  for (int i = 0; i < n; ++i) {
    const VectorField& v = basis.fields[static_cast<std::size_t>(i)];
    std::vector<std::string> slots{v.variable, "t"};
    const double p[2] = {x0, 0.0};
    C(0, i) = Compiled(v.tau, slots)(p);
    C(1, i) = Compiled(v.xi, slots)(p);
    C(2, i) = Compiled(v.phi, slots)(p) + Compiled(differentiate(v.xi, v.variable), slots)(p);
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(C);
  lu.setThreshold(1e-10);
  if (lu.rank() < 3) {
    std::ostringstream ss;
    ss << "boundary constraints have rank " << lu.rank() << " at x0 = " << x0;
    throw RankDeficiency(ss.str());
  }
  // Reduced row echelon form of the kernel, so each generator has one free
  // basis coefficient equal to 1.
  Eigen::MatrixXd K = lu.kernel().transpose();
  const int m = static_cast<int>(K.rows());
  int row = 0;
  for (int col = 0; col < n && row < m; ++col) {
    int piv = row;
    for (int r = row + 1; r < m; ++r)
      if (std::abs(K(r, col)) > std::abs(K(piv, col))) piv = r;
    if (std::abs(K(piv, col)) < 1e-10) continue;
    K.row(row).swap(K.row(piv));
    K.row(row) /= K(row, col);
    for (int r = 0; r < m; ++r)
      if (r != row) K.row(r) -= K(r, col) * K.row(row);
    ++row;
  }
  std::vector<VectorField> out;
  for (int r = 0; r < m; ++r) {
    std::vector<double> co(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) co[static_cast<std::size_t>(i)] = K(r, i);
    out.push_back(combine(basis.fields, co, "X" + std::to_string(r + 1)));
  }
  return out;
}

std::vector<std::pair<int, int>> known_flagged_lines(BasisFamily f, double c1) {
  if (f == BasisFamily::Dim4Positive) return {{0, 1}, {0, 2}};
  if (f == BasisFamily::Dim6Zero && c1 != 0.0) return {{0, 4}};
  return {};
}

CanonicalSetup canonical_setup(int dim, double c2, double c1, double c0, double mu) {
  CanonicalSetup s;
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

}  // namespace lps
