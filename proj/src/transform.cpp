#include "lps/transform.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "exact.hpp"
#include "lps/errors.hpp"
#include "lps/quadrature.hpp"

namespace lps {

namespace {

constexpr int kNuGrid = 512;

using detail::numeric_expr;
using detail::snap;

std::pair<Expr, Expr> basis(MobiusBranch b, const Expr& kappa) {
  Expr t = Expr::variable("t");
  Expr arg = Expr(2) * kappa * t;
  switch (b) {
    case MobiusBranch::Rational: return {t, Expr(1)};
    case MobiusBranch::Trigonometric: return {sin(arg), cos(arg)};
    case MobiusBranch::Hyperbolic: return {exp(arg), exp(-arg)};
  }
  return {t, Expr(1)};
}

MobiusBranch branch_of(double c2) {
  if (c2 == 0.0) return MobiusBranch::Rational;
  return c2 > 0 ? MobiusBranch::Trigonometric : MobiusBranch::Hyperbolic;
}

double fd1(const Fn1& f, double x, double h) {
  return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h);
}

Interval inset(const Interval& r, double frac) {
  double d = frac * (r.hi - r.lo);
  return {r.lo + d, r.hi - d};
}

std::vector<double> interior_times(const Interval& r, int n) {
  std::vector<double> ts;
  for (int i = 0; i < n; ++i) ts.push_back(r.lo + (r.hi - r.lo) * (i + 1.0) / (n + 1.0));
  return ts;
}

}  // namespace

const char* branch_name(MobiusBranch b) {
  switch (b) {
    case MobiusBranch::Rational: return "rational";
    case MobiusBranch::Trigonometric: return "trigonometric";
    case MobiusBranch::Hyperbolic: return "hyperbolic";
  }
  return "rational";
}

MobiusMap make_mobius(double c2, const std::array<double, 4>& k, const std::optional<Expr>& exact_c2) {
  if (!std::isfinite(c2)) throw Error("c2 is not finite");
  if (k[0] * k[3] - k[1] * k[2] == 0.0) throw DegenerateTransform("Mobius constants have k1 k4 - k2 k3 = 0");
  MobiusMap m;
  m.c2 = c2;
  m.branch = branch_of(c2);
  m.kappa = std::sqrt(std::abs(c2));
  m.k = k;
  Expr c2e = exact_c2 ? *exact_c2 : snap(c2);
  Expr kappa = simplify(sqrt(m.branch == MobiusBranch::Trigonometric ? c2e : -c2e));
  auto [w1, w2] = basis(m.branch, kappa);
  Expr num = snap(k[0]) * w1 + snap(k[1]) * w2;
  Expr den = snap(k[2]) * w1 + snap(k[3]) * w2;
  m.T = simplify(num / den);
  m.Tdot = simplify(differentiate(m.T, "t"));
  m.Tddot = simplify(differentiate(m.Tdot, "t"));
  Expr T3 = differentiate(m.Tddot, "t");
  std::vector<std::string> slots{"t"};
  m.d_ = {Compiled(m.T, slots), Compiled(m.Tdot, slots), Compiled(m.Tddot, slots), Compiled(T3, slots)};
  return m;
}

double MobiusMap::value(double t) const { return d_[0]({t}); }

double MobiusMap::derivative(double t, int order) const {
  if (order < 0 || order > 3) throw Error("Mobius derivative order must be 0..3");
  return d_[order]({t});
}

double MobiusMap::schwarzian(double t) const {
  double d1 = derivative(t, 1), d2 = derivative(t, 2), d3 = derivative(t, 3);
  return d3 / d1 - 1.5 * (d2 / d1) * (d2 / d1);
}

bool admissible(const MobiusMap& m, const Interval& r) {
  if (m.k[0] * m.k[3] - m.k[1] * m.k[2] <= 0.0) return false;
  const double k = m.kappa;
  auto den = [&](double t) {
    switch (m.branch) {
      case MobiusBranch::Rational: return m.k[2] * t + m.k[3];
      case MobiusBranch::Trigonometric: return m.k[2] * std::sin(2 * k * t) + m.k[3] * std::cos(2 * k * t);
      case MobiusBranch::Hyperbolic: return m.k[2] * std::exp(2 * k * t) + m.k[3] * std::exp(-2 * k * t);
    }
    return 0.0;
  };
  const int n = 4000;
  double prev = den(r.lo + (r.hi - r.lo) * 0.5 / n);
  for (int i = 1; i < n; ++i) {
    double d = den(r.lo + (r.hi - r.lo) * (i + 0.5) / n);
    if (d == 0.0 || (d > 0) != (prev > 0)) return false;
    prev = d;
  }
  return true;
}

MobiusMap solve_schwarzian(double c2, const Interval& r, bool source, const std::optional<Expr>& exact_c2) {
  if (!(r.lo < r.hi) || !std::isfinite(r.lo) || !std::isfinite(r.hi)) throw Error("time interval must be finite");
  MobiusBranch b = branch_of(c2);
  double kappa = std::sqrt(std::abs(c2));
  std::vector<std::array<double, 4>> candidates;
  if (source) {
    if (r.lo < 0) throw SingularOnInterval("a source transform needs t > 0");
    switch (b) {
      case MobiusBranch::Rational: candidates.push_back({0, -1, 1, 0}); break;
      case MobiusBranch::Trigonometric: candidates.push_back({0, -1 / (2 * kappa), 1, 0}); break;
      case MobiusBranch::Hyperbolic:
        candidates.push_back({-1 / (2 * kappa), -1 / (2 * kappa), 1, -1});
        break;
    }
  } else {
    switch (b) {
      case MobiusBranch::Rational: candidates.push_back({1, 0, 0, 1}); break;
      case MobiusBranch::Trigonometric: {
        candidates.push_back({1, 0, 0, 1});
        // tan 2k(t - s), s stepping through the interval from its midpoint
        for (int j = 0; j <= 8; ++j) {
          double s = 0.5 * (r.lo + r.hi) + (j % 2 ? 1 : -1) * ((j + 1) / 2) * (r.hi - r.lo) / 16;
          double p = 2 * kappa * s;
          candidates.push_back({std::cos(p), -std::sin(p), std::sin(p), std::cos(p)});
        }
        break;
      }
      case MobiusBranch::Hyperbolic: candidates.push_back({1 / (4 * kappa), 0, 0, 1}); break;
    }
  }
  for (const auto& k : candidates) {
    MobiusMap m = make_mobius(c2, k, exact_c2);
    if (admissible(m, r)) return m;
  }
  throw SingularOnInterval("no pole-free Mobius map on (" + std::to_string(r.lo) + ", " + std::to_string(r.hi) +
                           ")");
}

Interval default_time_interval(double c2) {
  if (c2 == 0.0) return {0.1, 1.0};
  double kappa = std::sqrt(std::abs(c2));
  double span = c2 > 0 ? 0.6 * std::numbers::pi / (4 * kappa) : 1 / (2 * kappa);
  span = std::min(1.0, span);
  return {0.1 * span, span};
}

double schwarzian_residual(const MobiusMap& m, const Interval& r) {
  double worst = 0.0;
  for (double t : interior_times(r, 16)) worst = std::max(worst, std::abs(m.schwarzian(t) - 8 * m.c2));
  return worst;
}

HeatTransform build_heat_transform(const SymmetryClassification& cls, const InvariantTriple& inv,
                                   const HeatTransformOptions& opt) {
  if (cls.dim != 6) throw NotReducible("symmetry dimension " + std::to_string(cls.dim) + " is not 6");
  HeatTransform ht;
  ht.inv = inv;
  ht.c2 = std::abs(cls.c2) < 1e-10 ? 0.0 : cls.c2;
  ht.c1 = cls.c1;
  ht.c0 = cls.c0;
  ht.t_interval = opt.t_interval.value_or(default_time_interval(ht.c2));

  std::optional<Expr> ex2 = numeric_expr(cls.exact, 0);
  if (ht.c2 == 0.0) ex2 = Expr(0);
  Expr c2 = ex2 ? *ex2 : snap(ht.c2);
  Expr c1 = numeric_expr(cls.exact, 1).value_or(snap(ht.c1));
  Expr c0 = numeric_expr(cls.exact, 2).value_or(snap(ht.c0));

  const bool source = opt.source_y.has_value();
  if (opt.mobius) {
    ht.mobius = make_mobius(ht.c2, *opt.mobius, ex2);
    if (!admissible(ht.mobius, ht.t_interval)) throw SingularOnInterval("Mobius map is singular on the interval");
  } else {
    ht.mobius = solve_schwarzian(ht.c2, ht.t_interval, source, ex2);
  }

  const Expr t = Expr::variable("t");
  Expr kappa = ht.c2 == 0.0 ? Expr(0) : simplify(sqrt(ht.c2 > 0 ? c2 : -c2));
  Expr arg = Expr(2) * kappa * t;
  Expr wp, h1, h2, Wp, H1, H2;  // particular, basis and their primitives
  if (ht.c2 == 0.0) {
    wp = c1 * t * t;
    h1 = Expr(1);
    h2 = t;
    Wp = c1 * power(t, Expr(3)) / Expr(3);
    H1 = t;
    H2 = t * t / Expr(2);
  } else if (ht.c2 < 0) {
    wp = c1 / (Expr(2) * c2);
    h1 = cosh(arg);
    h2 = sinh(arg);
    Wp = wp * t;
    H1 = sinh(arg) / (Expr(2) * kappa);
    H2 = cosh(arg) / (Expr(2) * kappa);
  } else {
    wp = c1 / (Expr(2) * c2);
    h1 = cos(arg);
    h2 = sin(arg);
    Wp = wp * t;
    H1 = sin(arg) / (Expr(2) * kappa);
    H2 = -cos(arg) / (Expr(2) * kappa);
  }
  double a1 = opt.omega_h1, a2 = opt.omega_h2;
  if (source) {
    double wp0 = eval(wp, {{"t", 0.0}});
    a1 = -inv.I_at(*opt.source_y) - wp0;
    a2 = 0.0;
  }
  Expr A1 = snap(a1), A2 = snap(a2);
  ht.omega = simplify(wp + A1 * h1 + A2 * h2);
  ht.omega_dot = simplify(differentiate(ht.omega, "t"));
  Expr W = Wp + A1 * H1 + A2 * H2;

  const Expr& Td = ht.mobius.Tdot;
  const Expr& Tdd = ht.mobius.Tddot;
  Expr A = Tdd / (Expr(8) * Td);
  Expr B = (ht.omega_dot + Tdd * ht.omega / (Expr(2) * Td)) / Expr(2);
  // ∫(w'^2 - 4 c2 w^2) = w w' - 2 c1 ∫w, since w'' = 2 c1 - 4 c2 w.
  Expr integral = (ht.omega * ht.omega_dot - Expr(2) * c1 * W + Expr(4) * c0 * t) / Expr(4);
  Expr log_nu_base = snap(std::log(opt.nu0)) + log(Td) / Expr(4) + A * ht.omega * ht.omega;

  const std::string& x = inv.variable;
  Expr I = inv.I;
  ht.x_tilde = sqrt(Td) * (I + ht.omega);
  ht.log_multiplier = inv.G / Expr(2) + A * I * I + B * I;

  std::vector<std::string> xt{x, "t"};
  std::vector<std::string> ts{"t"};
  ht.omega_c_ = Compiled(ht.omega, ts);
  ht.omega_ddot_c_ = Compiled(differentiate(ht.omega_dot, "t"), ts);
  ht.xt_c_ = Compiled(ht.x_tilde, xt, inv.constants);
  ht.logm_c_ = Compiled(ht.log_multiplier, xt, inv.constants);
  if (!opt.quadrature_nu) {
    ht.log_nu = log_nu_base + integral;
    ht.log_nu_c_ = Compiled(*ht.log_nu, ts);
  } else {
    ht.log_nu_c_ = Compiled(log_nu_base, ts);
    Compiled w(ht.omega, ts), wd(ht.omega_dot, ts);
    double cc2 = ht.c2, cc0 = ht.c0;
    auto F = [&](double s) {
      double o = w({s}), od = wd({s});
      return 0.25 * (od * od - 4 * cc2 * o * o + 4 * cc0);
    };
    const Interval r = ht.t_interval;
    ht.nu_t_.resize(kNuGrid);
    ht.nu_v_.resize(kNuGrid);
    ht.nu_d_.resize(kNuGrid);
    const quad::Rule gl = quad::gauss_legendre(8);
    for (int i = 0; i < kNuGrid; ++i) {
      ht.nu_t_[i] = r.lo + (r.hi - r.lo) * i / (kNuGrid - 1);
      ht.nu_d_[i] = F(ht.nu_t_[i]);
      if (i == 0) {
        ht.nu_v_[i] = 0.0;
        continue;
      }
      const double lo = ht.nu_t_[i - 1], half = 0.5 * (ht.nu_t_[i] - lo);
      double s = 0.0;
      for (std::size_t j = 0; j < gl.nodes.size(); ++j) s += gl.weights[j] * F(lo + half * (gl.nodes[j] + 1.0));
      ht.nu_v_[i] = ht.nu_v_[i - 1] + half * s;
    }
  }
  return ht;
}

double HeatTransform::omega_at(double t) const { return omega_c_({t}); }
double HeatTransform::omega_ddot_at(double t) const { return omega_ddot_c_({t}); }

double HeatTransform::log_nu_at(double t) const {
  double base = log_nu_c_({t});
  if (log_nu) return base;
  if (t < nu_t_.front() || t > nu_t_.back()) throw OutOfValidatedRange("t outside the tabulated nu range");
  auto it = std::upper_bound(nu_t_.begin(), nu_t_.end(), t);
  std::size_t j = std::min<std::size_t>(std::max<std::ptrdiff_t>(it - nu_t_.begin(), 1), nu_t_.size() - 1);
  std::size_t i = j - 1;
  double h = nu_t_[j] - nu_t_[i];
  double s = (t - nu_t_[i]) / h;
  double s2 = s * s, s3 = s2 * s;
  double v = (2 * s3 - 3 * s2 + 1) * nu_v_[i] + (s3 - 2 * s2 + s) * h * nu_d_[i] + (-2 * s3 + 3 * s2) * nu_v_[j] +
             (s3 - s2) * h * nu_d_[j];
  return base + v;
}

double HeatTransform::nu(double t) const { return std::exp(log_nu_at(t)); }

double HeatTransform::xt(double x, double t) const { return xt_c_({x, t}); }

double HeatTransform::multiplier(double x, double t) const {
  return std::exp(logm_c_({x, t}) + log_nu_at(t));
}

std::optional<std::string> HeatTransform::text() const {
  if (!inv.symbolic_I || !inv.symbolic_G || !log_nu) return std::nullopt;
  Expr lm = simplify(log_multiplier + *log_nu);
  return "t~ = " + to_string(mobius.T) + ", x~ = " + to_string(simplify(x_tilde)) + ", u = exp(" + to_string(lm) +
         ") * u~(x~, t~)";
}

std::vector<HeatTransform::Sample> HeatTransform::table(int n) const {
  std::vector<Sample> out;
  for (double t : interior_times(t_interval, n)) out.push_back({t, T(t), Tdot(t), omega_at(t), nu(t)});
  return out;
}

Fn2 map_solution(const HeatTransform& ht, const Fn2& u_tilde) {
  auto h = std::make_shared<const HeatTransform>(ht);
  return [h, u_tilde](double x, double t) { return h->multiplier(x, t) * u_tilde(h->xt(x, t), h->T(t)); };
}

double omega_residual(const HeatTransform& ht) {
  double worst = 0.0;
  for (double t : interior_times(ht.t_interval, 16)) {
    worst = std::max(worst, std::abs(ht.omega_ddot_at(t) + 4 * ht.c2 * ht.omega_at(t) - 2 * ht.c1));
  }
  return worst;
}

double nu_residual(const HeatTransform& ht) {
  Compiled wd(ht.omega_dot, {"t"});
  auto reduced = [&](double t) {
    double d1 = ht.Tdot(t), d2 = ht.mobius.derivative(t, 2), w = ht.omega_at(t);
    return ht.log_nu_at(t) - 0.25 * std::log(d1) - d2 / (8 * d1) * w * w;
  };
  Interval r = inset(ht.t_interval, 0.05);
  double h = 1e-3 * (r.hi - r.lo);
  double worst = 0.0;
  for (double t : interior_times(r, 16)) {
    double w = ht.omega_at(t), od = wd({t});
    double target = 0.25 * (od * od - 4 * ht.c2 * w * w + 4 * ht.c0);
    worst = std::max(worst, std::abs(fd1(reduced, t, h) - target) / (1 + std::abs(target)));
  }
  return worst;
}

PullbackReport pullback_residual(const ParabolicEquation& eq, const Fn2& u, const Interval& xr, const Interval& tr,
                                 int nx, int nt) {
  std::vector<std::string> slots{eq.variable};
  Compiled a(eq.a, slots, eq.constants), b(eq.b, slots, eq.constants), c(eq.c, slots, eq.constants);
  const double lx = xr.hi - xr.lo;
  const double hx0 = 5e-4 * lx;
  const double ht0 = 5e-4 * (tr.hi - tr.lo);
  struct Terms {
    double r, scale;
  };
  auto terms = [&](double x, double t, double hx, double ht) {
    double u0 = u(x, t);
    double up = u(x + hx, t), um = u(x - hx, t), up2 = u(x + 2 * hx, t), um2 = u(x - 2 * hx, t);
    double ux = (-up2 + 8 * up - 8 * um + um2) / (12 * hx);
    double uxx = (-up2 + 16 * up - 30 * u0 + 16 * um - um2) / (12 * hx * hx);
    double ut = (-u(x, t + 2 * ht) + 8 * u(x, t + ht) - 8 * u(x, t - ht) + u(x, t - 2 * ht)) / (12 * ht);
    double av = a({x}), bv = b({x}), cv = c({x});
    return Terms{ut - av * uxx - bv * ux - cv * u0, std::abs(ut) + std::abs(av * uxx) + std::abs(bv * ux) +
                                                        std::abs(cv * u0) + std::abs(av * u0) / (lx * lx)};
  };
  std::vector<Terms> fine, coarse;
  double max_scale = 0.0;
  for (int i = 0; i < nx; ++i) {
    double x = xr.lo + (xr.hi - xr.lo) * i / (nx - 1);
    for (int j = 0; j < nt; ++j) {
      double t = tr.lo + (tr.hi - tr.lo) * j / (nt - 1);
      fine.push_back(terms(x, t, hx0, ht0));
      coarse.push_back(terms(x, t, 2 * hx0, 2 * ht0));
      if (!std::isfinite(fine.back().r)) throw DomainError("mapped solution is not finite on the grid");
      max_scale = std::max(max_scale, fine.back().scale);
    }
  }
  PullbackReport rep;
  rep.points = static_cast<int>(fine.size());
  for (std::size_t k = 0; k < fine.size(); ++k) {
    double denom = std::max(fine[k].scale, 1e-3 * max_scale);
    if (denom == 0.0) {
      if (fine[k].r != 0.0) rep.max_relative = std::numeric_limits<double>::infinity();
      continue;
    }
    rep.max_relative = std::max(rep.max_relative, std::abs(fine[k].r) / denom);
    rep.richardson_gap = std::max(rep.richardson_gap, std::abs(fine[k].r - coarse[k].r) / denom);
  }
  return rep;
}

PullbackReport pullback_residual(const ParabolicEquation& eq, const HeatTransform& ht, const Fn2& u_tilde,
                                 const PullbackGrid& grid) {
  Interval xr = grid.x_range.value_or(eq.analysis_window());
  Interval tr = grid.t_range.value_or(inset(ht.t_interval, 0.05));
  return pullback_residual(eq, map_solution(ht, u_tilde), xr, tr, grid.nx, grid.nt);
}

std::vector<std::pair<std::string, Fn2>> reference_heat_solutions() {
  return {
      {"1", [](double, double) { return 1.0; }},
      {"x", [](double x, double) { return x; }},
      {"x^2+2t", [](double x, double t) { return x * x + 2 * t; }},
      {"exp(x+t)", [](double x, double t) { return std::exp(x + t); }},
  };
}

}  // namespace lps
