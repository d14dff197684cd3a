#include "lps/classify.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "lps/errors.hpp"

namespace lps {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::optional<Expr> peel(const Expr& I, const std::string& var, const Expr& y) {
  if (I.kind() == Kind::Variable && I.name() == var) return y;
  if (!I.depends_on(var)) return std::nullopt;
  switch (I.kind()) {
    case Kind::Add: {
      std::vector<Expr> rest;
      const Expr* inner = nullptr;
      for (const auto& t : I.args()) {
        if (t.depends_on(var)) {
          if (inner) return std::nullopt;
          inner = &t;
        } else {
          rest.push_back(t);
        }
      }
      return peel(*inner, var, y - add(rest));
    }
    case Kind::Mul: {
      std::vector<Expr> rest;
      const Expr* inner = nullptr;
      for (const auto& t : I.args()) {
        if (t.depends_on(var)) {
          if (inner) return std::nullopt;
          inner = &t;
        } else {
          rest.push_back(t);
        }
      }
      return peel(*inner, var, y / mul(rest));
    }
    case Kind::Pow:
      if (I.arg(1).depends_on(var)) return std::nullopt;
      return peel(I.arg(0), var, power(y, Expr(1) / I.arg(1)));
    case Kind::Log: return peel(I.arg(0), var, exp(y));
    case Kind::Exp: return peel(I.arg(0), var, log(y));
    case Kind::Atan: return peel(I.arg(0), var, tan(y));
    case Kind::Atanh: return peel(I.arg(0), var, tanh(y));
    case Kind::Tan: return peel(I.arg(0), var, atan(y));
    case Kind::Tanh: return peel(I.arg(0), var, atanh(y));
    case Kind::Sinh: return peel(I.arg(0), var, log(y + sqrt(power(y, Expr(2)) + Expr(1))));
    default: return std::nullopt;
  }
}

struct Samples {
  std::vector<double> I;
  std::vector<double> K;
  double scale = 1.0;
};

Samples sample(const InvariantTriple& inv, const ClassifyOptions& opt) {
  Samples s;
  std::vector<std::string> slots{inv.variable};
  Compiled I(inv.I, slots, inv.constants);
  Compiled K(inv.K, slots, inv.constants);
  const int n = opt.points;
  double maxk = 0.0;
  for (int i = 0; i < n; ++i) {
    double u = std::cos(std::numbers::pi * (i + 0.5) / n);
    double x = 0.5 * (inv.spec.lo + inv.spec.hi) + 0.5 * (inv.spec.hi - inv.spec.lo) * u;
    double iv = I({x}) + opt.i_offset;
    double kv = K({x});
    if (!std::isfinite(iv) || !std::isfinite(kv)) throw DomainError("I or K is not finite on the window");
    s.I.push_back(iv);
    s.K.push_back(kv);
    maxk = std::max(maxk, std::abs(kv));
  }
  s.scale = 1.0 + maxk;
  auto [lo, hi] = std::minmax_element(s.I.begin(), s.I.end());
  double spread = *hi - *lo;
  if (!(spread > 1e-8 * (1.0 + std::max(std::abs(*lo), std::abs(*hi)))))
    throw IllConditionedFit("I is nearly constant on the window");
  return s;
}

struct Fit {
  Eigen::VectorXd coef;
  double residual = kInf;
  double rms = kInf;
};

// Least squares K ~ sum_j coef_j basis_j(I + s); rows in sample order.
template <class Basis>
Fit lsq(const Samples& s, int ncols, double shift, Basis basis) {
  const int n = static_cast<int>(s.I.size());
  Eigen::MatrixXd A(n, ncols);
  Eigen::VectorXd rhs(n);
  for (int i = 0; i < n; ++i) {
    double z = s.I[i] + shift;
    for (int j = 0; j < ncols; ++j) A(i, j) = basis(j, z);
    rhs(i) = s.K[i];
  }
  if (!A.allFinite()) return {};
  Eigen::VectorXd colscale = A.colwise().norm();
  for (int j = 0; j < ncols; ++j)
    if (colscale(j) == 0.0) colscale(j) = 1.0;
  Eigen::MatrixXd As = A * colscale.cwiseInverse().asDiagonal();
  Eigen::VectorXd y = As.colPivHouseholderQr().solve(rhs);
  Fit f;
  f.coef = y.cwiseQuotient(colscale);
  Eigen::VectorXd r = A * f.coef - rhs;
  f.residual = r.cwiseAbs().maxCoeff();
  f.rms = r.norm() / std::sqrt(static_cast<double>(n));
  return f;
}

double quad_basis(int j, double z) { return j == 0 ? 1.0 : j == 1 ? z : z * z; }
double l4_basis(int j, double z) { return j == 0 ? 1.0 / (z * z) : j == 1 ? z * z : 1.0; }
double l4c1_basis(int j, double z) { return j < 3 ? l4_basis(j, z) : z; }

bool pole_free(const Samples& s, double shift) {
  auto [lo, hi] = std::minmax_element(s.I.begin(), s.I.end());
  double lo_z = *lo + shift, hi_z = *hi + shift;
  double margin = 1e-6 * (hi_z - lo_z);
  return lo_z > margin || hi_z < -margin;
}

// Shift s minimizing the L4 fit residual: coarse scan then golden section.
template <class Basis>
std::pair<double, Fit> shift_search(const Samples& s, const ClassifyOptions& opt, int ncols, Basis basis) {
  auto objective = [&](double shift) {
    if (!pole_free(s, shift)) return Fit{};
    return lsq(s, ncols, shift, basis);
  };
  double best_s = 0.0;
  Fit best;
  const int steps = std::max(opt.coarse_steps, 2);
  const double h = (opt.shift_hi - opt.shift_lo) / (steps - 1);
  for (int i = 0; i < steps; ++i) {
    double sh = opt.shift_lo + i * h;
    Fit f = objective(sh);
    if (f.rms < best.rms) {
      best = f;
      best_s = sh;
    }
  }
  // The exact shift usually places the pole just outside the window; probe there too.
  auto [lo, hi] = std::minmax_element(s.I.begin(), s.I.end());
  for (double edge : {-*lo, -*hi}) {
    for (double eps : {1e-3, 1e-2, 1e-1}) {
      for (double sh : {edge + eps * (*hi - *lo), edge - eps * (*hi - *lo)}) {
        Fit f = objective(sh);
        if (f.rms < best.rms) {
          best = f;
          best_s = sh;
        }
      }
    }
  }
  if (!std::isfinite(best.rms)) return {0.0, best};
  double a = best_s - h, b = best_s + h;
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = objective(c).rms, fd = objective(d).rms;
  for (int it = 0; it < 200 && (b - a) > 1e-12 * (1.0 + std::abs(best_s)); ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = objective(c).rms;
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = objective(d).rms;
    }
  }
  double sm = 0.5 * (a + b);
  Fit fm = objective(sm);
  if (fm.rms < best.rms) return {sm, fm};
  return {best_s, best};
}

std::optional<SymmetryClassification> symbolic_path(const InvariantTriple& inv, const Samples& s,
                                                    const ClassifyOptions& opt) {
  if (!inv.symbolic_I || inv.K.has_opaque()) return std::nullopt;
  const std::string yname = "_y";
  auto [lo, hi] = std::minmax_element(s.I.begin(), s.I.end());
  SampleSpec yspec = inv.spec;
  yspec.variable = yname;
  yspec.lo = *lo - opt.i_offset;
  yspec.hi = *hi - opt.i_offset;
  auto xinv = invert_primitive(inv.I, inv.variable, yname, inv.spec);
  if (!xinv) return std::nullopt;
  Expr y = Expr::variable(yname);
  Expr KI = assume_window(expand(substitute(inv.K, inv.variable, *xinv)), yspec);
  if (opt.i_offset != 0.0) KI = expand(substitute(KI, yname, y - Expr::real(opt.i_offset)));
  yspec.lo += opt.i_offset;
  yspec.hi += opt.i_offset;
  SymmetryClassification out;
  out.fit_mode = FitMode::Symbolic;
  out.scale = s.scale;
  auto value = [&](const Expr& e) { return eval(e, inv.constants); };
  try {
    if (auto co = match_polynomial(KI, y, 2, yspec)) {
      out.dim = 6;
      out.c0 = value((*co)[0]);
      out.c1 = value((*co)[1]);
      out.c2 = value((*co)[2]);
      out.exact = std::vector<Expr>{(*co)[2], (*co)[1], (*co)[0]};
      return out;
    }
    Expr KI2 = expand(KI * power(y, Expr(2)));
    if (auto co = match_polynomial(KI2, y, 4, yspec)) {
      double odd = std::abs(value((*co)[1])) + std::abs(value((*co)[3]));
      double mu = value((*co)[0]);
      if (odd <= 1e-12 * s.scale && std::abs(mu) > 1e-8) {
        out.dim = 4;
        out.mu = mu;
        out.c0 = value((*co)[2]);
        out.c2 = value((*co)[4]);
        out.exact = std::vector<Expr>{(*co)[0], (*co)[4], (*co)[2]};
        return out;
      }
    }
  } catch (const std::exception&) {
    return std::nullopt;
  }
  return std::nullopt;
}

}  // namespace

std::optional<Expr> invert_primitive(const Expr& I, const std::string& var, const std::string& y,
                                     const SampleSpec& spec) {
  auto r = peel(I, var, Expr::variable(y));
  if (!r) return std::nullopt;
  Compiled fI(I, {var}, spec.constants);
  Compiled fx(*r, {y}, spec.constants);
  for (double x : deterministic_points(spec.lo, spec.hi, 16)) {
    double back;
    try {
      back = fx({fI({x})});
    } catch (const std::exception&) {
      return std::nullopt;
    }
    if (!(std::abs(back - x) <= 1e-9 * (1.0 + std::abs(x)))) return std::nullopt;
  }
  return r;
}

SymmetryClassification classify(const InvariantTriple& inv, const ClassifyOptions& opt) {
  Samples s = sample(inv, opt);
  const double bound = opt.tolerance * s.scale;

  Fit f6 = lsq(s, 3, 0.0, quad_basis);
  auto [s4, f4] = shift_search(s, opt, 3, l4_basis);

  SymmetryClassification out;
  if (opt.symbolic) {
    if (auto sym = symbolic_path(inv, s, opt)) out = *sym;
  }
  out.scale = s.scale;
  out.residual6 = f6.residual;
  out.residual4 = f4.residual;

  if (out.fit_mode == FitMode::Symbolic) {
    double r = 0.0;
    for (std::size_t i = 0; i < s.I.size(); ++i) {
      double z = s.I[i];
      double fit = out.dim == 6 ? out.c2 * z * z + out.c1 * z + out.c0 : out.mu / (z * z) + out.c2 * z * z + out.c0;
      r = std::max(r, std::abs(fit - s.K[i]));
    }
    out.residual = r;
    if (r <= bound) return out;
    out = SymmetryClassification{};
    out.scale = s.scale;
    out.residual6 = f6.residual;
    out.residual4 = f4.residual;
    out.warnings.push_back("symbolic fit rejected on the sample grid; using the numeric fit");
  }

  out.fit_mode = FitMode::Numeric;
  if (f6.residual <= bound) {
    out.dim = 6;
    out.c0 = f6.coef(0);
    out.c1 = f6.coef(1);
    out.c2 = f6.coef(2);
    out.residual = f6.residual;
    return out;
  }
  if (f4.residual <= bound && std::abs(f4.coef(0)) > 1e-8) {
    out.dim = 4;
    out.mu = f4.coef(0);
    out.c2 = f4.coef(1);
    out.c0 = f4.coef(2);
    out.shift = s4;
    out.residual = f4.residual;
    return out;
  }
  out.dim = 2;
  out.residual = std::min(f6.residual, f4.residual);
  auto [s5, f5] = shift_search(s, opt, 4, l4c1_basis);
  if (f5.residual <= bound && std::abs(f5.coef(0)) > 1e-8 && std::abs(f5.coef(3)) > 1e-8)
    out.warnings.push_back("K fits mu/I^2 + c2 I^2 + c1 I + c0 with c1 != 0, which is not of the four-dimensional form");
  return out;
}

ParabolicEquation fp_logdiffusion(double A, double B) {
  ParabolicEquation eq;
  Expr x = Expr::variable("x");
  Expr a = Expr::constant("A"), b = Expr::constant("B");
  Bindings vals{{"A", A}, {"B", B}};
  Expr lx = log(x);
  eq.a = Expr(4) * power(x, Expr(2)) * lx;
  eq.b = lps::bind(Expr(8) * x * lx + Expr(4) * x + a * x + b * x * lx, vals);
  eq.c = lps::bind(a + b + b * lx, vals);
  eq.domain = {1.0, kInf};
  eq.backward = true;
  return eq;
}

SymmetryClassification check_fp_logdiffusion(double A, double B) {
  return classify(compute_invariants(fp_logdiffusion(A, B)));
}

}  // namespace lps
