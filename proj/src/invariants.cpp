#include "lps/invariants.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <set>

#include "lps/errors.hpp"
#include "lps/quadrature.hpp"

namespace lps {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool is_integer_exponent(const Expr& e) {
  auto q = e.rational();
  return q && q->is_integer();
}

// +1 or -1 when the expression keeps one strict sign over the window, else 0.
int sign_on(const Expr& e, const SampleSpec& spec) {
  Bindings b = spec.constants;
  int sign = 0;
  auto pts = deterministic_points(spec.lo, spec.hi, 16);
  pts.push_back(spec.lo);
  pts.push_back(spec.hi);
  for (double x : pts) {
    b[spec.variable] = x;
    double v;
    try {
      v = eval(e, b);
    } catch (const std::exception&) {
      return 0;
    }
    int s = (v > 0) - (v < 0);
    if (s == 0 || (sign != 0 && s != sign)) return 0;
    sign = s;
  }
  return sign;
}

Expr rewrite_quotients(const Expr& e) {
  if (e.is_number() || e.is_symbol()) return e;
  std::vector<Expr> args;
  for (const auto& a : e.args()) args.push_back(rewrite_quotients(a));
  if (e.kind() == Kind::Tanh) return sinh(args[0]) / cosh(args[0]);
  if (e.kind() == Kind::Tan) return sin(args[0]) / cos(args[0]);
  return with_args(e, args);
}

bool constant_in(const Expr& r, const std::string& var, const SampleSpec& spec) {
  if (!r.depends_on(var)) return true;
  try {
    return is_identically_zero(differentiate(r, var), spec);
  } catch (const std::exception&) {
    return false;
  }
}

std::optional<Expr> power_primitive(const Expr& f, const Expr& h, const Expr& p, const std::string& var,
                                    const SampleSpec& spec) {
  Expr dh = differentiate(h, var);
  if (dh.is_zero()) return std::nullopt;
  Expr r = simplify(f / (power(h, p) * dh));
  if (!constant_in(r, var, spec)) return std::nullopt;
  Expr p1 = p + Expr(1);
  bool minus_one = p1.is_zero();
  if (!minus_one && !p1.is_number()) {
    Bindings b = spec.constants;
    try {
      minus_one = std::abs(eval(p1, b)) < 1e-14;
    } catch (const std::exception&) {
      return std::nullopt;
    }
  }
  if (minus_one) {
    int s = sign_on(h, spec);
    if (s == 0) return std::nullopt;
    return r * log(s > 0 ? h : -h);
  }
  return r * power(h, p1) / p1;
}

std::optional<Expr> exp_primitive(const Expr& f, const Expr& h, const std::string& var, const SampleSpec& spec) {
  Expr dh = differentiate(h, var);
  if (dh.is_zero()) return std::nullopt;
  Expr r = simplify(f / (exp(h) * dh));
  if (!constant_in(r, var, spec)) return std::nullopt;
  return r * exp(h);
}

// r / (alpha x^2 + beta x + gamma) with numeric discriminant sign.
std::optional<Expr> quadratic_reciprocal(const Expr& f, const Expr& q, const std::string& var,
                                         const SampleSpec& spec) {
  Expr x = Expr::variable(var);
  auto co = match_polynomial(q, x, 2, spec);
  if (!co) return std::nullopt;
  Expr gamma = (*co)[0], beta = (*co)[1], alpha = (*co)[2];
  Bindings b = spec.constants;
  double al, be, ga;
  try {
    al = eval(alpha, b);
    be = eval(beta, b);
    ga = eval(gamma, b);
  } catch (const std::exception&) {
    return std::nullopt;
  }
  if (std::abs(al) < 1e-14) return std::nullopt;
  Expr r = simplify(f * q);
  if (!constant_in(r, var, spec)) return std::nullopt;
  double disc = be * be - 4 * al * ga;
  Expr lin = Expr(2) * alpha * x + beta;
  Expr d = beta * beta - Expr(4) * alpha * gamma;
  if (std::abs(disc) < 1e-14 * (be * be + std::abs(al * ga))) return r * Expr(-2) / lin;
  if (disc < 0) {
    Expr s = sqrt(-d);
    return r * Expr(2) / s * atan(lin / s);
  }
  Expr s = sqrt(d);
  Expr ratio = lin / s;
  int inside = sign_on(Expr(1) - power(ratio, Expr(2)), spec);
  if (inside > 0) return r * Expr(-2) / s * atanh(ratio);
  Expr arg = (lin - s) / (lin + s);
  int sg = sign_on(arg, spec);
  if (sg == 0) return std::nullopt;
  return r / s * log(sg > 0 ? arg : -arg);
}

std::optional<Expr> primitive_term(const Expr& f, const std::string& var, const SampleSpec& spec) {
  if (!f.depends_on(var)) return f * Expr::variable(var);
  std::vector<Expr> factors = f.kind() == Kind::Mul ? f.args() : std::vector<Expr>{f};
  for (const auto& g : factors) {
    if (!g.depends_on(var)) continue;
    std::optional<Expr> r;
    if (g.kind() == Kind::Pow) {
      r = power_primitive(f, g.arg(0), g.arg(1), var, spec);
      if (!r && g.arg(1).rational() == Rational(-1)) r = quadratic_reciprocal(f, g.arg(0), var, spec);
    } else if (g.kind() == Kind::Exp) {
      r = exp_primitive(f, g.arg(0), var, spec);
    } else {
      r = power_primitive(f, g, Expr(1), var, spec);
    }
    if (r) return r;
  }
  return power_primitive(f, Expr::variable(var), Expr(0), var, spec);
}

std::optional<Expr> primitive_sum(const Expr& f, const std::string& var, const SampleSpec& spec) {
  if (f.kind() != Kind::Add) return primitive_term(f, var, spec);
  std::vector<Expr> parts;
  for (const auto& term : f.args()) {
    auto p = primitive_term(term, var, spec);
    if (!p) return std::nullopt;
    parts.push_back(*p);
  }
  return add(std::move(parts));
}

double window_length(const Interval& w) { return w.hi - w.lo; }

}  // namespace

std::optional<Expr> antiderivative(const Expr& f, const std::string& var, const SampleSpec& spec) {
  Expr g = simplify(rewrite_quotients(f));
  auto r = primitive_sum(g, var, spec);
  if (!r) {
    Expr e = expand(g);
    if (e != g) r = primitive_sum(e, var, spec);
  }
  if (!r) return std::nullopt;
  Expr res = assume_window(simplify(*r), spec);
  try {
    if (!is_identically_zero(differentiate(res, var) - f, spec)) return std::nullopt;
  } catch (const std::exception&) {
    return std::nullopt;
  }
  return res;
}

Expr assume_window(const Expr& e, const SampleSpec& spec) {
  if (e.is_number() || e.is_symbol()) return e;
  std::vector<Expr> args;
  for (const auto& a : e.args()) args.push_back(assume_window(a, spec));
  Expr r = with_args(e, args);
  if (r.kind() == Kind::Abs) {
    int s = sign_on(r.arg(0), spec);
    if (s > 0) return r.arg(0);
    if (s < 0) return assume_window(-r.arg(0), spec);
    return r;
  }
  if (r.kind() == Kind::Pow && !is_integer_exponent(r.arg(1))) {
    const Expr& base = r.arg(0);
    const Expr& q = r.arg(1);
    if (base.kind() == Kind::Exp) return exp(base.arg(0) * q);
    if (base.kind() == Kind::Mul) {
      bool all_positive = true;
      for (const auto& f : base.args()) {
        if (f.is_number() ? f.num().value() <= 0 : sign_on(f, spec) <= 0) {
          all_positive = false;
          break;
        }
      }
      if (all_positive) {
        std::vector<Expr> fs;
        for (const auto& f : base.args()) fs.push_back(assume_window(power(f, q), spec));
        return mul(std::move(fs));
      }
    }
    if (base.kind() == Kind::Pow && sign_on(base.arg(0), spec) > 0)
      return assume_window(power(base.arg(0), base.arg(1) * q), spec);
  }
  return r;
}

ParabolicEquation ParabolicEquation::from_program(const ParsedProgram& prog) {
  ParabolicEquation eq;
  auto exact = prog.exact_bindings();
  auto coeff = [&](const char* name) { return prog.has(name) ? substitute(prog.at(name), exact) : Expr(0); };
  if (!prog.has("a")) throw Error("equation file defines no diffusion coefficient 'a'");
  eq.a = coeff("a");
  eq.b = coeff("b");
  eq.c = coeff("c");
  eq.variable = prog.variable;
  if (prog.domain) eq.domain = *prog.domain;
  eq.window = prog.window;
  eq.backward = prog.backward;
  eq.constants = prog.bindings();
  return eq;
}

Interval ParabolicEquation::analysis_window() const {
  if (window) return *window;
  double lo = domain.lo, hi = domain.hi;
  if (std::isinf(lo) && std::isinf(hi)) {
    lo = -3.0;
    hi = 3.0;
  } else if (std::isinf(lo)) {
    lo = hi - 4.0;
  } else if (std::isinf(hi)) {
    hi = lo + 4.0;
  }
  double inset = 0.05 * (hi - lo);
  return {lo + inset, hi - inset};
}

double ParabolicEquation::x_ref() const {
  if (!std::isinf(domain.lo) && !std::isinf(domain.hi)) return 0.5 * (domain.lo + domain.hi);
  if (std::isinf(domain.lo) && std::isinf(domain.hi)) return 0.0;
  if (domain.lo < 1.0 && 1.0 < domain.hi) return 1.0;
  return std::isinf(domain.hi) ? domain.lo + 1.0 : domain.hi - 1.0;
}

SampleSpec ParabolicEquation::sample_spec() const {
  SampleSpec s;
  Interval w = analysis_window();
  s.variable = variable;
  s.lo = w.lo;
  s.hi = w.hi;
  s.constants = constants;
  s.seed = seed;
  return s;
}

void ParabolicEquation::validate() const {
  const std::pair<const char*, const Expr*> coeffs[] = {{"a", &a}, {"b", &b}, {"c", &c}};
  for (const auto& [name, e] : coeffs) {
    if (e->depends_on("t"))
      throw UnsupportedCoefficient(std::string("coefficient ") + name +
                                   " depends on t; only time-autonomous equations are classified (the "
                                   "time-dependent J(x,t), K(x,t) forms are not implemented)");
    for (const auto& s : free_symbols(*e))
      if (s != variable && s != "pi" && !constants.count(s))
        throw Error(std::string("coefficient ") + name + " uses constant '" + s + "' without a value");
  }
  Interval w = analysis_window();
  if (!(window_length(w) > 0)) throw DomainError("empty analysis window");
  Bindings bind = constants;
  int sign = 0;
  for (double x : deterministic_points(w.lo, w.hi, 32)) {
    bind[variable] = x;
    double v;
    try {
      v = eval(a, bind);
    } catch (const DomainError&) {
      throw NonparabolicError("a is undefined at x = " + std::to_string(x));
    }
    if (!std::isfinite(v) || v == 0.0) throw NonparabolicError("a vanishes at x = " + std::to_string(x));
    int s = v > 0 ? 1 : -1;
    if (sign != 0 && s != sign) throw NonparabolicError("a changes sign on the domain");
    sign = s;
  }
  if (sign < 0)
    throw NonparabolicError("a < 0 on the domain; write the equation with direction = backward instead");
}

double InvariantTriple::eval_at(const Expr& e, double x) const {
  Bindings b = constants;
  b[variable] = x;
  return eval(e, b);
}

Expr quadrature_primitive(const std::string& name, const Expr& f, const std::string& var, double x_ref,
                          const Bindings& constants) {
  Expr fb = bind(f, constants);
  struct State {
    Compiled integrand;
    double x_ref;
    std::mutex mu;
    std::map<double, double> cache;
  };
  auto st = std::make_shared<State>();
  st->integrand = Compiled(fb, {var});
  st->x_ref = x_ref;
  auto fn = std::make_shared<OpaqueFunction>();
  fn->name = name;
  fn->parameter = "_" + name + "_arg";
  fn->derivative = std::make_shared<const Expr>(substitute(fb, var, Expr::variable(fn->parameter)));
  fn->eval = [st](double x) {
    {
      std::lock_guard<std::mutex> lock(st->mu);
      auto it = st->cache.find(x);
      if (it != st->cache.end()) return it->second;
    }
    quad::Options opt;
    opt.abs_tol = 1e-13;
    opt.rel_tol = 1e-13;
    opt.slack = 1e4;
    double v = quad::integrate_value([&](double s) { return st->integrand({s}); }, st->x_ref, x, opt);
    std::lock_guard<std::mutex> lock(st->mu);
    if (st->cache.size() > 200000) st->cache.clear();
    st->cache.emplace(x, v);
    return v;
  };
  return opaque_call(fn, Expr::variable(var));
}

InvariantTriple compute_invariants(const ParabolicEquation& eq) {
  eq.validate();
  InvariantTriple inv;
  inv.variable = eq.variable;
  inv.constants = eq.constants;
  inv.spec = eq.sample_spec();
  inv.x_ref = eq.x_ref();
  const std::string& x = eq.variable;
  const SampleSpec& spec = inv.spec;

  inv.sqrt_a = assume_window(sqrt(eq.a), spec);
  Expr f = assume_window(power(inv.sqrt_a, Expr(-1)), spec);
  if (auto I = antiderivative(f, x, spec)) {
    inv.I = *I;
    inv.symbolic_I = true;
  } else {
    inv.I = quadrature_primitive("I", f, x, inv.x_ref, eq.constants);
  }
  inv.J = assume_window(simplify(differentiate(inv.sqrt_a, x) - eq.b / inv.sqrt_a), spec);
  Expr K = Expr(1) / Expr(2) * inv.sqrt_a * differentiate(inv.J, x) -
           Expr(1) / Expr(4) * power(inv.J, Expr(2)) + eq.c;
  inv.K = assume_window(simplify(expand(K)), spec);

  Expr g = simplify(inv.J / inv.sqrt_a);
  std::optional<Expr> G;
  if (eq.b.is_zero()) {
    G = assume_window(Expr(1) / Expr(2) * log(eq.a), spec);
  } else if (auto B = antiderivative(eq.b / eq.a, x, spec)) {
    G = assume_window(Expr(1) / Expr(2) * log(eq.a) - *B, spec);
  }
  if (G) {
    try {
      if (!is_identically_zero(differentiate(*G, x) - g, spec)) G.reset();
    } catch (const std::exception&) {
      G.reset();
    }
  }
  if (G) {
    inv.G = *G;
    inv.symbolic_G = true;
  } else {
    inv.G = quadrature_primitive("G", g, x, inv.x_ref, eq.constants);
  }
  return inv;
}

namespace {

struct Derivs {
  double v, d1, d2;
};

// Fourth-order central differences.
Derivs central(const Fn1& f, double x, double h) {
  double fm2 = f(x - 2 * h), fm1 = f(x - h), f0 = f(x), fp1 = f(x + h), fp2 = f(x + 2 * h);
  return {f0, (fm2 - 8 * fm1 + 8 * fp1 - fp2) / (12 * h), (-fm2 + 16 * fm1 - 30 * f0 + 16 * fp1 - fp2) / (12 * h * h)};
}

}  // namespace

TransformedCoefficients transformed_coefficients(const ParabolicEquation& eq, const Expr& T, const Expr& X,
                                                 const Expr& theta) {
  const std::string& x = eq.variable;
  Expr Td = differentiate(T, "t");
  Expr Xx = differentiate(X, x);
  Expr Xxx = differentiate(Xx, x);
  Expr Xt = differentiate(X, "t");
  Expr lx = differentiate(theta, x) / theta;
  Expr lxx = differentiate(theta, x, 2) / theta;
  Expr lt = differentiate(theta, "t") / theta;
  Expr at = power(Xx, Expr(2)) * eq.a / Td;
  Expr bt = Xx / Td * (eq.b - Expr(2) * eq.a * lx + eq.a * Xxx / Xx - Xt / Xx);
  Expr ct = (eq.c - eq.b * lx + Expr(2) * eq.a * power(lx, Expr(2)) - eq.a * lxx + lt) / Td;
  std::vector<std::string> slots{x, "t"};
  auto jac = std::make_shared<Compiled>(Td * Xx * theta, slots, eq.constants);
  auto wrap = [&](const Expr& e) -> Fn2 {
    auto c = std::make_shared<Compiled>(e, slots, eq.constants);
    return [c, jac](double xv, double tv) {
      double j = (*jac)({xv, tv});
      if (!std::isfinite(j) || std::abs(j) < 1e-300) throw DegenerateTransform("Jacobian factor vanishes");
      return (*c)({xv, tv});
    };
  };
  return {wrap(at), wrap(bt), wrap(ct)};
}

TransformedCoefficients transformed_coefficients(const ParabolicEquation& eq, const Fn1& T, const Fn2& X,
                                                 const Fn2& theta) {
  const double h = 1e-5;
  auto a = std::make_shared<Compiled>(eq.a, std::vector<std::string>{eq.variable}, eq.constants);
  auto b = std::make_shared<Compiled>(eq.b, std::vector<std::string>{eq.variable}, eq.constants);
  auto c = std::make_shared<Compiled>(eq.c, std::vector<std::string>{eq.variable}, eq.constants);
  struct Local {
    double Td, Xx, Xxx, Xt, lx, lxx, lt;
  };
  auto local = [=](double x, double t) {
    double Td = (T(t + h) - T(t - h)) / (2 * h);
    Derivs dx = central([&](double s) { return X(s, t); }, x, h);
    double Xt = (X(x, t + h) - X(x, t - h)) / (2 * h);
    Derivs th = central([&](double s) { return theta(s, t); }, x, h);
    double tt = (theta(x, t + h) - theta(x, t - h)) / (2 * h);
    if (std::abs(Td) < 1e-300 || std::abs(dx.d1) < 1e-300 || std::abs(th.v) < 1e-300)
      throw DegenerateTransform("Jacobian factor vanishes");
    return Local{Td, dx.d1, dx.d2, Xt, th.d1 / th.v, th.d2 / th.v, tt / th.v};
  };
  TransformedCoefficients out;
  out.a = [=](double x, double t) {
    Local l = local(x, t);
    return l.Xx * l.Xx * (*a)({x}) / l.Td;
  };
  out.b = [=](double x, double t) {
    Local l = local(x, t);
    double av = (*a)({x});
    return l.Xx / l.Td * ((*b)({x}) - 2 * av * l.lx + av * l.Xxx / l.Xx - l.Xt / l.Xx);
  };
  out.c = [=](double x, double t) {
    Local l = local(x, t);
    double av = (*a)({x});
    return ((*c)({x}) - (*b)({x}) * l.lx + 2 * av * l.lx * l.lx - av * l.lxx + l.lt) / l.Td;
  };
  return out;
}

double semi_invariant_numeric(const TransformedCoefficients& co, const Fn2& X, double x, double t, double h) {
  // d/dx~ = X_x^{-1} d/dx
  auto Xx = [&](double s) { return central([&](double r) { return X(r, t); }, s, h).d1; };
  auto sa = [&](double s) { return std::sqrt(co.a(s, t)); };
  auto J = [&](double s) {
    double d = central(sa, s, h).d1 / Xx(s);
    return d - co.b(s, t) / sa(s);
  };
  double dJ = central(J, x, h).d1 / Xx(x);
  double Jv = J(x);
  return 0.5 * sa(x) * dJ - 0.25 * Jv * Jv + co.c(x, t);
}

}  // namespace lps
