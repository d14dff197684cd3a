#include "lps/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include "exact.hpp"
#include "lps/errors.hpp"
#include "lps/parser.hpp"
#include "lps/quadrature.hpp"
#include "lps/transform.hpp"

namespace lps {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSpan = 40.0;        // adaptive truncation, in window widths
constexpr double kTensorSpan = 14.0;  // tensor truncation, in window widths

Expr P(const std::string& text, const Bindings& constants) { return lps::bind(parse_expression(text, "x"), constants); }

std::string fmt(double v, int digits = 17) {
  std::ostringstream ss;
  ss.precision(digits);
  ss << v;
  return ss.str();
}

std::string joined(const std::vector<std::string>& parts, const std::string& sep) {
  std::string s;
  for (std::size_t i = 0; i < parts.size(); ++i) s += (i ? sep : "") + parts[i];
  return s;
}

std::vector<std::string> slots_of(const KernelEntry& e) {
  std::vector<std::string> s{"t"};
  for (const auto& v : e.equation.space) s.push_back(v);
  for (const auto& v : e.source) s.push_back(v);
  return s;
}

// Evaluates compiled expressions at (t, space, source).
struct Point {
  std::vector<double> v;
  int dim;
  Point(const KernelEntry& e, double t, const std::vector<double>& x, const std::vector<double>& y)
      : v(1 + e.dim() + e.source.size(), 0.0), dim(e.dim()) {
    v[0] = t;
    for (std::size_t i = 0; i < x.size() && i < static_cast<std::size_t>(dim); ++i) v[1 + i] = x[i];
    for (std::size_t i = 0; i < y.size() && i < e.source.size(); ++i) v[1 + dim + i] = y[i];
  }
  double& x(int i) { return v[1 + i]; }
  double& y(int i) { return v[1 + dim + i]; }
};

struct Window1 {
  double lo, hi, center;
};

Window1 clip_window(double c, double w, double span, const Interval& dom, bool logarithmic) {
  if (logarithmic) {
    double lo = c - span * w, hi = c + span * w;
    if (dom.lo > 0) lo = std::max(lo, std::log(dom.lo));
    if (std::isfinite(dom.hi)) hi = std::min(hi, std::log(dom.hi));
    return {lo, hi, c};
  }
  return {std::max(c - span * w, dom.lo), std::min(c + span * w, dom.hi), c};
}

quad::Options tight() {
  quad::Options o;
  o.abs_tol = 1e-14;
  o.rel_tol = 1e-10;
  o.max_depth = 15;
  return o;
}

int tensor_panels(int dim) { return dim <= 2 ? 10 : (dim == 3 ? 7 : 5); }

// ∫ f over the window; f receives the integration point in original variables.
double integrate_window(const std::function<double(const double*)>& f, const std::vector<Window1>& axes,
                        bool logarithmic) {
  const int dim = static_cast<int>(axes.size());
  if (dim == 1) {
    const Window1& w = axes[0];
    auto g = [&](double s) {
      double v = logarithmic ? std::exp(s) : s;
      double r = f(&v);
      return logarithmic ? r * v : r;
    };
    return quad::integrate_split(g, w.lo, w.hi, {w.center}, tight());
  }
  std::vector<quad::Rule> rules;
  for (const auto& w : axes) rules.push_back(quad::composite(w.lo, w.hi, tensor_panels(dim), 8));
  return quad::tensor(
      [&](const double* p) {
        if (!logarithmic) return f(p);
        std::vector<double> v(p, p + dim);
        double jac = 1.0;
        for (double& s : v) {
          s = std::exp(s);
          jac *= s;
        }
        return f(v.data()) * jac;
      },
      rules);
}

struct Compiler {
  std::vector<std::string> slots;
  Bindings constants;
  Compiled operator()(const Expr& e) const { return Compiled(e, slots, constants); }
};

std::vector<Window1> windows(const KernelEntry& e, const KernelWindow& w, Point& p, int dim, double span,
                             const Compiler& C) {
  std::vector<Window1> out;
  for (int i = 0; i < dim; ++i) {
    double c = C(w.center[i])(p.v.data());
    double width = C(w.width[i])(p.v.data());
    out.push_back(clip_window(c, width, span, e.domain[std::min<std::size_t>(i, e.domain.size() - 1)], w.logarithmic));
  }
  return out;
}

KernelEquation make_equation(std::vector<std::string> space, std::vector<Expr> a, std::vector<Expr> b, Expr c) {
  KernelEquation q;
  q.space = std::move(space);
  q.diffusion = std::move(a);
  q.drift = std::move(b);
  q.potential = std::move(c);
  return q;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ConstraintViolation(what);
}

Bindings merged(const Bindings& defaults, const Bindings& given, const std::string& name) {
  Bindings out = defaults;
  for (const auto& [k, v] : given) {
    if (!defaults.count(k)) throw ConstraintViolation("kernel '" + name + "' has no constant '" + k + "'");
    if (!std::isfinite(v)) throw ConstraintViolation("constant '" + k + "' must be finite");
    out[k] = v;
  }
  return out;
}

KernelWindow window(std::vector<Expr> c, std::vector<Expr> w, bool logarithmic = false) {
  return KernelWindow{std::move(c), std::move(w), logarithmic};
}

const Interval kLine{-kInf, kInf};
const Interval kHalf{0.0, kInf};

KernelEntry heat_1d(const Bindings& k) {
  KernelEntry e;
  e.equation = make_equation({"x"}, {Expr(1)}, {Expr(0)}, Expr(0));
  e.source = {"y"};
  e.K = P("(4*pi*t)^(-1/2)*exp(-((x - y)^2)/(4*t))", k);
  e.domain = {kLine};
  e.validity = "t > 0, x and y real";
  e.normalization.target = Expr(1);
  e.space_window = window({P("y", k)}, {P("sqrt(t)", k)});
  e.source_window = window({P("x", k)}, {P("sqrt(t)", k)});
  e.default_source = {0.3};
  e.citation = "Appell transformation of the constant solution";
  return e;
}

KernelEntry linear_potential(const Bindings& k) {
  KernelEntry e;
  e.equation = make_equation({"x"}, {Expr(1)}, {Expr(0)}, P("x", k));
  e.source = {"y"};
  e.K = P("(4*pi*t)^(-1/2)*exp(-((x - y)^2)/(4*t) + t^3/12 + t*(x + y)/2)", k);
  e.domain = {kLine};
  e.validity = "t > 0, x and y real";
  e.normalization.target = P("exp(t^3/3 + t*y)", k);
  e.normalization.density = false;
  e.space_window = window({P("y + t^2", k)}, {P("sqrt(t)", k)});
  e.source_window = window({P("x + t^2", k)}, {P("sqrt(t)", k)});
  e.default_source = {0.3};
  e.citation = "Appell-type transformation with omega = -t^2 - y";
  e.notes.push_back("the t(x + y)/2 term carries a plus sign; the minus sign solves u_t = u_xx - x u");
  return e;
}

KernelEntry mehler_hyperbolic(const Bindings& k) {
  KernelEntry e;
  e.equation = make_equation({"x"}, {Expr(1)}, {Expr(0)}, P("-(x^2)", k));
  e.source = {"y"};
  e.K = P("(2*pi*sinh(2*t))^(-1/2)*exp(-(cosh(2*t)*(x^2 + y^2) - 2*x*y)/(2*sinh(2*t)))", k);
  e.domain = {kLine};
  e.validity = "t > 0, x and y real";
  e.normalization.target = P("cosh(2*t)^(-1/2)*exp(-(y^2)*tanh(2*t)/2)", k);
  e.normalization.density = false;
  e.space_window = window({P("y/cosh(2*t)", k)}, {P("sqrt(tanh(2*t)/2)", k)});
  e.source_window = window({P("x/cosh(2*t)", k)}, {P("sqrt(tanh(2*t)/2)", k)});
  e.default_source = {0.3};
  e.citation = "Mehler formula";
  e.notes.push_back("solves u_t = u_xx - x^2 u");
  return e;
}

KernelEntry mehler_trig(const Bindings& k) {
  KernelEntry e;
  e.equation = make_equation({"x"}, {Expr(1)}, {Expr(0)}, P("x^2", k));
  e.source = {"y"};
  e.K = P("(2*pi*sin(2*t))^(-1/2)*exp(-(cos(2*t)*(x^2 + y^2) - 2*x*y)/(2*sin(2*t)))", k);
  e.domain = {kLine};
  e.t_max = std::numbers::pi / 2;
  e.normalization_t_max = std::numbers::pi / 4;
  e.validity = "0 < t < pi/2; integrable in x for t < pi/4";
  e.normalization.target = P("cos(2*t)^(-1/2)*exp((y^2)*tan(2*t)/2)", k);
  e.normalization.density = false;
  e.space_window = window({P("y/cos(2*t)", k)}, {P("sqrt(tan(2*t)/2)", k)});
  e.source_window = window({P("x/cos(2*t)", k)}, {P("sqrt(tan(2*t)/2)", k)});
  e.default_source = {0.3};
  e.citation = "Mehler formula, trigonometric form";
  e.notes.push_back("solves u_t = u_xx + x^2 u");
  return e;
}

KernelEntry linear_potential_nd(const Bindings& k) {
  const double nd = k.at("n");
  require(nd >= 1 && nd <= 4 && std::floor(nd) == nd, "linear_potential_nd requires n in {1, 2, 3, 4}");
  const int n = static_cast<int>(nd);
  KernelEntry e;
  std::vector<std::string> space, dist, b2, lin, target;
  std::vector<Expr> ones, zeros;
  Expr pot(0);
  for (int i = 1; i <= n; ++i) {
    std::string xi = "x" + std::to_string(i), yi = "y" + std::to_string(i), bi = "b" + std::to_string(i);
    space.push_back(xi);
    e.source.push_back(yi);
    dist.push_back("(" + xi + " - " + yi + ")^2");
    b2.push_back(bi + "^2");
    lin.push_back(bi + "*(" + xi + " + " + yi + ")");
    target.push_back(bi + "^2*t^3/3 + " + bi + "*t*" + yi);
    ones.push_back(Expr(1));
    zeros.push_back(Expr(0));
    pot = pot + P(bi + "*" + xi, k);
    e.space_window.center.push_back(P(yi + " + " + bi + "*t^2", k));
    e.space_window.width.push_back(P("sqrt(t)", k));
    e.source_window.center.push_back(P(xi + " + " + bi + "*t^2", k));
    e.source_window.width.push_back(P("sqrt(t)", k));
    e.domain.push_back(kLine);
    e.default_source.push_back(0.2 * i);
  }
  e.equation = make_equation(space, ones, zeros, pot);
  e.K = P("(4*pi*t)^(-" + std::to_string(n) + "/2)*exp(-(" + joined(dist, " + ") + ")/(4*t) + t^3/12*(" +
              joined(b2, " + ") + ") + t/2*(" + joined(lin, " + ") + "))",
          k);
  e.validity = "t > 0, x and y in R^n";
  e.normalization.target = P("exp(" + joined(target, " + ") + ")", k);
  e.normalization.density = false;
  e.citation = "Appell-type transformation with omega_k = -b_k t^2 - y_k";
  e.notes.push_back("the t/2 sum carries a plus sign, as in one dimension");
  return e;
}

KernelEntry radial_origin(const Bindings& k) {
  const double kk = k.at("k");
  require(kk > 0 && kk <= 40, "radial_origin requires 0 < k <= 40");
  KernelEntry e;
  e.equation = make_equation({"x"}, {Expr(1)}, {P("k/x", k)}, Expr(0));
  e.K = P("(4*pi*t)^(-(k + 1)/2)*exp(-(x^2)/(4*t))", k);
  e.domain = {kHalf};
  e.validity = "t > 0, x > 0, source at the origin";
  const double n = kk + 1.0;
  const double area = 2.0 * std::pow(std::numbers::pi, n / 2) / std::tgamma(n / 2);
  e.normalization.weight = Expr::real(area) * P("x^k", k);
  e.normalization.target = Expr(1);
  e.space_window = window({Expr(0)}, {P("sqrt(t)", k)});
  e.citation = "scale-invariant elementary solution of the radial heat equation";
  e.notes.push_back("normalized against the measure of R^(k+1) in polar form");
  return e;
}

Expr order_expr(double nu) { return detail::snap(nu); }

KernelEntry second_canonical(const Bindings& k) {
  const double mu = k.at("mu");
  require(mu <= 0.25, "second_canonical requires mu <= 1/4");
  const double nu = std::sqrt(1.0 - 4.0 * mu) / 2.0;
  require(nu <= 20.0, "second_canonical requires the Bessel order sqrt(1 - 4 mu)/2 <= 20");
  KernelEntry e;
  e.equation = make_equation({"x"}, {Expr(1)}, {Expr(0)}, P("mu/x^2", k));
  e.source = {"y"};
  e.K = P("sqrt(x*y)/(2*t)*exp(-((x - y)^2)/(4*t))*besselie(nu, x*y/(2*t))", {});
  e.K = lps::bind(substitute(e.K, "nu", order_expr(nu)), k);
  e.domain = {kHalf};
  e.validity = "t > 0, x > 0, y > 0";
  e.normalization.density = false;
  e.space_window = window({P("y", k)}, {P("sqrt(t)", k)});
  e.source_window = window({P("x", k)}, {P("sqrt(t)", k)});
  e.default_source = {1.0};
  e.citation = "Laplace inversion of the orbit of x^rho under the projective symmetry";
  e.notes.push_back("the integral over x tends to 1 only as t -> 0");
  return e;
}

KernelEntry radial(const Bindings& k) {
  const double n = k.at("n");
  require(n >= 1 && n <= 42, "radial requires 1 <= n <= 42");
  KernelEntry e;
  e.equation = make_equation({"x"}, {Expr(1)}, {P("(n - 1)/x", k)}, Expr(0));
  e.source = {"y"};
  e.K = P("x^(1 - n/2)*y^(n/2)/(2*t)*exp(-((x - y)^2)/(4*t))*besselie(nu, x*y/(2*t))", {});
  e.K = lps::bind(substitute(e.K, "nu", order_expr(n / 2 - 1)), k);
  e.domain = {kHalf};
  e.validity = "t > 0, x > 0, y > 0";
  e.normalization.over = Normalization::Over::Source;
  e.normalization.target = Expr(1);
  e.space_window = window({P("y", k)}, {P("sqrt(t)", k)});
  e.source_window = window({P("x", k)}, {P("sqrt(t)", k)});
  e.default_source = {1.0};
  e.citation = "second canonical kernel times (x/y)^((1 - n)/2)";
  e.notes.push_back("a transition density in y: the integral over y is 1");
  return e;
}

KernelEntry black_scholes(const Bindings& k) {
  require(k.at("sigma") > 0, "black_scholes requires sigma > 0");
  KernelEntry e;
  e.equation = make_equation({"x"}, {P("sigma^2*x^2/2", k)}, {P("r*x", k)}, P("-r", k));
  e.source = {"y"};
  const Bindings kl{{"sigma", k.at("sigma")}, {"r", k.at("r")}, {"l", k.at("r") - k.at("sigma") * k.at("sigma") / 2}};
  e.K = P("exp(-r*t)/(sigma*y*sqrt(2*pi*t))*exp(-((log(x/y) + l*t)^2)/(2*sigma^2*t))", kl);
  e.domain = {kHalf};
  e.validity = "t > 0, x > 0, y > 0; time to expiry";
  e.normalization.over = Normalization::Over::Source;
  e.normalization.weight = P("exp(r*t)", k);
  e.normalization.target = Expr(1);
  e.space_window = window({P("log(y) - l*t", kl)}, {P("sigma*sqrt(t)", kl)}, true);
  e.source_window = window({P("log(x) + l*t", kl)}, {P("sigma*sqrt(t)", kl)}, true);
  e.default_source = {1.0};
  e.citation = "inverse Mellin transform of the orbit of u = x";
  e.notes.push_back("normalized over y with the discount e^{-rt} removed");
  return e;
}

KernelEntry ou_fp(const Bindings& k) {
  require(k.at("b") > 0 && k.at("sigma") > 0, "ou_fp requires b > 0 and sigma > 0");
  KernelEntry e;
  e.equation = make_equation({"x"}, {P("sigma^2/2", k)}, {P("b*x", k)}, P("b", k));
  e.source = {"y"};
  e.K = P("sqrt(b/(pi*sigma^2))*(1 - exp(-2*b*t))^(-1/2)*exp(-b/sigma^2*((x - y*exp(-b*t))^2)/(1 - exp(-2*b*t)))", k);
  e.domain = {kLine};
  e.validity = "t > 0, x and y real";
  e.normalization.target = Expr(1);
  e.space_window = window({P("y*exp(-b*t)", k)}, {P("sigma*sqrt((1 - exp(-2*b*t))/(2*b))", k)});
  e.source_window = window({P("x*exp(b*t)", k)}, {P("sigma*sqrt((exp(2*b*t) - 1)/(2*b))", k)});
  e.default_source = {0.3};
  e.citation = "group-invariant solution; transition density of the OU process";
  e.notes.push_back("mean y exp(-bt); the form with x - y exp(bt) does not solve the equation");
  return e;
}

KernelEntry ou_nonfp(const Bindings& k) {
  require(k.at("b") > 0 && k.at("sigma") > 0, "ou_nonfp requires b > 0 and sigma > 0");
  KernelEntry e;
  e.equation = make_equation({"x"}, {P("sigma^2/2", k)}, {P("b*x", k)}, Expr(0));
  e.source = {"y"};
  // exp(-A) cosh(B) written as a sum of two Gaussians.
  e.K = P("1/sigma*sqrt(b/pi)*(exp(2*b*t) - 1)^(-1/2)*(exp(-b*((exp(b*t)*x - y)^2)/(sigma^2*(exp(2*b*t) - 1)))"
          " + exp(-b*((exp(b*t)*x + y)^2)/(sigma^2*(exp(2*b*t) - 1))))",
          k);
  e.domain = {kHalf};
  e.validity = "t > 0, x > 0, y > 0 (half line only)";
  e.normalization.over = Normalization::Over::Source;
  e.normalization.target = Expr(1);
  e.space_window = window({P("y*exp(-b*t)", k)}, {P("sigma*sqrt((1 - exp(-2*b*t))/(2*b))", k)});
  e.source_window = window({P("x*exp(b*t)", k)}, {P("sigma*sqrt((exp(2*b*t) - 1)/(2*b))", k)});
  e.default_source = {1.0};
  e.citation = "Laplace inversion of the orbit of u = 1 under exp(e v2)";
  e.notes.push_back("verified on the half line y > 0 only");
  e.notes.push_back("y^2 and the cosh argument carry the 2/sigma^2 scaling of a density in y");
  return e;
}

KernelEntry heat_2d(const Bindings& k, bool four) {
  require(k.at("t0") > 0, "heat_2d_timedep requires t0 > 0");
  KernelEntry e;
  e.equation = make_equation({"x", "y"}, {Expr(1), P("t^(-2)", k)}, {Expr(0), Expr(0)}, Expr(0));
  e.source = {"x0", "y0"};
  const std::string f = four ? "4*" : "";
  e.K = P("sqrt(t0*t)/(4*pi*(t - t0))*exp(-((x - x0)^2)/(" + f + "(t - t0)) - t0*t*((y - y0)^2)/(" + f + "(t - t0)))", k);
  e.domain = {kLine, kLine};
  e.t_start = k.at("t0");
  e.validity = "t > t0 > 0, (x, y) real";
  e.normalization.target = Expr(1);
  e.space_window = window({P("x0", k), P("y0", k)}, {P("sqrt(t - t0)", k), P("sqrt((t - t0)/(t0*t))", k)});
  e.source_window = window({P("x", k), P("y", k)}, {P("sqrt(t - t0)", k), P("sqrt((t - t0)/(t0*t))", k)});
  e.default_source = {0.2, -0.3};
  e.citation = "invariant solution of the five-dimensional subalgebra fixing the source";
  e.notes.push_back(four ? "exponent with the factor 4, selected by the delta limit"
                         : "exponent without the factor 4");
  return e;
}

struct CatalogItem {
  Bindings defaults;
  std::function<KernelEntry(const Bindings&)> make;
};

const std::map<std::string, CatalogItem>& catalog() {
  static const std::map<std::string, CatalogItem> c{
      {"heat_1d", {{}, heat_1d}},
      {"linear_potential", {{}, linear_potential}},
      {"mehler_hyperbolic", {{}, mehler_hyperbolic}},
      {"mehler_trig", {{}, mehler_trig}},
      {"linear_potential_nd", {{{"n", 2}, {"b1", 1.0}, {"b2", -0.5}, {"b3", 0.25}, {"b4", 0.75}}, linear_potential_nd}},
      {"radial_origin", {{{"k", 1}}, radial_origin}},
      {"second_canonical", {{{"mu", -2}}, second_canonical}},
      {"radial", {{{"n", 2}}, radial}},
      {"black_scholes", {{{"sigma", 0.4}, {"r", 0.06}}, black_scholes}},
      {"ou_fp", {{{"b", 1}, {"sigma", 1}}, ou_fp}},
      {"ou_nonfp", {{{"b", 1}, {"sigma", 1}}, ou_nonfp}},
      {"heat_2d_timedep", {{{"t0", 0.5}}, [](const Bindings& k) { return heat_2d(k, true); }}},
  };
  return c;
}

}  // namespace

std::string KernelEquation::text() const {
  std::vector<std::string> terms;
  for (std::size_t i = 0; i < space.size(); ++i) {
    const std::string& v = space[i];
    if (!diffusion[i].is_zero())
      terms.push_back((diffusion[i].is_one() ? "" : "(" + to_string(diffusion[i]) + ")*") + "u_" + v + v);
    if (!drift[i].is_zero()) terms.push_back((drift[i].is_one() ? "" : "(" + to_string(drift[i]) + ")*") + "u_" + v);
  }
  if (!potential.is_zero()) terms.push_back((potential.is_one() ? "" : "(" + to_string(potential) + ")*") + "u");
  return "u_t = " + joined(terms, " + ");
}

std::optional<ParabolicEquation> KernelEquation::parabolic(const Interval& domain) const {
  if (space.size() != 1 || diffusion[0].depends_on("t") || drift[0].depends_on("t") || potential.depends_on("t"))
    return std::nullopt;
  ParabolicEquation eq;
  eq.a = diffusion[0];
  eq.b = drift[0];
  eq.c = potential;
  eq.domain = domain;
  eq.variable = space[0];
  return eq;
}

double KernelEntry::value(const std::vector<double>& x, double tau, const std::vector<double>& y) const {
  Point p(*this, t_start + tau, x, y);
  return Compiled(K, slots_of(*this))(p.v.data());
}

const std::vector<std::string>& kernel_names() {
  static const std::vector<std::string> names{"heat_1d",       "linear_potential", "mehler_hyperbolic",
                                              "mehler_trig",   "linear_potential_nd", "radial_origin",
                                              "second_canonical", "radial",        "black_scholes",
                                              "ou_fp",         "ou_nonfp",         "heat_2d_timedep"};
  return names;
}

KernelEntry kernel(const std::string& name, const Bindings& constants) {
  auto it = catalog().find(name);
  if (it == catalog().end()) throw UnknownKernel("unknown kernel '" + name + "'");
  Bindings k = merged(it->second.defaults, constants, name);
  KernelEntry e = it->second.make(k);
  e.name = name;
  e.constants = k;
  return e;
}

ResidualGrid default_residual_grid(const KernelEntry& e) {
  ResidualGrid g;
  if (std::isfinite(e.t_max)) g.tau.hi = std::min(g.tau.hi, 0.9 * (e.t_max - e.t_start));
  g.source = e.default_source;
  for (int i = 0; i < e.dim(); ++i) {
    double c = i < static_cast<int>(g.source.size()) ? g.source[i] : 0.0;
    const Interval& d = e.domain[i];
    double lo = std::max(c - 3.0, d.lo + 0.1), hi = std::min(c + 3.0, d.hi - 0.1);
    if (e.source.empty() && d.lo == 0.0) lo = 0.1, hi = 3.0;
    g.space.push_back({lo, hi});
  }
  if (e.dim() > 2) g.n = 5;
  return g;
}

double verify_pde_residual(const KernelEntry& e, const ResidualGrid& grid) {
  const Compiler C{slots_of(e), {}};
  const int dim = e.dim();
  Compiled K = C(e.K), Kt = C(differentiate(e.K, "t")), c = C(e.equation.potential);
  std::vector<Compiled> Kx, Kxx, a, b;
  for (int i = 0; i < dim; ++i) {
    const std::string& v = e.equation.space[i];
    Expr d1 = differentiate(e.K, v);
    Kx.push_back(C(d1));
    Kxx.push_back(C(differentiate(d1, v)));
    a.push_back(C(e.equation.diffusion[i]));
    b.push_back(C(e.equation.drift[i]));
  }
  Point p(e, 0.0, {}, grid.source);
  std::vector<int> idx(dim + 1, 0);
  const int n = std::max(grid.n, 2), nt = std::max(grid.nt, 2);
  double worst = 0.0;
  while (true) {
    p.v[0] = e.t_start + grid.tau.lo + (grid.tau.hi - grid.tau.lo) * idx[0] / (nt - 1);
    for (int i = 0; i < dim; ++i)
      p.x(i) = grid.space[i].lo + (grid.space[i].hi - grid.space[i].lo) * idx[i + 1] / (n - 1);
    const double* v = p.v.data();
    double kt = Kt(v);
    double r = kt - c(v) * K(v);
    for (int i = 0; i < dim; ++i) r -= a[i](v) * Kxx[i](v) + b[i](v) * Kx[i](v);
    worst = std::max(worst, std::abs(r) / (1.0 + std::abs(kt)));
    int j = 0;
    while (j <= dim && ++idx[j] == (j == 0 ? nt : n)) idx[j++] = 0;
    if (j > dim) break;
  }
  return worst;
}

double verify_pde_residual(const KernelEntry& e) { return verify_pde_residual(e, default_residual_grid(e)); }

std::vector<double> default_normalization_times(const KernelEntry& e) {
  std::vector<double> ts{0.01, 0.1, 1.0};
  if (std::isfinite(e.normalization_t_max)) ts.back() = std::min(1.0, 0.64 * e.normalization_t_max);
  return ts;
}

std::vector<NormalizationPoint> verify_normalization(const KernelEntry& e, const std::vector<double>& taus,
                                                     std::vector<double> point) {
  const bool over_space = e.normalization.over == Normalization::Over::Space;
  const int dim = over_space ? e.dim() : static_cast<int>(e.source.size());
  if (point.empty()) point = e.default_source;
  const Compiler C{slots_of(e), {}};
  Compiled K = C(e.K), w = C(e.normalization.weight);
  std::optional<Compiled> target;
  if (e.normalization.target) target = C(*e.normalization.target);
  const KernelWindow& win = over_space ? e.space_window : e.source_window;
  std::vector<NormalizationPoint> out;
  for (double tau : taus) {
    Point p = over_space ? Point(e, e.t_start + tau, {}, point) : Point(e, e.t_start + tau, point, {});
    auto axes = windows(e, win, p, dim, dim == 1 ? kSpan : kTensorSpan, C);
    auto f = [&](const double* z) {
      Point q = p;
      for (int i = 0; i < dim; ++i) (over_space ? q.x(i) : q.y(i)) = z[i];
      return K(q.v.data()) * w(q.v.data());
    };
    NormalizationPoint np;
    np.tau = tau;
    np.value = integrate_window(f, axes, win.logarithmic);
    if (target) {
      np.target = (*target)(p.v.data());
      np.deviation = std::abs(np.value - np.target);
    }
    out.push_back(np);
  }
  return out;
}

TestFunction gaussian_bump(const std::vector<double>& center, double width) {
  std::ostringstream label;
  label << "gaussian(" << joined([&] {
    std::vector<std::string> s;
    for (double c : center) s.push_back(fmt(c, 6));
    return s;
  }(), ", ") << "; " << fmt(width, 6) << ")";
  return TestFunction{label.str(),
                      [center, width](const double* x) {
                        double r2 = 0.0;
                        for (std::size_t i = 0; i < center.size(); ++i) r2 += (x[i] - center[i]) * (x[i] - center[i]);
                        return std::exp(-r2 / (2.0 * width * width));
                      },
                      1.0};
}

TestFunction constant_function(double value, int) {
  return TestFunction{"constant(" + fmt(value, 6) + ")", [value](const double*) { return value; }, std::abs(value)};
}

bool DeltaLimitReport::monotone() const {
  for (std::size_t i = 1; i < deviations.size(); ++i)
    if (deviations[i] > deviations[i - 1]) return false;
  return true;
}

std::vector<DeltaLimitReport> verify_delta_limit(const KernelEntry& e, std::vector<double> source,
                                                 const std::vector<TestFunction>& phis,
                                                 const std::vector<double>& taus) {
  if (source.empty()) source = e.default_source;
  const int dim = e.dim();
  std::vector<double> at(dim, 0.0);
  for (int i = 0; i < dim && i < static_cast<int>(source.size()); ++i) at[i] = source[i];
  const Compiler C{slots_of(e), {}};
  Compiled K = C(e.K);
  const bool weighted = e.normalization.over == Normalization::Over::Space;
  Compiled w = C(weighted ? e.normalization.weight : Expr(1));
  std::vector<DeltaLimitReport> out;
  for (const auto& phi : phis) {
    DeltaLimitReport r;
    r.label = phi.label;
    r.sup = phi.sup;
    const double target = phi.phi(at.data());
    for (double tau : taus) {
      Point p(e, e.t_start + tau, {}, source);
      auto axes = windows(e, e.space_window, p, dim, dim == 1 ? kSpan : kTensorSpan, C);
      auto f = [&](const double* z) {
        Point q = p;
        for (int i = 0; i < dim; ++i) q.x(i) = z[i];
        return K(q.v.data()) * w(q.v.data()) * phi.phi(z);
      };
      r.taus.push_back(tau);
      r.deviations.push_back(std::abs(integrate_window(f, axes, e.space_window.logarithmic) - target));
    }
    out.push_back(r);
  }
  return out;
}

double verify_semigroup(const KernelEntry& e, unsigned seed, int count) {
  if (e.dim() != 1 || e.source.size() != 1) throw ConstraintViolation("semigroup check needs a 1D kernel with a source");
  const Compiler C{slots_of(e), {}};
  Compiled K = C(e.K);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> pos(-1.0, 1.0), dt(0.1, 1.0);
  double worst = 0.0;
  for (int i = 0; i < count; ++i) {
    const double x = pos(rng), y = pos(rng), t = dt(rng), s = dt(rng);
    Point a(e, e.t_start + s, {}, {y});
    Point b(e, e.t_start + t, {x}, {});
    auto wa = windows(e, e.space_window, a, 1, kSpan, C)[0];
    auto wb = windows(e, e.source_window, b, 1, kSpan, C)[0];
    const double lo = std::min(wa.lo, wb.lo), hi = std::max(wa.hi, wb.hi);
    auto f = [&](double z) {
      double u[3] = {e.t_start + t, x, z};
      double v[3] = {e.t_start + s, z, y};
      return K(u) * K(v);
    };
    double lhs = quad::integrate_split(f, lo, hi, {wa.center, wb.center}, tight());
    double w[3] = {e.t_start + t + s, x, y};
    double rhs = K(w);
    worst = std::max(worst, std::abs(lhs - rhs) / std::abs(rhs));
  }
  return worst;
}

namespace {

// log of a product of powers and exponentials, kept in log form.
Expr log_form(const Expr& e) {
  switch (e.kind()) {
    case Kind::Mul: {
      std::vector<Expr> terms;
      for (const auto& f : e.args()) terms.push_back(log_form(f));
      return add(terms);
    }
    case Kind::Pow: return e.arg(1) * log_form(e.arg(0));
    case Kind::Exp: return e.arg(0);
    default: return log(e);
  }
}

}  // namespace

std::vector<double> varadhan_errors(const KernelEntry& e, double x, const std::vector<double>& taus) {
  Compiled logk(log_form(e.K), slots_of(e));
  std::vector<double> out;
  for (double tau : taus) {
    Point p(e, e.t_start + tau, {x}, std::vector<double>(e.source.size(), 0.0));
    out.push_back(std::abs(-4.0 * tau * logk(p.v.data()) - x * x) / (x * x));
  }
  return out;
}

bool KernelReport::normalization_ok() const {
  if (!normalization_claimed) return true;
  for (const auto& p : normalization)
    if (!(p.deviation <= normalization_tol)) return false;
  return true;
}

bool KernelReport::delta_ok() const {
  for (const auto& d : delta)
    if (!d.ok()) return false;
  return true;
}

KernelReport verify_entry(const KernelEntry& e) {
  KernelReport r;
  r.name = e.name;
  r.equation = e.equation.text();
  r.kernel_text = to_string(e.K);
  r.notes = e.notes;
  r.residual = verify_pde_residual(e);
  r.normalization_claimed = e.normalization.target.has_value();
  r.normalization_tol = e.name == "heat_1d" ? 1e-8 : 1e-6;
  r.normalization = verify_normalization(e, default_normalization_times(e));
  std::vector<double> at = e.default_source;
  if (at.empty()) at.assign(e.dim(), 0.0);
  r.delta = verify_delta_limit(e, e.default_source, {gaussian_bump(at, 1.0)});
  return r;
}

bool Heat2dVariant::passes() const { return fd_residual <= 1e-4 && delta.ok(); }

KernelEntry heat_2d_variant(bool factor_four, const Bindings& constants) {
  Bindings k = merged({{"t0", 0.5}}, constants, "heat_2d_timedep");
  KernelEntry e = heat_2d(k, factor_four);
  e.name = factor_four ? "heat_2d_timedep" : "heat_2d_timedep_without_4";
  e.constants = k;
  return e;
}

double fd_residual_2d(const KernelEntry& e, int nx, int ny, int nt) {
  const Compiler C{slots_of(e), {}};
  Compiled K = C(e.K), ax = C(e.equation.diffusion[0]), ay = C(e.equation.diffusion[1]);
  const double x0 = e.default_source[0], y0 = e.default_source[1];
  const Interval X{x0 - 1.5, x0 + 1.5}, Y{y0 - 1.5, y0 + 1.5}, T{e.t_start + 0.2, e.t_start + 1.0};
  const double hx = 1e-2, hy = 1e-2, ht = 1e-3;
  auto k = [&](double t, double x, double y) {
    double v[5] = {t, x, y, x0, y0};
    return K(v);
  };
  // Fourth-order central differences.
  auto d1 = [](auto f, double h) { return (-f(2 * h) + 8 * f(h) - 8 * f(-h) + f(-2 * h)) / (12 * h); };
  auto d2 = [](auto f, double h) {
    return (-f(2 * h) + 16 * f(h) - 30 * f(0.0) + 16 * f(-h) - f(-2 * h)) / (12 * h * h);
  };
  std::vector<double> res, scale;
  for (int it = 0; it < nt; ++it)
    for (int ix = 0; ix < nx; ++ix)
      for (int iy = 0; iy < ny; ++iy) {
        double t = T.lo + (T.hi - T.lo) * it / (nt - 1);
        double x = X.lo + (X.hi - X.lo) * ix / (nx - 1);
        double y = Y.lo + (Y.hi - Y.lo) * iy / (ny - 1);
        double v[5] = {t, x, y, x0, y0};
        double kt = d1([&](double h) { return k(t + h, x, y); }, ht);
        double kxx = ax(v) * d2([&](double h) { return k(t, x + h, y); }, hx);
        double kyy = ay(v) * d2([&](double h) { return k(t, x, y + h); }, hy);
        res.push_back(std::abs(kt - kxx - kyy));
        scale.push_back(std::abs(kt) + std::abs(kxx) + std::abs(kyy));
      }
  const double floor = 1e-3 * *std::max_element(scale.begin(), scale.end());
  double worst = 0.0;
  for (std::size_t i = 0; i < res.size(); ++i) worst = std::max(worst, res[i] / std::max(scale[i], floor));
  return worst;
}

Heat2dResolution resolve_heat_2d(const Bindings& constants) {
  Heat2dResolution r;
  for (bool four : {true, false}) {
    KernelEntry e = heat_2d_variant(four, constants);
    Heat2dVariant v;
    v.factor_four = four;
    v.fd_residual = fd_residual_2d(e);
    v.normalization = verify_normalization(e, {0.5})[0].value;
    v.delta = verify_delta_limit(e, e.default_source, {gaussian_bump(e.default_source, 1.0)})[0];
    (four ? r.with_four : r.without_four) = v;
  }
  r.chosen_factor_four = r.with_four.passes() || !r.without_four.passes();
  return r;
}

HeatPolynomial heat_polynomial(int n) {
  if (n < 0 || n > 30) throw ConstraintViolation("heat_polynomial requires 0 <= n <= 30");
  using boost::multiprecision::cpp_int;
  auto factorial = [](int m) {
    cpp_int f = 1;
    for (int i = 2; i <= m; ++i) f *= i;
    return f;
  };
  HeatPolynomial h;
  h.degree = n;
  for (int j = 0; 2 * j <= n; ++j)
    h.terms.push_back({n - 2 * j, j, factorial(n) / (factorial(n - 2 * j) * factorial(j))});
  return h;
}

double HeatPolynomial::operator()(double x, double t) const {
  double s = 0.0;
  for (const auto& term : terms)
    s += term.coefficient.convert_to<double>() * std::pow(x, term.x_power) * std::pow(t, term.t_power);
  return s;
}

Expr HeatPolynomial::expr() const {
  std::vector<Expr> parts;
  const Expr x = Expr::variable("x"), t = Expr::variable("t");
  for (const auto& term : terms) {
    Expr c = term.coefficient <= std::numeric_limits<std::int64_t>::max()
                 ? Expr(term.coefficient.convert_to<std::int64_t>())
                 : Expr::real(term.coefficient.convert_to<double>());
    parts.push_back(c * power(x, Expr(term.x_power)) * power(t, Expr(term.t_power)));
  }
  return add(parts);
}

std::string HeatPolynomial::text() const {
  std::vector<std::string> parts;
  for (const auto& term : terms) {
    std::vector<std::string> f;
    if (term.coefficient != 1 || (term.x_power == 0 && term.t_power == 0)) f.push_back(term.coefficient.str());
    if (term.x_power == 1) f.push_back("x");
    if (term.x_power > 1) f.push_back("x^" + std::to_string(term.x_power));
    if (term.t_power == 1) f.push_back("t");
    if (term.t_power > 1) f.push_back("t^" + std::to_string(term.t_power));
    parts.push_back(joined(f, "*"));
  }
  return joined(parts, " + ");
}

Fn2 associated_function(int n) {
  if (n < 0 || n > 15) throw ConstraintViolation("associated_function requires 0 <= n <= 15");
  HeatPolynomial u = heat_polynomial(n);
  return [u, n](double x, double t) {
    double k = std::exp(-x * x / (4.0 * t)) / std::sqrt(4.0 * std::numbers::pi * t);
    return k * u(x, -t) * std::pow(t, -n);
  };
}

double biorthogonality(int m, int n, double t) {
  HeatPolynomial um = heat_polynomial(m);
  Fn2 vn = associated_function(n);
  const double half = kSpan * std::sqrt(t);
  quad::Options o = tight();
  o.abs_tol = 1e-10 * std::pow(2.0, n) * std::tgamma(n + 1.0);
  return quad::integrate_split([&](double x) { return um(x, -t) * vn(x, t); }, -half, half, {0.0}, o);
}

namespace {

double solution_residual(const Expr& u, const Expr& a, const Expr& c, const Interval& X, const Interval& T) {
  const std::vector<std::string> slots{"t", "x"};
  Compiled U(u, slots), Ut(differentiate(u, "t"), slots), Uxx(differentiate(u, "x", 2), slots), A(a, slots),
      Cc(c, slots);
  double worst = 0.0;
  for (int i = 0; i < 17; ++i)
    for (int j = 0; j < 17; ++j) {
      double v[2] = {T.lo + (T.hi - T.lo) * i / 16.0, X.lo + (X.hi - X.lo) * j / 16.0};
      double ut = Ut(v);
      worst = std::max(worst, std::abs(ut - A(v) * Uxx(v) - Cc(v) * U(v)) / (1.0 + std::abs(ut)));
    }
  return worst;
}

}  // namespace

std::vector<InvariantSolutionCheck> invariant_solution_checks() {
  std::vector<InvariantSolutionCheck> out;
  const Interval X{0.5, 3.0}, T{0.1, 2.0};
  const Expr one(1);
  for (Rational a : {Rational(-3, 2), Rational(-1, 4), Rational(-1), Rational(1, 2), Rational(3, 4)}) {
    const Expr ae(a);
    const Expr mu = simplify(Expr(-2) * (ae + one) * (Expr(2) * ae + one));
    Expr u = P("x^(-(2*a + 1))*t^(2*a + 1/2)*exp(-(x^2)/(4*t))", {});
    u = simplify(substitute(u, "a", ae));
    InvariantSolutionCheck c;
    c.name = "scale-invariant solution, a = " + a.str();
    c.solution = to_string(u);
    c.equation = "u_t = u_xx + (" + to_string(mu) + ")/x^2 u";
    c.residual = solution_residual(u, one, mu / power(Expr::variable("x"), Expr(2)), X, T);
    if (a == Rational(-3, 2)) {
      Expr closed = P("x^2*t^(-5/2)*exp(-(x^2)/(4*t))", {});
      c.constraint_ok = mu.rational() == Rational(-2) && solution_residual(closed, one, P("-2/x^2", {}), X, T) <= 1e-9;
      double worst = 0.0;
      for (double x : {0.7, 1.3, 2.9})
        for (double t : {0.2, 1.1})
          worst = std::max(worst, std::abs(eval(closed, {{"x", x}, {"t", t}}) - eval(u, {{"x", x}, {"t", t}})));
      c.constraint_ok = c.constraint_ok && worst <= 1e-12;
      c.name += " (mu = -2)";
    }
    out.push_back(c);
  }
  {
    InvariantSolutionCheck c;
    c.name = "mu = -2 trigonometric solution";
    Expr u = P("exp(-t)*(c1*(cos(x) - sin(x)/x) + c2*(sin(x) + cos(x)/x))", {{"c1", 0.7}, {"c2", -1.3}});
    c.solution = to_string(u);
    c.equation = "u_t = u_xx - 2/x^2 u";
    c.residual = solution_residual(u, one, P("-2/x^2", {}), X, T);
    out.push_back(c);
  }
  {
    InvariantSolutionCheck c;
    c.name = "heat polynomial u_3";
    Expr u = heat_polynomial(3).expr();
    c.solution = to_string(u);
    c.equation = "u_t = u_xx";
    c.residual = solution_residual(u, one, Expr(0), {-3.0, 3.0}, T);
    out.push_back(c);
  }
  return out;
}

double mehler_transform_ratio_spread(double y) {
  ParabolicEquation eq;
  eq.a = Expr(1);
  eq.b = Expr(0);
  eq.c = P("-(x^2)", {});
  InvariantTriple inv = compute_invariants(eq);
  SymmetryClassification cls = classify(inv);
  HeatTransformOptions opt;
  opt.source_y = y;
  HeatTransform ht = build_heat_transform(cls, inv, opt);
  Fn2 u = map_solution(ht, [](double, double) { return 1.0; });
  KernelEntry m = kernel("mehler_hyperbolic");
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double x : {-1.5, -0.2, 0.9, 2.0})
    for (int i = 0; i < 5; ++i) {
      double t = ht.t_interval.lo + (ht.t_interval.hi - ht.t_interval.lo) * (0.1 + 0.2 * i);
      double ratio = u(x, t) / m.value({x}, t, {y});
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
    }
  return (hi - lo) / std::abs(hi);
}

}  // namespace lps
