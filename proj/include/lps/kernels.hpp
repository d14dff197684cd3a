#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "lps/expr.hpp"
#include "lps/invariants.hpp"

namespace lps {

// u_t = sum_i a_i u_{x_i x_i} + sum_i b_i u_{x_i} + c u.
struct KernelEquation {
  std::vector<std::string> space;
  std::vector<Expr> diffusion;
  std::vector<Expr> drift;
  Expr potential;

  std::string text() const;
  // The one-dimensional equation on `domain`; nullopt for several variables.
  std::optional<ParabolicEquation> parabolic(const Interval& domain) const;
};

// Integration window: centre per axis and a width comparable to sqrt(t).
// Logarithmic windows integrate in log of the variable.
struct KernelWindow {
  std::vector<Expr> center;
  std::vector<Expr> width;
  bool logarithmic = false;
};

struct Normalization {
  enum class Over { Space, Source };
  Over over = Over::Space;
  Expr weight = Expr(1);        // measure density in the integration variables
  std::optional<Expr> target;   // in t and the fixed point; absent when unknown
  bool density = true;          // the entry claims a probability density
};

struct KernelEntry {
  std::string name;
  KernelEquation equation;
  std::vector<std::string> source;  // symbols of the source point
  Expr K;                           // in t, space and source, constants bound
  Bindings constants;
  std::vector<Interval> domain;     // per spatial axis; the source ranges over the same set
  double t_start = 0.0;             // K is singular at t = t_start
  double t_max = std::numeric_limits<double>::infinity();
  double normalization_t_max = std::numeric_limits<double>::infinity();
  std::string validity;
  Normalization normalization;
  KernelWindow space_window;   // in t and the source
  KernelWindow source_window;  // in t and the space point
  std::vector<double> default_source;
  std::string citation;
  std::vector<std::string> notes;

  int dim() const { return static_cast<int>(equation.space.size()); }
  // K at elapsed time tau = t - t_start.
  double value(const std::vector<double>& x, double tau, const std::vector<double>& y) const;
};

const std::vector<std::string>& kernel_names();

// Throws UnknownKernel or ConstraintViolation.
KernelEntry kernel(const std::string& name, const Bindings& constants = {});

struct ResidualGrid {
  Interval tau{0.1, 2.0};
  std::vector<Interval> space;  // default: source +- 3 clipped to the domain
  std::vector<double> source;   // default: entry.default_source
  int n = 9;
  int nt = 9;
};

ResidualGrid default_residual_grid(const KernelEntry& e);

// max |K_t - L K| / (1 + |K_t|) with symbolic derivatives.
double verify_pde_residual(const KernelEntry& e, const ResidualGrid& grid);
double verify_pde_residual(const KernelEntry& e);

struct NormalizationPoint {
  double tau = 0.0;
  double value = 0.0;
  double target = std::numeric_limits<double>::quiet_NaN();
  double deviation = std::numeric_limits<double>::quiet_NaN();
};

// Integral of K over the space (or source) variables at each elapsed time.
// `point` fixes the other variables; the entry default when empty. Throws
// NonconvergentQuadrature.
std::vector<NormalizationPoint> verify_normalization(const KernelEntry& e, const std::vector<double>& taus,
                                                     std::vector<double> point = {});
std::vector<double> default_normalization_times(const KernelEntry& e);

struct TestFunction {
  std::string label;
  std::function<double(const double*)> phi;
  double sup = 1.0;
};

// exp(-|x - c|^2 / (2 w^2)) in the dimension of c.
TestFunction gaussian_bump(const std::vector<double>& center, double width);
TestFunction constant_function(double value, int dim);

struct DeltaLimitReport {
  std::string label;
  std::vector<double> taus;
  std::vector<double> deviations;
  double sup = 1.0;

  bool monotone() const;
  double final_deviation() const { return deviations.empty() ? 0.0 : deviations.back(); }
  bool ok(double factor = 1e-3) const { return monotone() && final_deviation() <= factor * sup; }
};

// |∫ K(x, tau, y) phi(x) w(x) dx - phi(y)| at tau in {1e-2, 1e-3, 1e-4}, with w
// the normalization weight when normalizing over space.
std::vector<DeltaLimitReport> verify_delta_limit(const KernelEntry& e, std::vector<double> source,
                                                 const std::vector<TestFunction>& phis,
                                                 const std::vector<double>& taus = {1e-2, 1e-3, 1e-4});

// |∫K(x,t,z)K(z,s,y)dz - K(x,t+s,y)| / K(x,t+s,y), worst over `count` seeded draws.
double verify_semigroup(const KernelEntry& e, unsigned seed = 7, int count = 5);

// Relative error of -4 t ln K(x, t, 0) against x^2.
std::vector<double> varadhan_errors(const KernelEntry& e, double x, const std::vector<double>& taus);

// Residual, normalization and delta-limit results for one entry.
struct KernelReport {
  std::string name;
  std::string equation;
  std::string kernel_text;
  double residual = 0.0;
  double residual_tol = 1e-9;
  std::vector<NormalizationPoint> normalization;
  double normalization_tol = 1e-6;
  bool normalization_claimed = true;
  std::vector<DeltaLimitReport> delta;
  std::vector<std::string> notes;

  bool residual_ok() const { return residual <= residual_tol; }
  bool normalization_ok() const;
  bool delta_ok() const;
  bool ok() const { return residual_ok() && normalization_ok() && delta_ok(); }
};

KernelReport verify_entry(const KernelEntry& e);

// The two candidate exponents of the two-dimensional kernel, with and without
// the factor 4, judged by a finite-difference residual on a 21 x 21 x 11 grid
// and by the delta limit.
struct Heat2dVariant {
  bool factor_four = true;
  double fd_residual = 0.0;
  double normalization = 0.0;
  DeltaLimitReport delta;
  bool passes() const;
};

struct Heat2dResolution {
  Heat2dVariant with_four;
  Heat2dVariant without_four;
  bool chosen_factor_four = true;
};

KernelEntry heat_2d_variant(bool factor_four, const Bindings& constants = {});
double fd_residual_2d(const KernelEntry& e, int nx = 21, int ny = 21, int nt = 11);
Heat2dResolution resolve_heat_2d(const Bindings& constants = {});

// (max - min)/|max| of u/K over a grid in (x, t), where u is u~ = 1 mapped
// through the transform of u_t = u_xx - x^2 u with source y and K is the
// hyperbolic Mehler kernel.
double mehler_transform_ratio_spread(double y);

struct HeatPolynomial {
  struct Term {
    int x_power;
    int t_power;
    boost::multiprecision::cpp_int coefficient;
  };
  int degree = 0;
  std::vector<Term> terms;  // descending powers of x

  double operator()(double x, double t) const;
  Expr expr() const;
  std::string text() const;
};

// u_n = n! sum_j x^{n-2j} t^j / ((n-2j)! j!), 0 <= n <= 30.
HeatPolynomial heat_polynomial(int n);

// v_n = K(x, t) u_n(x, -t) t^{-n} with K the heat kernel at the origin, n <= 15.
Fn2 associated_function(int n);

// ∫ u_m(x, -t) v_n(x, t) dx.
double biorthogonality(int m, int n, double t = 1.0);

struct InvariantSolutionCheck {
  std::string name;
  std::string solution;
  std::string equation;
  double residual = 0.0;
  bool constraint_ok = true;
  bool ok(double tol = 1e-9) const { return constraint_ok && residual <= tol; }
};

std::vector<InvariantSolutionCheck> invariant_solution_checks();

}  // namespace lps
