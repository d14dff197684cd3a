#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "lps/classify.hpp"
#include "lps/invariants.hpp"

namespace lps {

enum class MobiusBranch { Rational, Trigonometric, Hyperbolic };

const char* branch_name(MobiusBranch b);

// T(t) = (k1 W1 + k2 W2) / (k3 W1 + k4 W2) with (W1, W2) = (t, 1),
// (sin 2kt, cos 2kt) or (e^{2kt}, e^{-2kt}) for c2 = 0, k^2, -k^2.
// Solves {T; t} = 8 c2.
struct MobiusMap {
  MobiusBranch branch = MobiusBranch::Rational;
  double c2 = 0.0;
  double kappa = 0.0;
  std::array<double, 4> k{1.0, 0.0, 0.0, 1.0};
  Expr T;  // in t
  Expr Tdot;
  Expr Tddot;

  double value(double t) const;
  double derivative(double t, int order) const;
  double schwarzian(double t) const;

 private:
  friend MobiusMap make_mobius(double c2, const std::array<double, 4>& k, const std::optional<Expr>& exact_c2);
  std::array<Compiled, 4> d_;
};

MobiusMap make_mobius(double c2, const std::array<double, 4>& k,
                      const std::optional<Expr>& exact_c2 = std::nullopt);

// Default constants: T = t, tan 2kt (shifted to avoid poles) or e^{4kt}/(4k).
// With `source`, T = -1/t, -cot(2kt)/(2k) or -coth(2kt)/(2k), singular at t = 0.
// Throws SingularOnInterval when no admissible choice exists.
MobiusMap solve_schwarzian(double c2, const Interval& t_interval, bool source = false,
                           const std::optional<Expr>& exact_c2 = std::nullopt);

// (0.1, 1), shrunk for c2 != 0 to keep T within a branch of tan 2kt and
// e^{4kt} moderate.
Interval default_time_interval(double c2);

// Pole and monotonicity check on the interval.
bool admissible(const MobiusMap& m, const Interval& t_interval);

// max |{T;t} - 8 c2| at 16 interior times.
double schwarzian_residual(const MobiusMap& m, const Interval& t_interval);

struct HeatTransformOptions {
  std::optional<Interval> t_interval;  // default_time_interval(c2) when absent
  std::optional<std::array<double, 4>> mobius;
  // Homogeneous part of omega on the basis (1, t), (cosh, sinh) or (cos, sin).
  double omega_h1 = 0.0;
  double omega_h2 = 0.0;
  // Source point y: omega(0) = -I(y) and T singular at t = 0.
  std::optional<double> source_y;
  double nu0 = 1.0;
  bool quadrature_nu = false;
};

// u(x, t) = exp(G/2) nu(t) exp(A(t) I^2 + B(t) I) u~(T(t), x~(x, t)),
// x~ = sqrt(T') (I + omega), A = T''/(8T'), B = (omega' + T'' omega/(2T'))/2,
// nu = nu0 T'^{1/4} exp(A omega^2 + 1/4 ∫(omega'^2 - 4 c2 omega^2 + 4 c0)),
// where T and omega solve {T;t} = 8 c2 and omega'' + 4 c2 omega = 2 c1.
class HeatTransform {
 public:
  double c2 = 0.0;
  double c1 = 0.0;
  double c0 = 0.0;
  MobiusMap mobius;
  Interval t_interval;
  Expr omega;  // in t
  Expr omega_dot;
  std::optional<Expr> log_nu;  // closed form, absent in quadrature mode
  Expr x_tilde;                // in (x, t)
  Expr log_multiplier;         // G/2 + A I^2 + B I, in (x, t)
  InvariantTriple inv;

  double T(double t) const { return mobius.value(t); }
  double Tdot(double t) const { return mobius.derivative(t, 1); }
  double omega_at(double t) const;
  double omega_ddot_at(double t) const;
  double nu(double t) const;
  double log_nu_at(double t) const;
  double xt(double x, double t) const;
  double multiplier(double x, double t) const;

  // Closed-form text when I, G and nu are all symbolic.
  std::optional<std::string> text() const;

  struct Sample {
    double t, T, Tdot, omega, nu;
  };
  std::vector<Sample> table(int n = 11) const;

 private:
  friend HeatTransform build_heat_transform(const SymmetryClassification&, const InvariantTriple&,
                                            const HeatTransformOptions&);
  Compiled omega_c_, omega_ddot_c_, log_nu_c_, xt_c_, logm_c_;
  std::vector<double> nu_t_, nu_v_, nu_d_;
};

// Throws NotReducible unless cls.dim == 6.
HeatTransform build_heat_transform(const SymmetryClassification& cls, const InvariantTriple& inv,
                                   const HeatTransformOptions& opt = {});

// u(x, t) from a heat solution u~(x~, t~).
Fn2 map_solution(const HeatTransform& ht, const Fn2& u_tilde);

// max |omega'' + 4 c2 omega - 2 c1| at 16 times.
double omega_residual(const HeatTransform& ht);
// max deviation of d/dt[log nu - log(T')/4 - A omega^2] from the integrand/4.
double nu_residual(const HeatTransform& ht);

struct PullbackGrid {
  int nx = 21;
  int nt = 21;
  std::optional<Interval> x_range;  // default: the analysis window
  std::optional<Interval> t_range;  // default: transform interval inset by 5%
};

struct PullbackReport {
  double max_relative = 0.0;
  double richardson_gap = 0.0;  // max relative change between steps h and 2h
  int points = 0;
};

// Residual of u_t - a u_xx - b u_x - c u, fourth-order central differences,
// relative to |u_t| + |a u_xx| + |b u_x| + |c u| + |a u| / L^2 at each point
// (L the length of the x range), floored at 1e-3 of its grid maximum.
PullbackReport pullback_residual(const ParabolicEquation& eq, const Fn2& u, const Interval& x_range,
                                 const Interval& t_range, int nx = 21, int nt = 21);
PullbackReport pullback_residual(const ParabolicEquation& eq, const HeatTransform& ht, const Fn2& u_tilde,
                                 const PullbackGrid& grid = {});

// The reference heat solutions 1, x, x^2 + 2t, exp(x + t) as u~(x~, t~).
std::vector<std::pair<std::string, Fn2>> reference_heat_solutions();

}  // namespace lps
