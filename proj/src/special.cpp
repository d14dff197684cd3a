#include "lps/special.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "lps/errors.hpp"
#include "lps/expr.hpp"

namespace lps::special {

namespace {

// Sign of Gamma(x) for x not a non-positive integer.
int gamma_sign(double x) {
  if (x > 0) return 1;
  return (static_cast<long>(std::floor(x)) % 2 == 0) ? 1 : -1;
}

bool nonpositive_integer(double x) { return x <= 0 && std::floor(x) == x; }

// Power series in log space; every term carries the e^{-z} scale.
double series_scaled(double nu, double z) {
  if (z == 0.0) {
    if (nu == 0.0) return 1.0;
    if (nu > 0.0) return 0.0;
    throw DomainError("I_nu(0) is unbounded for negative non-integer order");
  }
  const double lz = std::log(0.5 * z);
  double sum = 0.0;
  double peak = 0.0;
  for (int k = 0; k < 5000; ++k) {
    double g = k + nu + 1.0;
    if (nonpositive_integer(g)) continue;
    double lt = (2.0 * k + nu) * lz - std::lgamma(k + 1.0) - std::lgamma(g) - z;
    double t = gamma_sign(g) * std::exp(lt);
    sum += t;
    peak = std::max(peak, std::abs(t));
    if (k > 0.5 * z + 2 && std::abs(t) <= 1e-17 * std::max(std::abs(sum), peak)) break;
  }
  return sum;
}

// Large-argument expansion; NaN when the terms stop decreasing.
double asymptotic_scaled(double nu, double z) {
  const double m = 4.0 * nu * nu;
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 60; ++k) {
    double odd = 2.0 * k - 1.0;
    double next = -term * (m - odd * odd) / (k * 8.0 * z);
    if (std::abs(next) > std::abs(term)) return std::numeric_limits<double>::quiet_NaN();
    term = next;
    sum += term;
    if (std::abs(term) < 1e-15 * std::abs(sum)) return sum / std::sqrt(2.0 * std::numbers::pi * z);
  }
  return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

double bessel_ie(double nu, double z) {
  if (!(z >= 0)) throw DomainError("Bessel argument must be non-negative");
  if (nu < 0 && std::floor(nu) == nu) nu = -nu;
  if (z > 30.0) {
    double a = asymptotic_scaled(nu, z);
    if (std::isfinite(a) && (nu >= 0 || z > 350.0)) return a;
  }
  return series_scaled(nu, z);
}

double bessel_i(double nu, double z) {
  if (!(std::abs(nu) <= 20.0) || !(z >= 0.0) || !(z <= 50.0))
    throw OutOfValidatedRange("bessel_i requires |nu| <= 20 and 0 <= z <= 50");
  return bessel_ie(nu, z) * std::exp(z);
}

}  // namespace lps::special

namespace lps {

double bessel_i_value(double nu, double z) { return special::bessel_ie(nu, z); }

}  // namespace lps
