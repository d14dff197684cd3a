#pragma once

#include <functional>
#include <vector>

namespace lps::quad {

struct Options {
  double abs_tol = 1e-10;
  double rel_tol = 1e-12;
  unsigned max_depth = 18;
  // Accept results whose error estimate is within this factor of the target.
  double slack = 100.0;
};

struct Result {
  double value = 0.0;
  double error = 0.0;
};

// Adaptive Gauss-Kronrod (15 points). Infinite limits are mapped by the
// underlying library. Throws NonconvergentQuadrature when the error estimate
// exceeds slack * max(abs_tol, rel_tol * |value|).
Result integrate(const std::function<double(double)>& f, double a, double b, const Options& opt = {});

double integrate_value(const std::function<double(double)>& f, double a, double b, const Options& opt = {});

// Integral over [a, b] split at the listed interior points.
double integrate_split(const std::function<double(double)>& f, double a, double b,
                       std::vector<double> breaks, const Options& opt = {});

struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// n-point Gauss-Legendre rule on [-1, 1] by Newton iteration on P_n.
Rule gauss_legendre(int n);

// Composite Gauss-Legendre rule on [a, b] with `panels` equal panels.
Rule composite(double a, double b, int panels, int points);

// Tensor-product integral over a box, one rule per axis.
double tensor(const std::function<double(const double*)>& f, const std::vector<Rule>& axes);

}  // namespace lps::quad
