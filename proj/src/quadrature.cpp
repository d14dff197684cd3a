#include "lps/quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "lps/errors.hpp"

namespace lps::quad {

Result integrate(const std::function<double(double)>& f, double a, double b, const Options& opt) {
  if (a == b) return {};
  double err = 0.0;
  double v = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, opt.max_depth,
                                                                         opt.rel_tol, &err);
  double tol = std::max(opt.abs_tol, opt.rel_tol * std::abs(v));
  if (!std::isfinite(v) || err > opt.slack * tol) {
    std::ostringstream ss;
    ss << "quadrature on [" << a << ", " << b << "] did not converge (estimate " << v << ", error " << err << ")";
    throw NonconvergentQuadrature(ss.str());
  }
  return {v, err};
}

double integrate_value(const std::function<double(double)>& f, double a, double b, const Options& opt) {
  return integrate(f, a, b, opt).value;
}

double integrate_split(const std::function<double(double)>& f, double a, double b,
                       std::vector<double> breaks, const Options& opt) {
  std::vector<double> pts{a};
  for (double c : breaks)
    if (c > a && c < b) pts.push_back(c);
  pts.push_back(b);
  std::sort(pts.begin() + 1, pts.end() - 1);
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) s += integrate(f, pts[i], pts[i + 1], opt).value;
  return s;
}

Rule gauss_legendre(int n) {
  Rule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.nodes[i] = -x;
    r.nodes[n - 1 - i] = x;
    r.weights[i] = w;
    r.weights[n - 1 - i] = w;
  }
  return r;
}

Rule composite(double a, double b, int panels, int points) {
  Rule base = gauss_legendre(points);
  Rule r;
  double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    double lo = a + p * h;
    for (int i = 0; i < points; ++i) {
      r.nodes.push_back(lo + 0.5 * h * (base.nodes[i] + 1.0));
      r.weights.push_back(0.5 * h * base.weights[i]);
    }
  }
  return r;
}

double tensor(const std::function<double(const double*)>& f, const std::vector<Rule>& axes) {
  const std::size_t d = axes.size();
  std::vector<std::size_t> idx(d, 0);
  std::vector<double> pt(d);
  double total = 0.0;
  if (d == 0) return 0.0;
  while (true) {
    double w = 1.0;
    for (std::size_t k = 0; k < d; ++k) {
      pt[k] = axes[k].nodes[idx[k]];
      w *= axes[k].weights[idx[k]];
    }
    total += w * f(pt.data());
    std::size_t k = 0;
    while (k < d && ++idx[k] == axes[k].nodes.size()) idx[k++] = 0;
    if (k == d) break;
  }
  return total;
}

}  // namespace lps::quad
