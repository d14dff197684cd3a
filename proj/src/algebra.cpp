#include "lps/algebra.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <set>

#include "lps/errors.hpp"

namespace lps {

namespace {

// ---- expansion -------------------------------------------------------------

std::vector<Expr> terms_of(const Expr& e) {
  if (e.kind() == Kind::Add) return e.args();
  return {e};
}

Expr distribute(const std::vector<Expr>& factors) {
  std::vector<Expr> acc{Expr(1)};
  for (const auto& f : factors) {
    std::vector<Expr> next;
    for (const auto& a : acc)
      for (const auto& t : terms_of(f)) next.push_back(a * t);
    acc = terms_of(add(std::move(next)));
  }
  return add(std::move(acc));
}

// ---- rational-function normal form ----------------------------------------

struct Undecided {};

using Mono = std::vector<std::pair<int, int>>;
using Poly = std::map<Mono, Rational>;

struct RatFn {
  Poly num;
  Poly den;
};

constexpr std::size_t kMaxTerms = 4000;

Rational checked(std::optional<Rational> r) {
  if (!r) throw Undecided{};
  return *r;
}

Mono mono_mul(const Mono& a, const Mono& b) {
  Mono out;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) {
      out.push_back(a[i++]);
    } else if (i == a.size() || b[j].first < a[i].first) {
      out.push_back(b[j++]);
    } else {
      out.emplace_back(a[i].first, a[i].second + b[j].second);
      ++i;
      ++j;
    }
  }
  return out;
}

Poly poly_const(const Rational& r) {
  Poly p;
  if (!r.is_zero()) p[{}] = r;
  return p;
}

Poly poly_add(const Poly& a, const Poly& b) {
  Poly out = a;
  for (const auto& [m, c] : b) {
    auto it = out.find(m);
    if (it == out.end()) {
      out.emplace(m, c);
    } else {
      it->second = checked(Rational::checked_add(it->second, c));
      if (it->second.is_zero()) out.erase(it);
    }
  }
  if (out.size() > kMaxTerms) throw Undecided{};
  return out;
}

Poly poly_mul(const Poly& a, const Poly& b) {
  Poly out;
  for (const auto& [ma, ca] : a) {
    for (const auto& [mb, cb] : b) {
      Mono m = mono_mul(ma, mb);
      Rational c = checked(Rational::checked_mul(ca, cb));
      auto it = out.find(m);
      if (it == out.end()) {
        out.emplace(std::move(m), c);
      } else {
        it->second = checked(Rational::checked_add(it->second, c));
        if (it->second.is_zero()) out.erase(it);
      }
    }
    if (out.size() > kMaxTerms) throw Undecided{};
  }
  return out;
}

Poly poly_pow(const Poly& p, std::int64_t n) {
  Poly out = poly_const(Rational(1));
  for (std::int64_t i = 0; i < n; ++i) out = poly_mul(out, p);
  return out;
}

bool same_poly(const Poly& a, const Poly& b) { return a == b; }

class Normalizer {
 public:
  RatFn convert(const Expr& e) {
    switch (e.kind()) {
      case Kind::Number:
        if (!e.num().exact) throw Undecided{};
        return {poly_const(e.num().q), poly_const(Rational(1))};
      case Kind::Add: {
        RatFn acc{Poly{}, poly_const(Rational(1))};
        for (const auto& t : e.args()) {
          RatFn r = convert(t);
          if (same_poly(acc.den, r.den)) {
            acc.num = poly_add(acc.num, r.num);
          } else {
            acc.num = poly_add(poly_mul(acc.num, r.den), poly_mul(r.num, acc.den));
            acc.den = poly_mul(acc.den, r.den);
          }
        }
        return acc;
      }
      case Kind::Mul: {
        RatFn acc{poly_const(Rational(1)), poly_const(Rational(1))};
        for (const auto& f : e.args()) {
          RatFn r = convert(f);
          acc.num = poly_mul(acc.num, r.num);
          acc.den = poly_mul(acc.den, r.den);
        }
        return acc;
      }
      case Kind::Pow: {
        auto q = e.arg(1).rational();
        if (q && q->is_integer() && std::abs(q->num()) <= 32) {
          RatFn b = convert(e.arg(0));
          std::int64_t n = q->num();
          if (n >= 0) return {poly_pow(b.num, n), poly_pow(b.den, n)};
          if (b.num.empty()) throw Undecided{};
          return {poly_pow(b.den, -n), poly_pow(b.num, -n)};
        }
        return atom(e);
      }
      default:
        return atom(e);
    }
  }

 private:
  RatFn atom(const Expr& e) {
    int id = -1;
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
      if (atoms_[i] == e) {
        id = static_cast<int>(i);
        break;
      }
    }
    if (id < 0) {
      id = static_cast<int>(atoms_.size());
      atoms_.push_back(e);
    }
    Poly p;
    p[{{id, 1}}] = Rational(1);
    return {p, poly_const(Rational(1))};
  }

  std::vector<Expr> atoms_;
};

// ---- sampling --------------------------------------------------------------

struct Sampler {
  const SampleSpec& spec;
  std::vector<std::string> free;
  std::mt19937_64 rng;

  Sampler(const SampleSpec& s, const std::vector<Expr>& exprs) : spec(s), rng(s.seed) {
    std::set<std::string> names;
    for (const auto& e : exprs)
      for (const auto& n : free_symbols(e))
        if (n != s.variable && !s.constants.count(n)) names.insert(n);
    free.assign(names.begin(), names.end());
  }

  Bindings point(double x) {
    Bindings b = spec.constants;
    b[spec.variable] = x;
    std::uniform_real_distribution<double> u(0.5, 1.5);
    for (const auto& n : free) b[n] = u(rng);
    return b;
  }

  double random_x() {
    std::uniform_real_distribution<double> u(spec.lo, spec.hi);
    return u(rng);
  }
};

double magnitude(const Expr& e, const Bindings& b, double value) {
  if (e.kind() != Kind::Add) return std::abs(value);
  double s = 0;
  for (const auto& t : e.args()) s += std::abs(eval(t, b));
  return s;
}

}  // namespace

Expr expand(const Expr& e) {
  switch (e.kind()) {
    case Kind::Add: {
      std::vector<Expr> t;
      for (const auto& a : e.args()) t.push_back(expand(a));
      return add(std::move(t));
    }
    case Kind::Mul: {
      std::vector<Expr> f;
      for (const auto& a : e.args()) f.push_back(expand(a));
      return distribute(f);
    }
    case Kind::Pow: {
      Expr b = expand(e.arg(0));
      auto q = e.arg(1).rational();
      if (b.kind() == Kind::Add && q && q->is_integer() && q->num() >= 2 && q->num() <= 16) {
        return distribute(std::vector<Expr>(static_cast<std::size_t>(q->num()), b));
      }
      if (b.kind() == Kind::Add && q && q->is_integer() && q->num() <= -2 && q->num() >= -16) {
        return power(distribute(std::vector<Expr>(static_cast<std::size_t>(-q->num()), b)), Expr(-1));
      }
      return power(b, e.arg(1));
    }
    default:
      return e;
  }
}

std::optional<bool> rational_zero_test(const Expr& e) {
  try {
    Normalizer n;
    RatFn r = n.convert(e);
    if (r.num.empty()) return true;
    if (!is_transcendental(e)) return false;
    return std::nullopt;
  } catch (const Undecided&) {
    return std::nullopt;
  }
}

std::vector<double> deterministic_points(double lo, double hi, int n) {
  std::vector<double> pts;
  for (int k = 0; k < n; ++k) {
    double c = std::cos(std::numbers::pi * (2.0 * k + 1.0) / (2.0 * n));
    pts.push_back(0.5 * (lo + hi) + 0.5 * (hi - lo) * c);
  }
  return pts;
}

bool is_identically_zero(const Expr& e0, const SampleSpec& spec) {
  Expr e = simplify(e0);
  if (e.is_number()) return e.num().is_zero() || std::abs(e.num().value()) <= spec.tolerance;
  if (auto r = rational_zero_test(e)) {
    if (*r) return true;
    bool has_float = false;
    std::function<void(const Expr&)> scan = [&](const Expr& s) {
      if (s.is_number() && !s.num().exact) has_float = true;
      for (const auto& a : s.args()) scan(a);
    };
    scan(e);
    if (!has_float) return false;
  }
  Sampler s(spec, {e});
  auto test = [&](double x, int& valid) {
    Bindings b = s.point(x);
    double v;
    double m;
    try {
      v = eval(e, b);
      m = magnitude(e, b, v);
    } catch (const DomainError&) {
      return true;
    }
    ++valid;
    return std::abs(v) <= spec.tolerance * std::max(1.0, m);
  };
  int valid = 0;
  for (double x : deterministic_points(spec.lo, spec.hi))
    if (!test(x, valid)) return false;
  if (valid < 5) return false;
  valid = 0;
  for (int i = 0; i < 50; ++i)
    if (!test(s.random_x(), valid)) return false;
  return valid >= 25;
}

namespace {

std::optional<std::vector<Expr>> structural_match(const Expr& e, const std::string& v, int degree) {
  std::vector<std::vector<Expr>> parts(static_cast<std::size_t>(degree) + 1);
  for (const auto& t : terms_of(expand(e))) {
    std::vector<Expr> coeff;
    int k = 0;
    std::vector<Expr> factors = t.kind() == Kind::Mul ? t.args() : std::vector<Expr>{t};
    for (const auto& f : factors) {
      if (f.is_symbol() && f.name() == v) {
        k += 1;
      } else if (f.kind() == Kind::Pow && f.arg(0).is_symbol() && f.arg(0).name() == v) {
        auto q = f.arg(1).rational();
        if (!q || !q->is_integer()) return std::nullopt;
        k += static_cast<int>(q->num());
      } else if (f.depends_on(v)) {
        return std::nullopt;
      } else {
        coeff.push_back(f);
      }
    }
    if (k < 0 || k > degree) return std::nullopt;
    parts[static_cast<std::size_t>(k)].push_back(mul(std::move(coeff)));
  }
  std::vector<Expr> out;
  for (auto& p : parts) out.push_back(add(std::move(p)));
  return out;
}

}  // namespace

std::optional<std::vector<Expr>> match_polynomial(const Expr& e0, const Expr& var, int degree,
                                                  const SampleSpec& spec) {
  if (degree < 0) return std::nullopt;
  Expr e = simplify(e0);
  const std::string& pivot = var.is_symbol() ? var.name() : spec.variable;
  if (!e.depends_on(pivot)) {
    std::vector<Expr> out(static_cast<std::size_t>(degree) + 1, Expr(0));
    out[0] = e;
    return out;
  }
  if (var.is_symbol()) {
    if (auto m = structural_match(e, var.name(), degree)) return m;
    if (!e.has_opaque() && !is_transcendental(e)) return std::nullopt;
  }
  // Numeric least squares in the sampled variable.
  Sampler s(spec, {e, var});
  if (!s.free.empty()) return std::nullopt;
  std::vector<double> vs;
  std::vector<double> es;
  auto sample = [&](double x) {
    try {
      Bindings b = s.point(x);
      double ev = eval(e, b);
      double vv = eval(var, b);
      vs.push_back(vv);
      es.push_back(ev);
    } catch (const DomainError&) {
    }
  };
  for (double x : deterministic_points(spec.lo, spec.hi)) sample(x);
  const int n = degree + 1;
  if (static_cast<int>(vs.size()) < n + 1) return std::nullopt;
  Eigen::MatrixXd A(vs.size(), n);
  Eigen::VectorXd rhs(vs.size());
  for (std::size_t i = 0; i < vs.size(); ++i) {
    double p = 1.0;
    for (int k = 0; k < n; ++k) {
      A(static_cast<Eigen::Index>(i), k) = p;
      p *= vs[i];
    }
    rhs(static_cast<Eigen::Index>(i)) = es[i];
  }
  Eigen::VectorXd c = A.colPivHouseholderQr().solve(rhs);
  auto fits = [&](double v, double ev) {
    double p = 1.0;
    double f = 0.0;
    for (int k = 0; k < n; ++k) {
      f += c(k) * p;
      p *= v;
    }
    return std::abs(f - ev) <= spec.tolerance * std::max(1.0, std::abs(ev));
  };
  for (std::size_t i = 0; i < vs.size(); ++i)
    if (!fits(vs[i], es[i])) return std::nullopt;
  std::size_t start = vs.size();
  for (int i = 0; i < 50; ++i) sample(s.random_x());
  for (std::size_t i = start; i < vs.size(); ++i)
    if (!fits(vs[i], es[i])) return std::nullopt;
  std::vector<Expr> out;
  for (int k = 0; k < n; ++k) out.push_back(Expr::real(c(k)));
  return out;
}

}  // namespace lps
