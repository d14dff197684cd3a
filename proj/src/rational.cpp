#include "lps/rational.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace lps {

namespace {

using i128 = __int128;

std::optional<Rational> make_checked(i128 n, i128 d) {
  if (d == 0) throw std::domain_error("rational with zero denominator");
  if (d < 0) {
    n = -n;
    d = -d;
  }
  i128 a = n < 0 ? -n : n;
  i128 b = d;
  while (b != 0) {
    i128 r = a % b;
    a = b;
    b = r;
  }
  if (a > 1) {
    n /= a;
    d /= a;
  }
  constexpr i128 lo = std::numeric_limits<std::int64_t>::min() + 1;
  constexpr i128 hi = std::numeric_limits<std::int64_t>::max();
  if (n < lo || n > hi || d > hi) return std::nullopt;
  return Rational(static_cast<std::int64_t>(n), static_cast<std::int64_t>(d));
}

}  // namespace

Rational::Rational(std::int64_t n, std::int64_t d) {
  if (d == 0) throw std::domain_error("rational with zero denominator");
  if (d < 0) {
    n = -n;
    d = -d;
  }
  std::int64_t g = std::gcd(n, d);
  if (g > 1) {
    n /= g;
    d /= g;
  }
  num_ = n;
  den_ = d;
}

std::string Rational::str() const {
  if (den_ == 1) return std::to_string(num_);
  return std::to_string(num_) + "/" + std::to_string(den_);
}

std::optional<Rational> Rational::checked_add(const Rational& a, const Rational& b) {
  return make_checked(static_cast<i128>(a.num_) * b.den_ + static_cast<i128>(b.num_) * a.den_,
                      static_cast<i128>(a.den_) * b.den_);
}

std::optional<Rational> Rational::checked_mul(const Rational& a, const Rational& b) {
  return make_checked(static_cast<i128>(a.num_) * b.num_, static_cast<i128>(a.den_) * b.den_);
}

std::optional<Rational> Rational::checked_pow(const Rational& a, std::int64_t e) {
  if (e == 0) return Rational(1);
  Rational base = a;
  if (e < 0) {
    if (a.is_zero()) return std::nullopt;
    base = a.reciprocal();
    e = -e;
  }
  Rational result(1);
  while (e > 0) {
    if (e & 1) {
      auto r = checked_mul(result, base);
      if (!r) return std::nullopt;
      result = *r;
    }
    e >>= 1;
    if (e > 0) {
      auto b = checked_mul(base, base);
      if (!b) return std::nullopt;
      base = *b;
    }
  }
  return result;
}

std::optional<Rational> Rational::from_decimal(const std::string& text) {
  i128 mantissa = 0;
  int frac_digits = 0;
  bool seen_dot = false;
  std::size_t i = 0;
  int digits = 0;
  for (; i < text.size(); ++i) {
    char c = text[i];
    if (c == '.') {
      if (seen_dot) return std::nullopt;
      seen_dot = true;
      continue;
    }
    if (c < '0' || c > '9') break;
    mantissa = mantissa * 10 + (c - '0');
    if (mantissa != 0) ++digits;
    if (digits > 18) return std::nullopt;
    if (seen_dot) ++frac_digits;
  }
  int exponent = 0;
  if (i < text.size()) {
    if (text[i] != 'e' && text[i] != 'E') return std::nullopt;
    ++i;
    bool neg = false;
    if (i < text.size() && (text[i] == '+' || text[i] == '-')) {
      neg = text[i] == '-';
      ++i;
    }
    if (i >= text.size()) return std::nullopt;
    for (; i < text.size(); ++i) {
      if (text[i] < '0' || text[i] > '9') return std::nullopt;
      exponent = exponent * 10 + (text[i] - '0');
      if (exponent > 40) return std::nullopt;
    }
    if (neg) exponent = -exponent;
  }
  int scale = exponent - frac_digits;
  i128 num = mantissa;
  i128 den = 1;
  for (int k = 0; k < std::abs(scale); ++k) {
    if (scale > 0) {
      num *= 10;
      if (num > std::numeric_limits<std::int64_t>::max()) return std::nullopt;
    } else {
      den *= 10;
      if (den > static_cast<i128>(std::numeric_limits<std::int64_t>::max()) * 10) return std::nullopt;
    }
  }
  return make_checked(num, den);
}

Rational Rational::operator-() const { return Rational(-num_, den_); }

Rational Rational::reciprocal() const {
  if (num_ == 0) throw std::domain_error("reciprocal of zero");
  return Rational(den_, num_);
}

bool operator<(const Rational& a, const Rational& b) {
  return static_cast<i128>(a.num_) * b.den_ < static_cast<i128>(b.num_) * a.den_;
}

std::optional<std::int64_t> exact_root(std::int64_t v, std::int64_t k) {
  if (v < 0 || k <= 0) return std::nullopt;
  if (k == 1 || v <= 1) return v;
  auto r = static_cast<std::int64_t>(std::llround(std::pow(static_cast<double>(v), 1.0 / static_cast<double>(k))));
  for (std::int64_t c = std::max<std::int64_t>(0, r - 1); c <= r + 1; ++c) {
    i128 p = 1;
    bool over = false;
    for (std::int64_t j = 0; j < k; ++j) {
      p *= c;
      if (p > v) {
        over = true;
        break;
      }
    }
    if (!over && p == v) return c;
  }
  return std::nullopt;
}

}  // namespace lps
