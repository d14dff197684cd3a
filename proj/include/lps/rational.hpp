#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace lps {

// Exact rational with 64-bit numerator and denominator. Arithmetic that would
// overflow returns std::nullopt through the checked_* helpers.
class Rational {
 public:
  constexpr Rational() = default;
  constexpr Rational(std::int64_t n) : num_(n), den_(1) {}  // NOLINT(google-explicit-constructor)
  Rational(std::int64_t n, std::int64_t d);

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }

  bool is_integer() const { return den_ == 1; }
  bool is_zero() const { return num_ == 0; }
  int sign() const { return (num_ > 0) - (num_ < 0); }
  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }
  std::string str() const;

  static std::optional<Rational> checked_add(const Rational& a, const Rational& b);
  static std::optional<Rational> checked_mul(const Rational& a, const Rational& b);
  static std::optional<Rational> checked_pow(const Rational& a, std::int64_t e);
  // Decimal literal such as "12.5e-3"; nullopt when it does not fit.
  static std::optional<Rational> from_decimal(const std::string& text);

  Rational operator-() const;
  Rational reciprocal() const;

  friend bool operator==(const Rational& a, const Rational& b) { return a.num_ == b.num_ && a.den_ == b.den_; }
  friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }
  friend bool operator<(const Rational& a, const Rational& b);

 private:
  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

// Exact integer k-th root of a non-negative integer, if it exists.
std::optional<std::int64_t> exact_root(std::int64_t v, std::int64_t k);

}  // namespace lps
