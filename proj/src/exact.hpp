#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "lps/expr.hpp"

namespace lps::detail {

// Exact rational when v is one with a small denominator.
inline Expr snap(double v) {
  for (std::int64_t d = 1; d <= 1024; ++d) {
    double p = v * static_cast<double>(d);
    double r = std::round(p);
    if (std::abs(p - r) <= 1e-13 * std::max(1.0, std::abs(p)) && std::abs(r) < 1e12) {
      return Expr(Rational(static_cast<std::int64_t>(r), d));
    }
  }
  return Expr::real(v);
}

// Entry i of a classification's exact constants when it is free of symbols.
inline std::optional<Expr> numeric_expr(const std::optional<std::vector<Expr>>& exact, std::size_t i) {
  if (!exact || exact->size() <= i) return std::nullopt;
  const Expr& e = (*exact)[i];
  if (!free_symbols(e).empty()) return std::nullopt;
  return simplify(e);
}

}  // namespace lps::detail
