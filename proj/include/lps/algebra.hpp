#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lps/expr.hpp"

namespace lps {

// Where and how expressions are sampled when a question cannot be settled
// symbolically. Unbound symbols other than `variable` draw values in [0.5, 1.5].
struct SampleSpec {
  std::string variable = "x";
  double lo = -3.0;
  double hi = 3.0;
  Bindings constants;
  std::uint64_t seed = 0x5eed1234ULL;
  double tolerance = 1e-9;
};

// Distributes products over sums and expands small positive integer powers.
Expr expand(const Expr& e);

// Exact decision through rational-function normal form when possible.
std::optional<bool> rational_zero_test(const Expr& e);

bool is_identically_zero(const Expr& e, const SampleSpec& spec = {});

// Coefficients c_0..c_degree with e == sum c_i var^i, or nullopt.
std::optional<std::vector<Expr>> match_polynomial(const Expr& e, const Expr& var, int degree,
                                                  const SampleSpec& spec = {});

// Samples used by the numeric fallbacks: 7 deterministic points, then 50 random.
std::vector<double> deterministic_points(double lo, double hi, int n = 7);

}  // namespace lps
