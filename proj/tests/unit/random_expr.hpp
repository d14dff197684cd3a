#pragma once

#include <random>

#include "lps/expr.hpp"

namespace lps::testing {

// Random trees over x and a constant k that stay finite for |x| <= 2, k in [0.5, 1.5].
class TreeGen {
 public:
  explicit TreeGen(std::uint64_t seed) : rng_(seed) {}

  Expr tree(int depth) {
    if (depth <= 0 || pick(4) == 0) return leaf();
    switch (pick(10)) {
      case 0: return tree(depth - 1) + tree(depth - 1);
      case 1: return tree(depth - 1) * tree(depth - 1);
      case 2: return tree(depth - 1) - tree(depth - 1);
      case 3: return power(bounded(depth - 1), Expr(pick(3) + 2));
      case 4: return sin(tree(depth - 1));
      case 5: return cos(tree(depth - 1));
      case 6: return exp(bounded(depth - 1));
      case 7: return tree(depth - 1) / (Expr(2) + sin(tree(depth - 1)));
      case 8: return sqrt(Expr(1) + power(tree(depth - 1), Expr(2)));
      default: return log(Expr(3) + cos(tree(depth - 1)));
    }
  }

 private:
  int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng_); }

  Expr leaf() {
    switch (pick(4)) {
      case 0: return Expr::variable("x");
      case 1: return Expr::constant("k") * Expr::variable("x");
      case 2: return Expr(Rational(pick(9) - 4, pick(3) + 1));
      default: return Expr::constant("k");
    }
  }

  Expr bounded(int depth) {
    switch (pick(3)) {
      case 0: return tanh(tree(depth));
      case 1: return atan(tree(depth));
      default: return sin(tree(depth));
    }
  }

  std::mt19937_64 rng_;
};

}  // namespace lps::testing
