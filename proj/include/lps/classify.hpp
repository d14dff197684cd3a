#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lps/invariants.hpp"

namespace lps {

enum class FitMode { Symbolic, Numeric };

struct ClassifyOptions {
  double tolerance = 1e-7;  // relative to 1 + max|K|
  int points = 64;
  double shift_lo = -10.0;
  double shift_hi = 10.0;
  int coarse_steps = 41;
  bool symbolic = true;
  // Added to I before fitting; classification must not depend on it.
  double i_offset = 0.0;
};

struct SymmetryClassification {
  int dim = 2;
  // dim 6: K = c2 I^2 + c1 I + c0.  dim 4: K = mu/(I+s)^2 + c2 (I+s)^2 + c0.
  double c2 = 0.0;
  double c1 = 0.0;
  double c0 = 0.0;
  double mu = 0.0;
  double shift = 0.0;
  FitMode fit_mode = FitMode::Numeric;
  double residual = 0.0;  // sup |K - fit| over the grid
  double scale = 1.0;     // 1 + max|K|
  double residual6 = 0.0;
  double residual4 = 0.0;
  // Exact constants from the symbolic path, in the order (c2, c1, c0) or (mu, c2, c0).
  std::optional<std::vector<Expr>> exact;
  std::vector<std::string> warnings;
};

// Solves y = I(x) for x by peeling affine maps, powers, exp/log and the
// inverse trigonometric pairs. The result is checked numerically.
std::optional<Expr> invert_primitive(const Expr& I, const std::string& var, const std::string& y,
                                     const SampleSpec& spec);

SymmetryClassification classify(const InvariantTriple& inv, const ClassifyOptions& opt = {});

// u_t + [(4x^2 ln x) u_x + (Ax + Bx ln x) u]_x = 0 on x > 1.
ParabolicEquation fp_logdiffusion(double A, double B);
SymmetryClassification check_fp_logdiffusion(double A, double B);

}  // namespace lps
