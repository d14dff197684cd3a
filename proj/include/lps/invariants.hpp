#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lps/algebra.hpp"
#include "lps/expr.hpp"
#include "lps/parser.hpp"

namespace lps {

// u_t = a u_xx + b u_x + c u on an open interval. A backward equation
// u_t + a u_xx + b u_x + c u = 0 keeps the same (a, b, c) after t -> -t and is
// flagged so reports can record the reflection.
struct ParabolicEquation {
  Expr a;
  Expr b;
  Expr c;
  Interval domain;
  std::optional<Interval> window;
  bool backward = false;
  std::string variable = "x";
  Bindings constants;  // values for named constants still present in a, b, c
  std::uint64_t seed = 0x5eed1234ULL;  // for randomized sampling

  static ParabolicEquation from_program(const ParsedProgram& prog);

  // Probe interval: finite part of the domain, inset by 5% of its length.
  Interval analysis_window() const;
  // Base point of I.
  double x_ref() const;
  SampleSpec sample_spec() const;
  // Throws NonparabolicError or UnsupportedCoefficient.
  void validate() const;
};

// Antiderivative by substitution patterns, or nullopt.
std::optional<Expr> antiderivative(const Expr& f, const std::string& var, const SampleSpec& spec);

// Sign-resolves abs(), splits powers of positive products and merges nested
// powers of positive bases, all judged by sampling on the window.
Expr assume_window(const Expr& e, const SampleSpec& spec);

struct InvariantTriple {
  Expr I;  // closed form, or an opaque quadrature call
  Expr J;
  Expr K;
  Expr sqrt_a;
  // Antiderivative of J/sqrt(a); closed form or opaque.
  Expr G;
  bool symbolic_I = false;
  bool symbolic_G = false;
  double x_ref = 0.0;
  std::string variable = "x";
  Bindings constants;
  SampleSpec spec;

  double eval_at(const Expr& e, double x) const;
  double I_at(double x) const { return eval_at(I, x); }
  double K_at(double x) const { return eval_at(K, x); }
};

InvariantTriple compute_invariants(const ParabolicEquation& eq);

// Opaque function x -> ∫_{x_ref}^x f, cached and thread-safe.
Expr quadrature_primitive(const std::string& name, const Expr& f, const std::string& var, double x_ref,
                          const Bindings& constants);

using Fn1 = std::function<double(double)>;
using Fn2 = std::function<double(double, double)>;

// Coefficients of the transformed equation as functions of the original (x, t).
struct TransformedCoefficients {
  Fn2 a;
  Fn2 b;
  Fn2 c;
};

// Equivalence map t~ = T(t), x~ = X(x, t), u~ = theta(x, t) u given as
// expressions in x and t (symbolic derivatives).
TransformedCoefficients transformed_coefficients(const ParabolicEquation& eq, const Expr& T, const Expr& X,
                                                 const Expr& theta);

// Same map given numerically; derivatives by central differences (h = 1e-5).
TransformedCoefficients transformed_coefficients(const ParabolicEquation& eq, const Fn1& T, const Fn2& X,
                                                 const Fn2& theta);

// K of an equation given by samplers, at (x, t). `X` maps to the new spatial
// variable in which the samplers' equation is written; derivatives along x~
// are taken as X_x^{-1} d/dx with fourth-order differences of step h.
double semi_invariant_numeric(const TransformedCoefficients& co, const Fn2& X, double x, double t,
                              double h = 1e-3);

}  // namespace lps
