#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "lps/classify.hpp"
#include "lps/invariants.hpp"

namespace lps {

// X = tau(t) d_t + xi(x, t) d_x + phi(x, t) u d_u.
struct VectorField {
  Expr tau;  // in t
  Expr xi;   // in (x, t)
  Expr phi;  // multiplier of u d_u, in (x, t)
  std::string label;
  std::string provenance;
  std::string variable = "x";

  std::string text() const;
};

// tau, rho, sigma of xi = sqrt(a)(tau' I/2 + rho) and
// phi = -tau'' I^2/8 - rho' I/2 + tau' I J/4 + rho J/2 + sigma.
VectorField field_from_generators(const InvariantTriple& inv, const Expr& I, const Expr& tau, const Expr& rho,
                                  const Expr& sigma, const std::string& label, const std::string& provenance);

VectorField reflect_time(const VectorField& v);
VectorField combine(const std::vector<VectorField>& basis, const std::vector<double>& coeffs,
                    const std::string& label);

enum class BasisFamily { Dim4Zero, Dim4Negative, Dim4Positive, Dim6Zero, Dim6Negative, Dim6Positive };

const char* family_name(BasisFamily f);

struct SymmetryBasis {
  int dim = 0;
  BasisFamily family = BasisFamily::Dim6Zero;
  double c2 = 0.0;
  double c1 = 0.0;
  double c0 = 0.0;
  double mu = 0.0;
  double kappa = 0.0;
  double shift = 0.0;
  std::vector<VectorField> fields;
  // Fields are in forward time; the source equation was backward.
  bool time_reflected = false;
  std::string variable = "x";
  Interval x_window;
  Interval t_window{0.1, 1.0};
  std::vector<std::string> warnings;
};

// Throws NotReducible when cls.dim is not 4 or 6.
SymmetryBasis emit_basis(const SymmetryClassification& cls, const InvariantTriple& inv, bool time_reflected = false);

struct DeterminingReport {
  double eq1 = 0.0;   // u_x condition, relative
  double eq2 = 0.0;   // u condition, relative
  double xi_eq = 0.0; // xi_x - a_x xi/(2a) - tau'/2, relative
  int points = 0;
  double max() const { return std::max({eq1, eq2, xi_eq}); }
};

// Both determining equations and the xi equation on an n x n grid over the
// analysis window and t_range, each scaled by the largest term magnitude.
DeterminingReport check_determining(const ParabolicEquation& eq, const VectorField& v,
                                    const Interval& t_range = {0.1, 1.0}, int n = 16);

VectorField lie_bracket(const VectorField& v, const VectorField& w);

struct CommutatorTable {
  int n = 0;
  std::vector<double> c;  // c[(i n + j) n + k] for [v_i, v_j] = sum_k c v_k
  double residual = 0.0;  // worst relative decomposition residual

  explicit CommutatorTable(int size = 0) : n(size), c(static_cast<std::size_t>(size * size * size), 0.0) {}
  double& at(int i, int j, int k) { return c[static_cast<std::size_t>((i * n + j) * n + k)]; }
  double at(int i, int j, int k) const { return c[static_cast<std::size_t>((i * n + j) * n + k)]; }
  // [v_i, v_j] = sum_k coeffs_k v_k and its antisymmetric partner.
  void set(int i, int j, const std::vector<std::pair<int, double>>& coeffs);
  double antisymmetry_defect() const;
  double jacobi_defect() const;
};

// Least-squares coefficients of w in the basis on a sampling grid, with the
// relative residual.
std::pair<std::vector<double>, double> decompose(const VectorField& w, const std::vector<VectorField>& basis,
                                                 const Interval& x_window, const Interval& t_window);

CommutatorTable commutator_table(const SymmetryBasis& basis);

// Reference structure constants for a family (labels v1..vn, 0-based here).
CommutatorTable published_table(BasisFamily f, double c1, double c0, double kappa);

struct TableEntryMismatch {
  int i, j, k;
  double expected;
  double computed;
};

struct TableReport {
  std::vector<TableEntryMismatch> mismatches;
  double max_deviation = 0.0;
  double closure_residual = 0.0;
  bool ok() const { return mismatches.empty(); }
  // Bracket pairs (i, j) with at least one mismatching coefficient.
  std::vector<std::pair<int, int>> flagged_lines() const;
};

TableReport verify_table(const CommutatorTable& computed, const CommutatorTable& expected, double tol = 1e-7);
// Throws TableMismatch naming the first offending (i, j, k).
void require_table(const CommutatorTable& computed, const CommutatorTable& expected, double tol = 1e-7);

// Change of basis taking the table to sl(2,R) + R, rows (h, e, f, z) over v1..v4.
std::vector<std::vector<double>> sl2_witness(const SymmetryBasis& basis);
CommutatorTable transform_table(const CommutatorTable& t, const std::vector<std::vector<double>>& rows);
// [h, e] = 2e, [h, f] = -2f, [e, f] = h, z central.
CommutatorTable canonical_sl2_plus_r();

// "sl(2,R)+R", "sl(2,R)|x heis(3)" or "unknown", from the derived algebra,
// the center and the rank of the Killing form.
std::string algebra_name(const CommutatorTable& t);

// Bracket pairs (i, j) of the reference table that the computed brackets
// contradict for this family.
std::vector<std::pair<int, int>> known_flagged_lines(BasisFamily f, double c1);

// u_t = u_xx + K u with K = c2 x^2 + c1 x + c0, plus mu/x^2 when dim = 4,
// classified from the same constants.
struct CanonicalSetup {
  ParabolicEquation eq;
  InvariantTriple inv;
  SymmetryClassification cls;
  SymmetryBasis basis;
};
CanonicalSetup canonical_setup(int dim, double c2, double c1, double c0, double mu = 0.0);

// Fields of the span satisfying tau(0) = 0, xi(x0, 0) = 0 and
// phi(x0, 0) + xi_x(x0, 0) = 0. Throws RankDeficiency when the constraints
// lose rank at x0.
std::vector<VectorField> boundary_subalgebra(const SymmetryBasis& basis, double x0);

}  // namespace lps
