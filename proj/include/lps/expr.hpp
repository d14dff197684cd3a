#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "lps/rational.hpp"

namespace lps {

enum class Kind : std::uint8_t {
  Number,
  Constant,
  Variable,
  Add,
  Mul,
  Pow,
  Neg,
  Div,
  Sqrt,
  Exp,
  Log,
  Sin,
  Cos,
  Tan,
  Sinh,
  Cosh,
  Tanh,
  Atan,
  Atanh,
  Abs,
  BesselI,
  Opaque,
};

// Numeric payload: exact rational when possible, otherwise double.
struct Num {
  bool exact = true;
  Rational q;
  double f = 0.0;

  static Num of(const Rational& r) { return Num{true, r, 0.0}; }
  static Num of_double(double v) { return Num{false, Rational(), v}; }
  double value() const { return exact ? q.to_double() : f; }
  bool is_zero() const { return exact ? q.is_zero() : f == 0.0; }
  bool is_one() const { return exact ? q == Rational(1) : f == 1.0; }
  int sign() const { return exact ? q.sign() : (f > 0) - (f < 0); }
};

Num num_add(const Num& a, const Num& b);
Num num_mul(const Num& a, const Num& b);

class Expr;
namespace detail {
struct Node;
}

// A numeric function of one argument whose derivative is known symbolically.
// Used for quantities defined by quadrature, such as I(x) = ∫ dx/√a.
struct OpaqueFunction {
  std::string name;
  std::function<double(double)> eval;
  std::string parameter;  // placeholder symbol used inside `derivative`
  std::shared_ptr<const Expr> derivative;
};

class Expr {
 public:
  Expr();
  Expr(int v);           // NOLINT(google-explicit-constructor)
  Expr(std::int64_t v);  // NOLINT(google-explicit-constructor)
  Expr(const Rational& r);  // NOLINT(google-explicit-constructor)
  Expr(double) = delete;
  Expr(float) = delete;

  static Expr real(double v);
  static Expr number(const Num& n);
  static Expr variable(const std::string& name);
  static Expr constant(const std::string& name);

  Kind kind() const;
  const std::vector<Expr>& args() const;
  const Expr& arg(std::size_t i) const { return args()[i]; }
  const Num& num() const;
  const std::string& name() const;
  const OpaqueFunction& opaque() const;
  std::size_t hash() const;

  bool is_number() const { return kind() == Kind::Number; }
  bool is_symbol() const { return kind() == Kind::Variable || kind() == Kind::Constant; }
  bool is_zero() const;
  bool is_one() const;
  std::optional<Rational> rational() const;
  bool depends_on(const std::string& symbol) const;
  bool has_opaque() const;

  friend bool operator==(const Expr& a, const Expr& b);
  friend bool operator!=(const Expr& a, const Expr& b) { return !(a == b); }

  const detail::Node* node() const { return node_.get(); }
  explicit Expr(std::shared_ptr<const detail::Node> n) : node_(std::move(n)) {}

 private:
  std::shared_ptr<const detail::Node> node_;
};

struct ExprHash {
  std::size_t operator()(const Expr& e) const { return e.hash(); }
};

// Deterministic total order used by the canonical form.
int compare(const Expr& a, const Expr& b);

// Canonicalizing constructors. Neg, Div and Sqrt are normalized into Mul and
// Pow; the printer restores them.
Expr add(std::vector<Expr> terms);
Expr mul(std::vector<Expr> factors);
Expr power(const Expr& base, const Expr& exponent);
Expr apply(Kind fn, const Expr& arg);
Expr bessel_i(const Expr& order, const Expr& z);
Expr opaque_call(std::shared_ptr<const OpaqueFunction> fn, const Expr& arg);

Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);

Expr sqrt(const Expr& a);
Expr exp(const Expr& a);
Expr log(const Expr& a);
Expr sin(const Expr& a);
Expr cos(const Expr& a);
Expr tan(const Expr& a);
Expr sinh(const Expr& a);
Expr cosh(const Expr& a);
Expr tanh(const Expr& a);
Expr atan(const Expr& a);
Expr atanh(const Expr& a);
Expr abs(const Expr& a);

// Raw node without canonicalization; used by the parser and by tests that
// need non-canonical input for simplify.
Expr make_raw(Kind k, std::vector<Expr> args);

Expr simplify(const Expr& e);

// Same node kind with new children, canonicalized.
Expr with_args(const Expr& e, const std::vector<Expr>& args);

// Symbolic derivative with respect to the named symbol.
Expr differentiate(const Expr& e, const std::string& var, int order = 1);

Expr substitute(const Expr& e, const std::string& symbol, const Expr& replacement);
Expr substitute(const Expr& e, const std::map<std::string, Expr>& replacements);
// Replace named constants by numeric values.
Expr bind(const Expr& e, const std::map<std::string, double>& values);

using Bindings = std::map<std::string, double>;

// Evaluation; throws DomainError for points outside the domain of definition.
double eval(const Expr& e, const Bindings& bindings);

std::vector<std::string> free_symbols(const Expr& e);
bool is_transcendental(const Expr& e);
// True when the expression is known to be non-negative from its structure.
bool structurally_nonnegative(const Expr& e);
// Sign of a leading coefficient; used to canonicalize odd and even functions.
bool has_negative_form(const Expr& e);

std::string to_string(const Expr& e);
std::string to_sexpr(const Expr& e);

// Expression compiled to a flat program with symbols resolved to slots.
class Compiled {
 public:
  Compiled() = default;
  Compiled(const Expr& e, const std::vector<std::string>& slots, const Bindings& constants = {});
  double operator()(const double* values) const;
  double operator()(std::initializer_list<double> values) const { return (*this)(values.begin()); }
  bool valid() const { return !code_.empty(); }

  struct Instr {
    Kind op;
    std::uint32_t count;  // operand count for Add/Mul, slot index for symbols
    double value;
    const OpaqueFunction* fn;
  };

 private:
  std::vector<Instr> code_;
  std::vector<std::shared_ptr<const OpaqueFunction>> keep_;
  std::vector<Rational> exact_exponents_;
  std::size_t stack_size_ = 0;
};

double eval_pow(double b, double e, bool exact_exponent, const Rational& q);
double bessel_i_value(double nu, double z);

}  // namespace lps
