#include <cmath>
#include <cstdio>
#include <sstream>

#include "expr_node.hpp"
#include "lps/expr.hpp"

namespace lps {

namespace {

// Binding strengths used by the printer; they mirror the parser.
enum Prec { kAdd = 1, kMul = 2, kUnary = 3, kPow = 4, kAtom = 5 };

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s(buf);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

struct Printed {
  std::string text;
  int prec;
};

Printed print(const Expr& e);

std::string wrap(const Printed& p, int min_prec) {
  if (p.prec < min_prec) return "(" + p.text + ")";
  return p.text;
}

Printed print_number(const Num& n) {
  if (!n.exact) {
    std::string s = format_double(n.f);
    return {s, n.f < 0 ? kUnary : kAtom};
  }
  if (n.q.is_integer()) return {n.q.str(), n.q.sign() < 0 ? kUnary : kAtom};
  return {n.q.str(), kMul};
}

Num negate(const Num& n) { return n.exact ? Num::of(-n.q) : Num::of_double(-n.f); }

// Splits a product into numerator and denominator factor lists.
void split_fraction(const Expr& e, Num& coeff, std::vector<Expr>& num, std::vector<Expr>& den) {
  coeff = Num::of(Rational(1));
  std::vector<Expr> factors;
  if (e.kind() == Kind::Mul) {
    factors = e.args();
  } else {
    factors = {e};
  }
  for (const auto& f : factors) {
    if (f.is_number()) {
      coeff = num_mul(coeff, f.num());
      continue;
    }
    if (f.kind() == Kind::Pow && f.arg(1).is_number() && f.arg(1).num().sign() < 0) {
      den.push_back(power(f.arg(0), Expr::number(negate(f.arg(1).num()))));
      continue;
    }
    num.push_back(f);
  }
}

std::string join_product(const std::vector<Expr>& fs) {
  std::string s;
  for (std::size_t i = 0; i < fs.size(); ++i) {
    if (i) s += "*";
    s += wrap(print(fs[i]), kPow);
  }
  return s;
}

Printed print_product(const Expr& e) {
  Num coeff;
  std::vector<Expr> num;
  std::vector<Expr> den;
  split_fraction(e, coeff, num, den);
  bool negative = coeff.sign() < 0;
  Num mag = negative ? negate(coeff) : coeff;
  std::string numerator;
  bool leading_power = false;
  if (mag.exact && !mag.q.is_integer()) {
    // Rational coefficient a/b: fold b into the denominator.
    Rational a(mag.q.num());
    Rational b(mag.q.den());
    if (a != Rational(1) || num.empty()) numerator = a.str();
    if (!num.empty()) {
      leading_power = numerator.empty() && num[0].kind() == Kind::Pow;
      numerator += (numerator.empty() ? "" : "*") + join_product(num);
    }
    den.insert(den.begin(), Expr(b));
  } else {
    bool unit = mag.exact && mag.q == Rational(1);
    if (!unit || num.empty()) numerator = print_number(mag).text;
    if (!num.empty()) {
      leading_power = numerator.empty() && num[0].kind() == Kind::Pow;
      numerator += (numerator.empty() ? "" : "*") + join_product(num);
    }
  }
  std::string text = numerator;
  if (!den.empty()) {
    std::string d = den.size() == 1 ? wrap(print(den[0]), kPow) : "(" + join_product(den) + ")";
    text += "/" + d;
  }
  if (negative) {
    // Unary minus binds tighter than the base of '^'.
    if (leading_power && num.size() == 1 && den.empty()) {
      text = "-(" + text + ")";
    } else if (leading_power) {
      text = "-1*" + text;
    } else {
      text = "-" + text;
    }
  }
  return {text, kMul};
}

Printed print_power(const Expr& e) {
  const Expr& b = e.arg(0);
  const Expr& x = e.arg(1);
  if (x.is_number() && x.num().exact) {
    Rational q = x.num().q;
    if (q == Rational(1, 2)) return {"sqrt(" + print(b).text + ")", kAtom};
    if (q.sign() < 0) return print_product(e);
  }
  if (x.is_number() && x.num().sign() < 0) return print_product(e);
  Printed pb = print(b);
  std::string bs = pb.prec <= kPow ? "(" + pb.text + ")" : pb.text;
  Printed px = print(x);
  std::string xs = px.prec < kAtom ? "(" + px.text + ")" : px.text;
  return {bs + "^" + xs, kPow};
}

Printed print(const Expr& e) {
  switch (e.kind()) {
    case Kind::Number:
      return print_number(e.num());
    case Kind::Constant:
    case Kind::Variable:
      return {e.name(), kAtom};
    case Kind::Add: {
      std::string s;
      bool first = true;
      for (const auto& t : e.args()) {
        if (first) {
          s = print(t).text;
          first = false;
          continue;
        }
        if (has_negative_form(t)) {
          Expr pos = mul({Expr(-1), t});
          s += " - " + wrap(print(pos), kMul);
        } else {
          s += " + " + print(t).text;
        }
      }
      return {s, kAdd};
    }
    case Kind::Mul:
      return print_product(e);
    case Kind::Pow:
      return print_power(e);
    case Kind::Neg:
      return {"-" + wrap(print(e.arg(0)), kAtom), kMul};
    case Kind::Div:
      return {wrap(print(e.arg(0)), kMul) + "/" + wrap(print(e.arg(1)), kPow), kMul};
    case Kind::BesselI:
      return {std::string("besselie(") + print(e.arg(0)).text + ", " + print(e.arg(1)).text + ")", kAtom};
    case Kind::Opaque:
      return {e.name() + "(" + print(e.arg(0)).text + ")", kAtom};
    default:
      return {std::string(detail::function_name(e.kind())) + "(" + print(e.arg(0)).text + ")", kAtom};
  }
}

std::string kind_tag(Kind k) {
  switch (k) {
    case Kind::Add: return "add";
    case Kind::Mul: return "mul";
    case Kind::Pow: return "pow";
    case Kind::Neg: return "neg";
    case Kind::Div: return "div";
    case Kind::Opaque: return "opaque";
    default: return detail::function_name(k);
  }
}

void sexpr(const Expr& e, std::ostringstream& os) {
  switch (e.kind()) {
    case Kind::Number:
      if (e.num().exact) {
        os << e.num().q.str();
      } else {
        os << format_double(e.num().f);
      }
      return;
    case Kind::Constant:
      os << "(const " << e.name() << ")";
      return;
    case Kind::Variable:
      os << e.name();
      return;
    default:
      break;
  }
  os << "(" << kind_tag(e.kind());
  if (e.kind() == Kind::Opaque) os << " " << e.name();
  for (const auto& a : e.args()) {
    os << " ";
    sexpr(a, os);
  }
  os << ")";
}

}  // namespace

std::string to_string(const Expr& e) { return print(e).text; }

std::string to_sexpr(const Expr& e) {
  std::ostringstream os;
  sexpr(e, os);
  return os.str();
}

}  // namespace lps
