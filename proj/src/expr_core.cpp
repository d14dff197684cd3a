#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <unordered_map>

#include "expr_node.hpp"
#include "lps/expr.hpp"

namespace lps {

namespace detail {

namespace {

std::size_t mix(std::size_t h, std::size_t v) { return h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2)); }

}  // namespace

std::shared_ptr<const Node> make_node(Kind k, Num num, std::string name, std::vector<Expr> args,
                                      std::shared_ptr<const OpaqueFunction> fn) {
  auto n = std::make_shared<Node>();
  n->kind = k;
  n->num = num;
  n->name = std::move(name);
  n->args = std::move(args);
  n->opaque = std::move(fn);
  std::size_t h = std::hash<int>()(static_cast<int>(k));
  if (k == Kind::Number) {
    if (n->num.exact) {
      h = mix(h, std::hash<std::int64_t>()(n->num.q.num()));
      h = mix(h, std::hash<std::int64_t>()(n->num.q.den()));
    } else {
      h = mix(h, std::hash<double>()(n->num.f));
    }
  }
  if (!n->name.empty()) h = mix(h, std::hash<std::string>()(n->name));
  if (n->opaque) {
    h = mix(h, std::hash<const void*>()(n->opaque.get()));
    n->has_opaque = true;
  }
  for (const auto& a : n->args) {
    h = mix(h, a.hash());
    n->has_opaque = n->has_opaque || a.has_opaque();
  }
  n->hash = h;
  return n;
}

const char* function_name(Kind k) {
  switch (k) {
    case Kind::Exp: return "exp";
    case Kind::Log: return "log";
    case Kind::Sin: return "sin";
    case Kind::Cos: return "cos";
    case Kind::Tan: return "tan";
    case Kind::Sinh: return "sinh";
    case Kind::Cosh: return "cosh";
    case Kind::Tanh: return "tanh";
    case Kind::Atan: return "atan";
    case Kind::Atanh: return "atanh";
    case Kind::Abs: return "abs";
    case Kind::Sqrt: return "sqrt";
    case Kind::BesselI: return "besselie";
    default: return "?";
  }
}

}  // namespace detail

using detail::make_node;
using detail::Node;

Num num_add(const Num& a, const Num& b) {
  if (a.exact && b.exact) {
    if (auto r = Rational::checked_add(a.q, b.q)) return Num::of(*r);
  }
  return Num::of_double(a.value() + b.value());
}

Num num_mul(const Num& a, const Num& b) {
  if (a.exact && b.exact) {
    if (auto r = Rational::checked_mul(a.q, b.q)) return Num::of(*r);
  }
  if ((a.exact && a.q.is_zero()) || (b.exact && b.q.is_zero())) return Num::of(Rational(0));
  return Num::of_double(a.value() * b.value());
}

// ---- Expr basics -----------------------------------------------------------

Expr::Expr() : Expr(std::int64_t{0}) {}
Expr::Expr(int v) : Expr(static_cast<std::int64_t>(v)) {}
Expr::Expr(std::int64_t v) : node_(make_node(Kind::Number, Num::of(Rational(v)), "", {})) {}
Expr::Expr(const Rational& r) : node_(make_node(Kind::Number, Num::of(r), "", {})) {}

Expr Expr::real(double v) { return Expr(make_node(Kind::Number, Num::of_double(v), "", {})); }
Expr Expr::number(const Num& n) { return Expr(make_node(Kind::Number, n, "", {})); }
Expr Expr::variable(const std::string& name) { return Expr(make_node(Kind::Variable, Num{}, name, {})); }
Expr Expr::constant(const std::string& name) { return Expr(make_node(Kind::Constant, Num{}, name, {})); }

Kind Expr::kind() const { return node_->kind; }
const std::vector<Expr>& Expr::args() const { return node_->args; }
const Num& Expr::num() const { return node_->num; }
const std::string& Expr::name() const { return node_->name; }
const OpaqueFunction& Expr::opaque() const { return *node_->opaque; }
std::size_t Expr::hash() const { return node_->hash; }
bool Expr::has_opaque() const { return node_->has_opaque; }

bool Expr::is_zero() const { return is_number() && num().is_zero(); }
bool Expr::is_one() const { return is_number() && num().is_one(); }

std::optional<Rational> Expr::rational() const {
  if (is_number() && num().exact) return num().q;
  return std::nullopt;
}

bool Expr::depends_on(const std::string& symbol) const {
  if (is_symbol()) return name() == symbol;
  for (const auto& a : args())
    if (a.depends_on(symbol)) return true;
  return false;
}

bool operator==(const Expr& a, const Expr& b) {
  if (a.node_ == b.node_) return true;
  if (a.hash() != b.hash()) return false;
  return compare(a, b) == 0;
}

Expr make_raw(Kind k, std::vector<Expr> args) { return Expr(make_node(k, Num{}, "", std::move(args))); }

namespace {

Expr raw(Kind k, std::vector<Expr> args) { return make_raw(k, std::move(args)); }

int kind_rank(Kind k) {
  switch (k) {
    case Kind::Number: return 0;
    case Kind::Constant: return 1;
    case Kind::Variable: return 2;
    case Kind::Opaque: return 3;
    case Kind::BesselI: return 4;
    case Kind::Pow: return 30;
    case Kind::Mul: return 31;
    case Kind::Add: return 32;
    default: return 10 + static_cast<int>(k);
  }
}

int compare_num(const Num& a, const Num& b) {
  if (a.exact && b.exact) {
    if (a.q == b.q) return 0;
    return a.q < b.q ? -1 : 1;
  }
  double x = a.value();
  double y = b.value();
  if (x < y) return -1;
  if (x > y) return 1;
  if (a.exact != b.exact) return a.exact ? -1 : 1;
  return 0;
}

}  // namespace

int compare(const Expr& a, const Expr& b) {
  if (a.node() == b.node()) return 0;
  int ra = kind_rank(a.kind());
  int rb = kind_rank(b.kind());
  if (ra != rb) return ra < rb ? -1 : 1;
  switch (a.kind()) {
    case Kind::Number:
      return compare_num(a.num(), b.num());
    case Kind::Constant:
    case Kind::Variable:
      return a.name().compare(b.name()) < 0 ? -1 : (a.name() == b.name() ? 0 : 1);
    case Kind::Opaque:
      if (a.name() != b.name()) return a.name() < b.name() ? -1 : 1;
      if (&a.opaque() != &b.opaque()) return std::less<const void*>()(&a.opaque(), &b.opaque()) ? -1 : 1;
      break;
    default:
      break;
  }
  const auto& xa = a.args();
  const auto& xb = b.args();
  std::size_t n = std::min(xa.size(), xb.size());
  for (std::size_t i = 0; i < n; ++i) {
    int c = compare(xa[i], xb[i]);
    if (c != 0) return c;
  }
  if (xa.size() != xb.size()) return xa.size() < xb.size() ? -1 : 1;
  return 0;
}

// ---- canonical constructors ------------------------------------------------

namespace {

std::pair<Num, Expr> split_coefficient(const Expr& t) {
  if (t.kind() == Kind::Mul && t.arg(0).is_number()) {
    const auto& f = t.args();
    if (f.size() == 2) return {f[0].num(), f[1]};
    return {f[0].num(), raw(Kind::Mul, std::vector<Expr>(f.begin() + 1, f.end()))};
  }
  return {Num::of(Rational(1)), t};
}

Expr with_coefficient(const Num& c, const Expr& rest) {
  if (c.is_one() && c.exact) return rest;
  std::vector<Expr> f{Expr::number(c)};
  if (rest.kind() == Kind::Mul) {
    f.insert(f.end(), rest.args().begin(), rest.args().end());
  } else {
    f.push_back(rest);
  }
  return raw(Kind::Mul, std::move(f));
}

std::pair<Expr, Expr> base_exponent(const Expr& f) {
  if (f.kind() == Kind::Pow) return {f.arg(0), f.arg(1)};
  return {f, Expr(1)};
}

int compare_factor(const Expr& a, const Expr& b) {
  auto [ba, ea] = base_exponent(a);
  auto [bb, eb] = base_exponent(b);
  int c = compare(ba, bb);
  if (c != 0) return c;
  return compare(ea, eb);
}

int compare_term(const Expr& a, const Expr& b) {
  auto [ca, ra] = split_coefficient(a);
  auto [cb, rb] = split_coefficient(b);
  int c = compare(ra, rb);
  if (c != 0) return c;
  return compare_num(ca, cb);
}

Expr fold_number_power(const Expr& b, const Expr& e) {
  const Num& bn = b.num();
  const Num& en = e.num();
  if (bn.exact && en.exact) {
    const Rational& q = en.q;
    if (bn.q.is_zero()) {
      if (q.sign() > 0) return Expr(0);
      return raw(Kind::Pow, {b, e});
    }
    if (bn.q == Rational(1)) return Expr(1);
    if (q.is_integer()) {
      if (auto r = Rational::checked_pow(bn.q, q.num())) return Expr(*r);
      return Expr::real(std::pow(bn.q.to_double(), q.to_double()));
    }
    std::int64_t root = q.den();
    std::int64_t n = bn.q.num();
    bool negative = n < 0;
    if (negative && root % 2 == 0) return raw(Kind::Pow, {b, e});
    auto rn = exact_root(negative ? -n : n, root);
    auto rd = exact_root(bn.q.den(), root);
    if (rn && rd) {
      Rational base(negative ? -*rn : *rn, *rd);
      if (auto r = Rational::checked_pow(base, q.num())) return Expr(*r);
    }
    return raw(Kind::Pow, {b, e});
  }
  double x = bn.value();
  double y = en.value();
  bool integral = en.exact ? en.q.is_integer() : std::floor(y) == y;
  if (x == 0.0 && y < 0) return raw(Kind::Pow, {b, e});
  if (x < 0 && !integral) return raw(Kind::Pow, {b, e});
  return Expr::real(std::pow(x, y));
}

bool is_even_integer(const Expr& e) {
  auto r = e.rational();
  return r && r->is_integer() && r->num() % 2 == 0;
}

bool is_integer(const Expr& e) {
  auto r = e.rational();
  return r && r->is_integer();
}

bool has_even_denominator(const Expr& e) {
  auto r = e.rational();
  return r && r->den() % 2 == 0;
}

bool has_odd_denominator(const Expr& e) {
  auto r = e.rational();
  return r && r->den() % 2 == 1;
}

}  // namespace

bool structurally_nonnegative(const Expr& e) {
  switch (e.kind()) {
    case Kind::Number:
      return e.num().sign() >= 0;
    case Kind::Constant:
      return e.name() == "pi";
    case Kind::Exp:
    case Kind::Abs:
    case Kind::Cosh:
    case Kind::Sqrt:
    case Kind::BesselI:
      return true;
    case Kind::Pow:
      if (is_even_integer(e.arg(1)) || has_even_denominator(e.arg(1))) return true;
      return structurally_nonnegative(e.arg(0));
    case Kind::Mul:
    case Kind::Add:
      for (const auto& a : e.args())
        if (!structurally_nonnegative(a)) return false;
      return true;
    default:
      return false;
  }
}

bool has_negative_form(const Expr& e) {
  switch (e.kind()) {
    case Kind::Number:
      return e.num().sign() < 0;
    case Kind::Mul:
      return e.arg(0).is_number() && e.arg(0).num().sign() < 0;
    case Kind::Add:
      for (const auto& t : e.args())
        if (!t.is_number()) return has_negative_form(t);
      return false;
    default:
      return false;
  }
}

Expr add(std::vector<Expr> terms) {
  std::vector<Expr> flat;
  flat.reserve(terms.size());
  for (auto& t : terms) {
    if (t.kind() == Kind::Add) {
      flat.insert(flat.end(), t.args().begin(), t.args().end());
    } else {
      flat.push_back(std::move(t));
    }
  }
  Num constant = Num::of(Rational(0));
  std::vector<std::pair<Expr, Num>> groups;
  std::unordered_map<std::size_t, std::vector<std::size_t>> index;
  for (const auto& t : flat) {
    if (t.is_number()) {
      constant = num_add(constant, t.num());
      continue;
    }
    auto [c, rest] = split_coefficient(t);
    auto& bucket = index[rest.hash()];
    bool found = false;
    for (std::size_t i : bucket) {
      if (groups[i].first == rest) {
        groups[i].second = num_add(groups[i].second, c);
        found = true;
        break;
      }
    }
    if (!found) {
      bucket.push_back(groups.size());
      groups.emplace_back(rest, c);
    }
  }
  std::vector<Expr> out;
  for (const auto& [rest, c] : groups) {
    if (c.is_zero()) continue;
    out.push_back(with_coefficient(c, rest));
  }
  std::sort(out.begin(), out.end(), [](const Expr& a, const Expr& b) { return compare_term(a, b) < 0; });
  if (!constant.is_zero()) out.insert(out.begin(), Expr::number(constant));
  if (out.empty()) return Expr::number(constant.exact ? constant : Num::of(Rational(0)));
  if (out.size() == 1) return out[0];
  return raw(Kind::Add, std::move(out));
}

Expr mul(std::vector<Expr> factors) {
  std::vector<Expr> flat;
  flat.reserve(factors.size());
  for (auto& f : factors) {
    if (f.kind() == Kind::Mul) {
      flat.insert(flat.end(), f.args().begin(), f.args().end());
    } else {
      flat.push_back(std::move(f));
    }
  }
  Num coeff = Num::of(Rational(1));
  std::vector<std::pair<Expr, std::vector<Expr>>> groups;
  std::unordered_map<std::size_t, std::vector<std::size_t>> index;
  std::vector<Expr> exp_args;
  for (const auto& f : flat) {
    if (f.is_number()) {
      if (f.num().is_zero()) return Expr(0);
      coeff = num_mul(coeff, f.num());
      continue;
    }
    if (f.kind() == Kind::Exp) {
      exp_args.push_back(f.arg(0));
      continue;
    }
    auto [b, e] = base_exponent(f);
    auto& bucket = index[b.hash()];
    bool found = false;
    for (std::size_t i : bucket) {
      if (groups[i].first == b) {
        groups[i].second.push_back(e);
        found = true;
        break;
      }
    }
    if (!found) {
      bucket.push_back(groups.size());
      groups.push_back({b, {e}});
    }
  }
  std::vector<Expr> out;
  std::vector<Expr> pending;
  for (auto& [b, es] : groups) {
    Expr p = es.size() == 1 ? (es[0].is_one() ? b : power(b, es[0])) : power(b, add(es));
    if (p.is_number()) {
      if (p.num().is_zero()) return Expr(0);
      coeff = num_mul(coeff, p.num());
    } else if (p.kind() == Kind::Mul || p.kind() == Kind::Exp) {
      pending.push_back(p);
    } else {
      out.push_back(p);
    }
  }
  if (!exp_args.empty()) {
    Expr e = apply(Kind::Exp, add(exp_args));
    if (e.is_number()) {
      coeff = num_mul(coeff, e.num());
    } else if (e.kind() == Kind::Exp) {
      out.push_back(e);
    } else {
      pending.push_back(e);
    }
  }
  if (!pending.empty()) {
    out.insert(out.end(), pending.begin(), pending.end());
    out.push_back(Expr::number(coeff));
    return mul(std::move(out));
  }
  if (coeff.is_zero()) return Expr(0);
  std::sort(out.begin(), out.end(), [](const Expr& a, const Expr& b) { return compare_factor(a, b) < 0; });
  if (out.empty()) return Expr::number(coeff);
  if (out.size() == 1 && coeff.is_one() && coeff.exact) return out[0];
  if (!(coeff.is_one() && coeff.exact)) out.insert(out.begin(), Expr::number(coeff));
  return raw(Kind::Mul, std::move(out));
}

Expr power(const Expr& b, const Expr& e) {
  if (e.is_number()) {
    if (e.num().is_zero()) return Expr(1);
    if (e.num().is_one() && e.num().exact) return b;
    if (b.is_number()) return fold_number_power(b, e);
    switch (b.kind()) {
      case Kind::Pow: {
        const Expr& bb = b.arg(0);
        const Expr& be = b.arg(1);
        if (is_integer(e)) return power(bb, mul({be, e}));
        if (e.num().exact && be.is_number() && be.num().exact) {
          if (is_even_integer(be)) return power(apply(Kind::Abs, bb), mul({be, e}));
          if (has_even_denominator(be)) return power(bb, mul({be, e}));
          if (has_odd_denominator(be) && has_odd_denominator(e)) return power(bb, mul({be, e}));
        }
        break;
      }
      case Kind::Mul: {
        if (is_integer(e)) {
          std::vector<Expr> f;
          for (const auto& x : b.args()) f.push_back(power(x, e));
          return mul(std::move(f));
        }
        std::vector<Expr> nonneg;
        std::vector<Expr> other;
        for (const auto& x : b.args()) {
          if (structurally_nonnegative(x)) {
            nonneg.push_back(power(x, e));
          } else {
            other.push_back(x);
          }
        }
        if (nonneg.empty()) break;
        if (!other.empty()) {
          Expr rest = other.size() == 1 ? other[0] : raw(Kind::Mul, other);
          nonneg.push_back(raw(Kind::Pow, {rest, e}));
        }
        return mul(std::move(nonneg));
      }
      case Kind::Exp:
        return apply(Kind::Exp, mul({b.arg(0), e}));
      case Kind::Abs:
        if (is_even_integer(e)) return power(b.arg(0), e);
        break;
      default:
        break;
    }
    return raw(Kind::Pow, {b, e});
  }
  if (b.is_one()) return Expr(1);
  if (b.kind() == Kind::Exp) return apply(Kind::Exp, mul({b.arg(0), e}));
  return raw(Kind::Pow, {b, e});
}

namespace {

bool is_odd_function(Kind k) {
  return k == Kind::Sin || k == Kind::Tan || k == Kind::Sinh || k == Kind::Tanh || k == Kind::Atan ||
         k == Kind::Atanh;
}

double fold_function(Kind fn, double v, bool& ok) {
  ok = true;
  switch (fn) {
    case Kind::Exp: return std::exp(v);
    case Kind::Log: ok = v > 0; return ok ? std::log(v) : 0.0;
    case Kind::Sin: return std::sin(v);
    case Kind::Cos: return std::cos(v);
    case Kind::Tan: return std::tan(v);
    case Kind::Sinh: return std::sinh(v);
    case Kind::Cosh: return std::cosh(v);
    case Kind::Tanh: return std::tanh(v);
    case Kind::Atan: return std::atan(v);
    case Kind::Atanh: ok = std::abs(v) < 1; return ok ? std::atanh(v) : 0.0;
    case Kind::Abs: return std::abs(v);
    default: ok = false; return 0.0;
  }
}

Expr negated(const Expr& a) {
  if (a.kind() != Kind::Add) return mul({Expr(-1), a});
  std::vector<Expr> t;
  for (const auto& x : a.args()) t.push_back(mul({Expr(-1), x}));
  return add(std::move(t));
}

}  // namespace

Expr apply(Kind fn, const Expr& a) {
  switch (fn) {
    case Kind::Neg:
      return mul({Expr(-1), a});
    case Kind::Sqrt:
      return power(a, Expr(Rational(1, 2)));
    default:
      break;
  }
  if (a.is_number() && !a.num().exact) {
    bool ok = false;
    double v = fold_function(fn, a.num().f, ok);
    if (ok && std::isfinite(v)) return Expr::real(v);
  }
  if (fn == Kind::Abs) {
    if (a.is_number()) {
      Num n = a.num();
      if (n.exact) return Expr(n.q.sign() < 0 ? -n.q : n.q);
      return Expr::real(std::abs(n.f));
    }
    if (a.kind() == Kind::Abs || structurally_nonnegative(a)) return a;
    if (a.kind() == Kind::Mul && a.arg(0).is_number()) {
      auto [c, rest] = split_coefficient(a);
      Num ac = c.exact ? Num::of(c.q.sign() < 0 ? -c.q : c.q) : Num::of_double(std::abs(c.f));
      return mul({Expr::number(ac), apply(Kind::Abs, rest)});
    }
    if (has_negative_form(a)) return apply(Kind::Abs, negated(a));
    return raw(Kind::Abs, {a});
  }
  if (a.is_zero()) {
    switch (fn) {
      case Kind::Exp:
      case Kind::Cos:
      case Kind::Cosh:
        return Expr(1);
      case Kind::Log:
        break;
      default:
        return Expr(0);
    }
  }
  if (fn == Kind::Log && a.is_one()) return Expr(0);
  if (fn == Kind::Exp && a.kind() == Kind::Log) return a.arg(0);
  if (fn == Kind::Log && a.kind() == Kind::Exp) return a.arg(0);
  if (is_odd_function(fn) && has_negative_form(a)) return mul({Expr(-1), apply(fn, negated(a))});
  if ((fn == Kind::Cos || fn == Kind::Cosh) && has_negative_form(a)) return apply(fn, negated(a));
  return raw(fn, {a});
}

Expr bessel_i(const Expr& order, const Expr& z) { return raw(Kind::BesselI, {order, z}); }

Expr opaque_call(std::shared_ptr<const OpaqueFunction> fn, const Expr& arg) {
  std::string name = fn->name;
  return Expr(make_node(Kind::Opaque, Num{}, name, {arg}, std::move(fn)));
}

Expr operator+(const Expr& a, const Expr& b) { return add({a, b}); }
Expr operator-(const Expr& a, const Expr& b) { return add({a, mul({Expr(-1), b})}); }
Expr operator*(const Expr& a, const Expr& b) { return mul({a, b}); }
Expr operator/(const Expr& a, const Expr& b) { return mul({a, power(b, Expr(-1))}); }
Expr operator-(const Expr& a) { return mul({Expr(-1), a}); }

Expr sqrt(const Expr& a) { return apply(Kind::Sqrt, a); }
Expr exp(const Expr& a) { return apply(Kind::Exp, a); }
Expr log(const Expr& a) { return apply(Kind::Log, a); }
Expr sin(const Expr& a) { return apply(Kind::Sin, a); }
Expr cos(const Expr& a) { return apply(Kind::Cos, a); }
Expr tan(const Expr& a) { return apply(Kind::Tan, a); }
Expr sinh(const Expr& a) { return apply(Kind::Sinh, a); }
Expr cosh(const Expr& a) { return apply(Kind::Cosh, a); }
Expr tanh(const Expr& a) { return apply(Kind::Tanh, a); }
Expr atan(const Expr& a) { return apply(Kind::Atan, a); }
Expr atanh(const Expr& a) { return apply(Kind::Atanh, a); }
Expr abs(const Expr& a) { return apply(Kind::Abs, a); }

Expr simplify(const Expr& e) {
  switch (e.kind()) {
    case Kind::Number:
    case Kind::Constant:
    case Kind::Variable:
      return e;
    case Kind::Add: {
      std::vector<Expr> t;
      for (const auto& a : e.args()) t.push_back(simplify(a));
      return add(std::move(t));
    }
    case Kind::Mul: {
      std::vector<Expr> f;
      for (const auto& a : e.args()) f.push_back(simplify(a));
      return mul(std::move(f));
    }
    case Kind::Pow:
      return power(simplify(e.arg(0)), simplify(e.arg(1)));
    case Kind::Div:
      return simplify(e.arg(0)) / simplify(e.arg(1));
    case Kind::BesselI:
      return bessel_i(simplify(e.arg(0)), simplify(e.arg(1)));
    case Kind::Opaque:
      return Expr(make_node(Kind::Opaque, Num{}, e.name(), {simplify(e.arg(0))}, e.node()->opaque));
    default:
      return apply(e.kind(), simplify(e.arg(0)));
  }
}

}  // namespace lps
