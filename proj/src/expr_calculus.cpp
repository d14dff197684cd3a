#include <cmath>
#include <numbers>
#include <set>
#include <stdexcept>

#include "expr_node.hpp"
#include "lps/errors.hpp"
#include "lps/expr.hpp"

namespace lps {

namespace {

Expr d1(const Expr& e, const std::string& v) {
  if (!e.depends_on(v)) return Expr(0);
  switch (e.kind()) {
    case Kind::Constant:
    case Kind::Variable:
      return Expr(1);
    case Kind::Add: {
      std::vector<Expr> t;
      for (const auto& a : e.args()) t.push_back(d1(a, v));
      return add(std::move(t));
    }
    case Kind::Mul: {
      std::vector<Expr> terms;
      const auto& f = e.args();
      for (std::size_t i = 0; i < f.size(); ++i) {
        if (!f[i].depends_on(v)) continue;
        std::vector<Expr> g = f;
        g[i] = d1(f[i], v);
        terms.push_back(mul(std::move(g)));
      }
      return add(std::move(terms));
    }
    case Kind::Pow: {
      const Expr& b = e.arg(0);
      const Expr& x = e.arg(1);
      if (!x.depends_on(v)) return mul({x, power(b, x - Expr(1)), d1(b, v)});
      if (!b.depends_on(v)) return mul({e, log(b), d1(x, v)});
      return e * (d1(x, v) * log(b) + x * d1(b, v) / b);
    }
    case Kind::Neg:
      return -d1(e.arg(0), v);
    case Kind::Div: {
      const Expr& a = e.arg(0);
      const Expr& b = e.arg(1);
      return (d1(a, v) * b - a * d1(b, v)) / power(b, Expr(2));
    }
    case Kind::Sqrt:
      return d1(e.arg(0), v) / (Expr(2) * sqrt(e.arg(0)));
    default:
      break;
  }
  if (e.kind() == Kind::BesselI) {
    const Expr& nu = e.arg(0);
    const Expr& z = e.arg(1);
    if (nu.depends_on(v)) throw std::invalid_argument("derivative with respect to a Bessel order");
    Expr inner = bessel_i(nu + Expr(1), z) + (nu / z - Expr(1)) * e;
    return inner * d1(z, v);
  }
  if (e.kind() == Kind::Opaque) {
    const auto& fn = e.opaque();
    Expr outer = substitute(*fn.derivative, fn.parameter, e.arg(0));
    return outer * d1(e.arg(0), v);
  }
  const Expr& a = e.arg(0);
  Expr da = d1(a, v);
  switch (e.kind()) {
    case Kind::Exp: return e * da;
    case Kind::Log: return da / a;
    case Kind::Sin: return cos(a) * da;
    case Kind::Cos: return -sin(a) * da;
    case Kind::Tan: return (Expr(1) + power(tan(a), Expr(2))) * da;
    case Kind::Sinh: return cosh(a) * da;
    case Kind::Cosh: return sinh(a) * da;
    case Kind::Tanh: return (Expr(1) - power(tanh(a), Expr(2))) * da;
    case Kind::Atan: return da / (Expr(1) + power(a, Expr(2)));
    case Kind::Atanh: return da / (Expr(1) - power(a, Expr(2)));
    case Kind::Abs: return abs(a) / a * da;
    default: throw std::logic_error("unhandled node in differentiate");
  }
}

Expr rebuild(const Expr& e, const std::vector<Expr>& args) {
  switch (e.kind()) {
    case Kind::Add: return add(args);
    case Kind::Mul: return mul(args);
    case Kind::Pow: return power(args[0], args[1]);
    case Kind::Div: return args[0] / args[1];
    case Kind::BesselI: return bessel_i(args[0], args[1]);
    case Kind::Opaque: return opaque_call(e.node()->opaque, args[0]);
    default: return apply(e.kind(), args[0]);
  }
}

Expr subst(const Expr& e, const std::map<std::string, Expr>& m) {
  if (e.is_symbol()) {
    auto it = m.find(e.name());
    return it == m.end() ? e : it->second;
  }
  if (e.is_number()) return e;
  bool touched = false;
  for (const auto& [k, _] : m) {
    if (e.depends_on(k)) {
      touched = true;
      break;
    }
  }
  if (!touched) return e;
  std::vector<Expr> args;
  args.reserve(e.args().size());
  for (const auto& a : e.args()) args.push_back(subst(a, m));
  return rebuild(e, args);
}

Expr number_from_double(double v) {
  if (std::isfinite(v) && std::floor(v) == v && std::abs(v) < 9.0e15) return Expr(static_cast<std::int64_t>(v));
  for (std::int64_t den = 2; den <= (1 << 20); den *= 2) {
    double n = v * static_cast<double>(den);
    if (std::floor(n) == n && std::abs(n) < 9.0e15) return Expr(Rational(static_cast<std::int64_t>(n), den));
  }
  return Expr::real(v);
}

void collect_symbols(const Expr& e, std::set<std::string>& out) {
  if (e.is_symbol()) {
    if (e.name() != "pi") out.insert(e.name());
    return;
  }
  for (const auto& a : e.args()) collect_symbols(a, out);
}

double checked(double v, const char* what) {
  if (!std::isfinite(v)) throw DomainError(std::string("non-finite value in ") + what);
  return v;
}

double eval_function(Kind k, double a) {
  switch (k) {
    case Kind::Exp: return checked(std::exp(a), "exp");
    case Kind::Log:
      if (!(a > 0)) throw DomainError("log of non-positive value");
      return std::log(a);
    case Kind::Sin: return std::sin(a);
    case Kind::Cos: return std::cos(a);
    case Kind::Tan: return checked(std::tan(a), "tan");
    case Kind::Sinh: return checked(std::sinh(a), "sinh");
    case Kind::Cosh: return checked(std::cosh(a), "cosh");
    case Kind::Tanh: return std::tanh(a);
    case Kind::Atan: return std::atan(a);
    case Kind::Atanh:
      if (!(std::abs(a) < 1)) throw DomainError("atanh outside (-1, 1)");
      return std::atanh(a);
    case Kind::Abs: return std::abs(a);
    case Kind::Sqrt:
      if (a < 0) throw DomainError("sqrt of negative value");
      return std::sqrt(a);
    default: throw std::logic_error("not a function node");
  }
}

double eval_bessel(double nu, double z) {
  if (z < 0) throw DomainError("Bessel argument must be non-negative");
  return checked(bessel_i_value(nu, z), "besselie");
}

double eval_rec(const Expr& e, const Bindings& b) {
  switch (e.kind()) {
    case Kind::Number:
      return e.num().value();
    case Kind::Constant:
    case Kind::Variable: {
      auto it = b.find(e.name());
      if (it != b.end()) return it->second;
      if (e.name() == "pi") return std::numbers::pi;
      throw std::invalid_argument("unbound symbol '" + e.name() + "'");
    }
    case Kind::Add: {
      double s = 0;
      for (const auto& a : e.args()) s += eval_rec(a, b);
      return s;
    }
    case Kind::Mul: {
      double p = 1;
      for (const auto& a : e.args()) p *= eval_rec(a, b);
      return p;
    }
    case Kind::Pow: {
      double base = eval_rec(e.arg(0), b);
      const Expr& x = e.arg(1);
      if (x.is_number() && x.num().exact) return eval_pow(base, x.num().value(), true, x.num().q);
      return eval_pow(base, eval_rec(x, b), false, Rational());
    }
    case Kind::Neg:
      return -eval_rec(e.arg(0), b);
    case Kind::Div: {
      double d = eval_rec(e.arg(1), b);
      if (d == 0) throw DomainError("division by zero");
      return eval_rec(e.arg(0), b) / d;
    }
    case Kind::BesselI:
      return eval_bessel(eval_rec(e.arg(0), b), eval_rec(e.arg(1), b));
    case Kind::Opaque:
      return checked(e.opaque().eval(eval_rec(e.arg(0), b)), "opaque function");
    default:
      return eval_function(e.kind(), eval_rec(e.arg(0), b));
  }
}

}  // namespace

Expr with_args(const Expr& e, const std::vector<Expr>& args) {
  if (e.is_number() || e.is_symbol()) return e;
  return rebuild(e, args);
}

double eval_pow(double b, double e, bool exact_exponent, const Rational& q) {
  if (b == 0.0 && e < 0) throw DomainError(e == -1 ? "division by zero" : "0 raised to a negative power");
  if (exact_exponent) {
    if (q == Rational(2)) return b * b;
    if (q == Rational(-1)) return 1.0 / b;
    if (q == Rational(1, 2)) {
      if (b < 0) throw DomainError("sqrt of negative value");
      return std::sqrt(b);
    }
    if (b < 0 && !q.is_integer()) {
      if (q.den() % 2 == 0) throw DomainError("even root of negative value");
      double m = std::pow(-b, e);
      return checked(q.num() % 2 == 0 ? m : -m, "pow");
    }
    return checked(std::pow(b, e), "pow");
  }
  if (b < 0 && std::floor(e) != e) throw DomainError("non-integer power of negative value");
  return checked(std::pow(b, e), "pow");
}

Expr differentiate(const Expr& e, const std::string& var, int order) {
  if (order < 1) throw std::invalid_argument("derivative order must be at least 1");
  Expr r = e;
  for (int i = 0; i < order; ++i) r = d1(r, var);
  return r;
}

Expr substitute(const Expr& e, const std::string& symbol, const Expr& replacement) {
  return subst(e, {{symbol, replacement}});
}

Expr substitute(const Expr& e, const std::map<std::string, Expr>& replacements) { return subst(e, replacements); }

Expr bind(const Expr& e, const std::map<std::string, double>& values) {
  std::map<std::string, Expr> m;
  for (const auto& [k, v] : values) m.emplace(k, number_from_double(v));
  return subst(e, m);
}

std::vector<std::string> free_symbols(const Expr& e) {
  std::set<std::string> s;
  collect_symbols(e, s);
  return {s.begin(), s.end()};
}

bool is_transcendental(const Expr& e) {
  switch (e.kind()) {
    case Kind::Number:
    case Kind::Constant:
    case Kind::Variable:
      return false;
    case Kind::Add:
    case Kind::Mul:
    case Kind::Neg:
    case Kind::Div:
      for (const auto& a : e.args())
        if (is_transcendental(a)) return true;
      return false;
    case Kind::Pow: {
      auto r = e.arg(1).rational();
      if (!r || !r->is_integer()) return true;
      return is_transcendental(e.arg(0));
    }
    default:
      return true;
  }
}

double eval(const Expr& e, const Bindings& bindings) { return checked(eval_rec(e, bindings), "expression"); }

// ---- compiled evaluation ---------------------------------------------------

namespace {

struct Emitter {
  std::vector<Compiled::Instr>* code;
  std::vector<std::shared_ptr<const OpaqueFunction>>* keep;
  const std::vector<std::string>* slots;
  const Bindings* constants;
  std::size_t depth = 0;
  std::size_t max_depth = 0;

  void push() {
    ++depth;
    max_depth = std::max(max_depth, depth);
  }

  void emit(const Expr& e) {
    switch (e.kind()) {
      case Kind::Number:
        code->push_back({Kind::Number, 0, e.num().value(), nullptr});
        push();
        return;
      case Kind::Constant:
      case Kind::Variable: {
        for (std::size_t i = 0; i < slots->size(); ++i) {
          if ((*slots)[i] == e.name()) {
            code->push_back({Kind::Variable, static_cast<std::uint32_t>(i), 0.0, nullptr});
            push();
            return;
          }
        }
        auto it = constants->find(e.name());
        double v = 0;
        if (it != constants->end()) {
          v = it->second;
        } else if (e.name() == "pi") {
          v = std::numbers::pi;
        } else {
          throw std::invalid_argument("unbound symbol '" + e.name() + "' in compiled expression");
        }
        code->push_back({Kind::Number, 0, v, nullptr});
        push();
        return;
      }
      case Kind::Add:
      case Kind::Mul:
        for (const auto& a : e.args()) emit(a);
        code->push_back({e.kind(), static_cast<std::uint32_t>(e.args().size()), 0.0, nullptr});
        depth -= e.args().size() - 1;
        return;
      case Kind::Pow: {
        emit(e.arg(0));
        const Expr& x = e.arg(1);
        if (x.is_number() && x.num().exact) {
          // Nonzero count is 1 + index into the exact exponent table.
          exact_.push_back(x.num().q);
          code->push_back({Kind::Pow, static_cast<std::uint32_t>(exact_.size()), x.num().value(), nullptr});
          return;
        }
        emit(x);
        code->push_back({Kind::Pow, 0, 0.0, nullptr});
        --depth;
        return;
      }
      case Kind::Div:
        emit(e.arg(0));
        emit(e.arg(1));
        code->push_back({Kind::Div, 0, 0.0, nullptr});
        --depth;
        return;
      case Kind::BesselI:
        emit(e.arg(0));
        emit(e.arg(1));
        code->push_back({Kind::BesselI, 0, 0.0, nullptr});
        --depth;
        return;
      case Kind::Opaque:
        emit(e.arg(0));
        keep->push_back(e.node()->opaque);
        code->push_back({Kind::Opaque, 0, 0.0, e.node()->opaque.get()});
        return;
      default:
        emit(e.arg(0));
        code->push_back({e.kind(), 0, 0.0, nullptr});
        return;
    }
  }

  std::vector<Rational> exact_;
};

thread_local std::vector<double> tl_stack;

}  // namespace

Compiled::Compiled(const Expr& e, const std::vector<std::string>& slots, const Bindings& constants) {
  Emitter em{&code_, &keep_, &slots, &constants, 0, 0, {}};
  em.emit(e);
  stack_size_ = em.max_depth + 1;
  exact_exponents_ = std::move(em.exact_);
}

double Compiled::operator()(const double* values) const {
  auto& st = tl_stack;
  if (st.size() < stack_size_) st.resize(stack_size_);
  double* s = st.data();
  std::size_t sp = 0;
  for (const auto& in : code_) {
    switch (in.op) {
      case Kind::Number:
        s[sp++] = in.value;
        break;
      case Kind::Variable:
        s[sp++] = values[in.count];
        break;
      case Kind::Add: {
        double acc = 0;
        for (std::uint32_t i = 0; i < in.count; ++i) acc += s[sp - in.count + i];
        sp -= in.count;
        s[sp++] = acc;
        break;
      }
      case Kind::Mul: {
        double acc = 1;
        for (std::uint32_t i = 0; i < in.count; ++i) acc *= s[sp - in.count + i];
        sp -= in.count;
        s[sp++] = acc;
        break;
      }
      case Kind::Pow:
        if (in.count == 0) {
          double x = s[--sp];
          s[sp - 1] = eval_pow(s[sp - 1], x, false, Rational());
        } else {
          const Rational& q = exact_exponents_[in.count - 1];
          s[sp - 1] = eval_pow(s[sp - 1], in.value, true, q);
        }
        break;
      case Kind::Div: {
        double d = s[--sp];
        if (d == 0) throw DomainError("division by zero");
        s[sp - 1] /= d;
        break;
      }
      case Kind::BesselI: {
        double z = s[--sp];
        s[sp - 1] = eval_bessel(s[sp - 1], z);
        break;
      }
      case Kind::Opaque:
        s[sp - 1] = checked(in.fn->eval(s[sp - 1]), "opaque function");
        break;
      case Kind::Neg:
        s[sp - 1] = -s[sp - 1];
        break;
      default:
        s[sp - 1] = eval_function(in.op, s[sp - 1]);
        break;
    }
  }
  return checked(s[0], "expression");
}

}  // namespace lps
