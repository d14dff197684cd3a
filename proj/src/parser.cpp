#include "lps/parser.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "lps/errors.hpp"

namespace lps {

namespace {

enum class Tok { Number, Ident, Op, Newline, End };

struct Token {
  Tok kind;
  std::string text;
  int line;
  int column;
};

std::vector<Token> lex(const std::string& src) {
  std::vector<Token> out;
  int line = 1;
  int col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    i += n;
    col += static_cast<int>(n);
  };
  while (i < src.size()) {
    char c = src[i];
    if (c == '#') {
      while (i < src.size() && src[i] != '\n') ++i;
      continue;
    }
    if (c == '\n') {
      out.push_back({Tok::Newline, "\n", line, col});
      ++i;
      ++line;
      col = 1;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    int start_col = col;
    if (std::isdigit(static_cast<unsigned char>(c)) || (c == '.' && i + 1 < src.size() && std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
      std::size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      if (j < src.size() && src[j] == '.') {
        ++j;
        while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      }
      if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < src.size() && (src[k] == '+' || src[k] == '-')) ++k;
        if (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) {
          while (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) ++k;
          j = k;
        }
      }
      out.push_back({Tok::Number, src.substr(i, j - i), line, start_col});
      advance(j - i);
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
      out.push_back({Tok::Ident, src.substr(i, j - i), line, start_col});
      advance(j - i);
      continue;
    }
    if (std::string("+-*/^(),;=").find(c) != std::string::npos) {
      out.push_back({Tok::Op, std::string(1, c), line, start_col});
      advance(1);
      continue;
    }
    throw SyntaxError(std::string("unexpected character '") + c + "'", line, start_col);
  }
  out.push_back({Tok::End, "", line, col});
  return out;
}

const std::map<std::string, Kind>& function_table() {
  static const std::map<std::string, Kind> table = {
      {"exp", Kind::Exp},       {"log", Kind::Log},     {"ln", Kind::Log},       {"sin", Kind::Sin},
      {"cos", Kind::Cos},       {"tan", Kind::Tan},     {"sinh", Kind::Sinh},    {"cosh", Kind::Cosh},
      {"tanh", Kind::Tanh},     {"atan", Kind::Atan},   {"arctan", Kind::Atan},  {"atanh", Kind::Atanh},
      {"arctanh", Kind::Atanh}, {"sqrt", Kind::Sqrt},   {"abs", Kind::Abs},
  };
  return table;
}

Expr number_literal(const Token& t) {
  if (auto q = Rational::from_decimal(t.text)) return Expr(*q);
  return Expr::real(std::strtod(t.text.c_str(), nullptr));
}

class Parser {
 public:
  Parser(std::vector<Token> toks, ParsedProgram* prog, bool strict)
      : toks_(std::move(toks)), prog_(prog), strict_(strict) {}

  void program() {
    while (peek().kind != Tok::End) {
      if (peek().kind == Tok::Newline || is_op(";")) {
        ++pos_;
        continue;
      }
      statement();
      if (peek().kind == Tok::End) break;
      if (peek().kind != Tok::Newline && !is_op(";")) fail("expected end of statement");
    }
  }

  Expr single_expression() {
    skip_newlines();
    Expr e = expression();
    skip_newlines();
    if (peek().kind != Tok::End) fail("unexpected trailing input");
    return e;
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  const Token& next() { return toks_[pos_++]; }
  bool is_op(const char* op) const { return peek().kind == Tok::Op && peek().text == op; }

  [[noreturn]] void fail(const std::string& msg) const {
    const Token& t = peek();
    std::string what = t.kind == Tok::End ? "end of input" : (t.kind == Tok::Newline ? "end of line" : "'" + t.text + "'");
    throw SyntaxError(msg + " near " + what, t.line, t.column);
  }

  void expect(const char* op) {
    if (!is_op(op)) fail(std::string("expected '") + op + "'");
    ++pos_;
  }

  void skip_newlines() {
    while (peek().kind == Tok::Newline) ++pos_;
  }

  std::string identifier() {
    if (peek().kind != Tok::Ident) fail("expected identifier");
    return next().text;
  }

  void statement() {
    const Token& head = peek();
    if (head.kind != Tok::Ident) fail("expected a statement");
    if (head.text == "var") {
      ++pos_;
      prog_->variable = identifier();
      return;
    }
    if (head.text == "const") {
      ++pos_;
      do {
        const Token& nt = peek();
        ConstantDecl d{identifier(), std::nullopt, {nt.line, nt.column}};
        if (is_op("=")) {
          ++pos_;
          Expr v = expression();
          if (!v.is_number()) {
            try {
              v = Expr::real(eval(v, prog_->bindings()));
            } catch (const std::exception&) {
              throw SyntaxError("constant value must be numeric", nt.line, nt.column);
            }
          }
          d.value = v;
        }
        declared_.insert(d.name);
        prog_->constants.push_back(d);
        if (!is_op(",")) break;
        ++pos_;
      } while (true);
      return;
    }
    std::string name = identifier();
    SourcePos pos{head.line, head.column};
    expect("=");
    if (name == "domain" || name == "window") {
      Interval iv = interval();
      (name == "domain" ? prog_->domain : prog_->window) = iv;
      return;
    }
    if (name == "direction") {
      const Token& t = peek();
      std::string d = identifier();
      if (d == "backward") {
        prog_->backward = true;
      } else if (d == "forward") {
        prog_->backward = false;
      } else {
        throw SyntaxError("direction must be 'forward' or 'backward'", t.line, t.column);
      }
      return;
    }
    if (name == prog_->variable || declared_.count(name)) {
      throw SyntaxError("cannot assign to '" + name + "'", head.line, head.column);
    }
    Expr e = expression();
    if (!prog_->definitions.count(name)) prog_->order.push_back(name);
    prog_->definitions.insert_or_assign(name, e);
    prog_->positions[name] = pos;
  }

  double bound() {
    std::size_t save = pos_;
    double sign = 1.0;
    if (is_op("-") || is_op("+")) sign = next().text == "-" ? -1.0 : 1.0;
    if (peek().kind == Tok::Ident && (peek().text == "inf" || peek().text == "infinity")) {
      ++pos_;
      return sign * std::numeric_limits<double>::infinity();
    }
    pos_ = save;
    const Token& t = peek();
    Expr e = expression();
    try {
      return eval(e, prog_->bindings());
    } catch (const std::exception& ex) {
      throw SyntaxError(std::string("interval bound is not numeric: ") + ex.what(), t.line, t.column);
    }
  }

  Interval interval() {
    const Token& t = peek();
    expect("(");
    Interval iv;
    iv.lo = bound();
    expect(",");
    iv.hi = bound();
    expect(")");
    if (!(iv.lo < iv.hi)) throw SyntaxError("interval must satisfy lo < hi", t.line, t.column);
    return iv;
  }

  Expr expression() {
    Expr e = term();
    while (is_op("+") || is_op("-")) {
      bool minus = next().text == "-";
      Expr r = term();
      e = minus ? e - r : e + r;
    }
    return e;
  }

  Expr term() {
    Expr e = power_expr();
    while (is_op("*") || is_op("/")) {
      bool div = next().text == "/";
      Expr r = power_expr();
      e = div ? e / r : e * r;
    }
    return e;
  }

  // Right-associative; the base is a unary expression, so -x^2 = (-x)^2.
  Expr power_expr() {
    Expr base = unary();
    if (is_op("^")) {
      ++pos_;
      Expr ex = power_expr();
      return power(base, ex);
    }
    return base;
  }

  Expr unary() {
    if (is_op("-")) {
      ++pos_;
      return -unary();
    }
    if (is_op("+")) {
      ++pos_;
      return unary();
    }
    return primary();
  }

  Expr primary() {
    const Token& t = peek();
    if (t.kind == Tok::Number) {
      ++pos_;
      return number_literal(t);
    }
    if (is_op("(")) {
      ++pos_;
      Expr e = expression();
      expect(")");
      return e;
    }
    if (t.kind != Tok::Ident) fail("expected an expression");
    ++pos_;
    if (is_op("(")) {
      ++pos_;
      if (t.text == "besselie") {
        Expr nu = expression();
        expect(",");
        Expr z = expression();
        expect(")");
        return bessel_i(nu, z);
      }
      auto it = function_table().find(t.text);
      if (it == function_table().end()) throw SyntaxError("unknown function '" + t.text + "'", t.line, t.column);
      Expr a = expression();
      expect(")");
      return apply(it->second, a);
    }
    if (t.text == prog_->variable) return Expr::variable(t.text);
    if (t.text == "t" && !declared_.count("t")) return Expr::variable("t");
    auto def = prog_->definitions.find(t.text);
    if (def != prog_->definitions.end()) return def->second;
    if (t.text == "pi" || declared_.count(t.text)) return Expr::constant(t.text);
    if (!strict_ && !function_table().count(t.text)) {
      declared_.insert(t.text);
      return Expr::constant(t.text);
    }
    throw UndeclaredIdentifier(t.text, t.line, t.column);
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  ParsedProgram* prog_;
  bool strict_;
  std::set<std::string> declared_;

  friend Expr lps::parse_expression(const std::string&, const std::string&, const std::optional<std::set<std::string>>&);
};

}  // namespace

const Expr& ParsedProgram::at(const std::string& name) const {
  auto it = definitions.find(name);
  if (it == definitions.end()) throw Error("missing definition of '" + name + "'");
  return it->second;
}

Bindings ParsedProgram::bindings() const {
  Bindings b;
  for (const auto& c : constants)
    if (c.value) b[c.name] = c.value->num().value();
  return b;
}

std::map<std::string, Expr> ParsedProgram::exact_bindings() const {
  std::map<std::string, Expr> b;
  for (const auto& c : constants)
    if (c.value) b.emplace(c.name, *c.value);
  return b;
}

ParsedProgram parse(const std::string& source) {
  ParsedProgram prog;
  Parser p(lex(source), &prog, true);
  p.program();
  return prog;
}

ParsedProgram parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse(ss.str());
  } catch (const SyntaxError& e) {
    throw SyntaxError(path + ": " + e.message(), e.line(), e.column());
  }
}

Expr parse_expression(const std::string& text, const std::string& variable,
                      const std::optional<std::set<std::string>>& constants) {
  ParsedProgram prog;
  prog.variable = variable;
  Parser p(lex(text), &prog, constants.has_value());
  if (constants) p.declared_ = *constants;
  return p.single_expression();
}

}  // namespace lps
