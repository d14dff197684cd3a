#pragma once

#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "lps/expr.hpp"

namespace lps {

struct SourcePos {
  int line = 0;
  int column = 0;
};

struct ConstantDecl {
  std::string name;
  std::optional<Expr> value;  // exact when the literal allows it
  SourcePos pos;
};

struct Interval {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
};

struct ParsedProgram {
  std::string variable = "x";
  std::vector<ConstantDecl> constants;
  std::map<std::string, Expr> definitions;
  std::vector<std::string> order;  // definition order
  std::map<std::string, SourcePos> positions;
  std::optional<Interval> domain;
  std::optional<Interval> window;
  bool backward = false;

  const Expr& at(const std::string& name) const;
  bool has(const std::string& name) const { return definitions.count(name) != 0; }
  Bindings bindings() const;
  std::map<std::string, Expr> exact_bindings() const;
};

ParsedProgram parse(const std::string& source);
ParsedProgram parse_file(const std::string& path);

// Single expression. When `constants` is absent every identifier other than
// the variable is accepted as a named constant.
Expr parse_expression(const std::string& text, const std::string& variable = "x",
                      const std::optional<std::set<std::string>>& constants = std::nullopt);

}  // namespace lps
