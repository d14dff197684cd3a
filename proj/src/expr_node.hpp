#pragma once

#include <memory>
#include <string>
#include <vector>

#include "lps/expr.hpp"

namespace lps::detail {

struct Node {
  Kind kind = Kind::Number;
  Num num;
  std::string name;
  std::vector<Expr> args;
  std::shared_ptr<const OpaqueFunction> opaque;
  std::size_t hash = 0;
  bool has_opaque = false;
};

std::shared_ptr<const Node> make_node(Kind k, Num num, std::string name, std::vector<Expr> args,
                                      std::shared_ptr<const OpaqueFunction> fn = nullptr);

inline bool is_function_kind(Kind k) {
  switch (k) {
    case Kind::Exp:
    case Kind::Log:
    case Kind::Sin:
    case Kind::Cos:
    case Kind::Tan:
    case Kind::Sinh:
    case Kind::Cosh:
    case Kind::Tanh:
    case Kind::Atan:
    case Kind::Atanh:
    case Kind::Abs:
    case Kind::Sqrt:
      return true;
    default:
      return false;
  }
}

const char* function_name(Kind k);

}  // namespace lps::detail
