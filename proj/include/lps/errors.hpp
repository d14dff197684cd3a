#pragma once

#include <stdexcept>
#include <string>

namespace lps {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SyntaxError : public Error {
 public:
  SyntaxError(const std::string& msg, int line, int column)
      : Error(msg + " at line " + std::to_string(line) + ", column " + std::to_string(column)),
        message_(msg),
        line_(line),
        column_(column) {}
  const std::string& message() const { return message_; }
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  std::string message_;
  int line_;
  int column_;
};

class UndeclaredIdentifier : public SyntaxError {
 public:
  UndeclaredIdentifier(const std::string& name, int line, int column)
      : SyntaxError("undeclared identifier '" + name + "'", line, column), name_(name) {}
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

#define LPS_DEFINE_ERROR(Name)        \
  class Name : public Error {         \
   public:                            \
    using Error::Error;               \
  };

LPS_DEFINE_ERROR(DomainError)
LPS_DEFINE_ERROR(NonparabolicError)
LPS_DEFINE_ERROR(UnsupportedCoefficient)
LPS_DEFINE_ERROR(DegenerateTransform)
LPS_DEFINE_ERROR(IllConditionedFit)
LPS_DEFINE_ERROR(SingularOnInterval)
LPS_DEFINE_ERROR(NotReducible)
LPS_DEFINE_ERROR(TableMismatch)
LPS_DEFINE_ERROR(RankDeficiency)
LPS_DEFINE_ERROR(UnknownKernel)
LPS_DEFINE_ERROR(ConstraintViolation)
LPS_DEFINE_ERROR(NonconvergentQuadrature)
LPS_DEFINE_ERROR(OutOfValidatedRange)

#undef LPS_DEFINE_ERROR

}  // namespace lps
