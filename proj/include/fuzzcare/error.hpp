#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fuzzcare {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A crisp value falls outside the universe of the variable it is fuzzified against.
class OutOfUniverse : public Error {
 public:
  OutOfUniverse(std::string variable, double value, double lo, double hi);

  const std::string& variable() const noexcept { return variable_; }
  double value() const noexcept { return value_; }

 private:
  std::string variable_;
  double value_;
};

class EmptyAggregate : public Error {
 public:
  EmptyAggregate() : Error("aggregate: no clipped sets (no rule fired)") {}
};

class ZeroMass : public Error {
 public:
  ZeroMass() : Error("defuzzify: aggregated envelope is identically zero") {}
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& message);

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

class UnknownVariable : public Error {
 public:
  explicit UnknownVariable(const std::string& name) : Error("unknown variable '" + name + "'"), name_(name) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

class UnknownTerm : public Error {
 public:
  UnknownTerm(const std::string& variable, const std::string& term)
      : Error("variable '" + variable + "' has no term '" + term + "'") {}
};

class MissingVariable : public Error {
 public:
  explicit MissingVariable(const std::string& name) : Error("no fuzzified input for variable '" + name + "'"), name_(name) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

class DuplicateOverride : public Error {
 public:
  using Error::Error;
};

class NoRuleFired : public Error {
 public:
  NoRuleFired() : Error("infer: no rule fired") {}
};

class CalibrationFailed : public Error {
 public:
  using Error::Error;
};

/// Malformed knowledge-base document or invalid variable definition.
class KbError : public Error {
 public:
  using Error::Error;
};

}  // namespace fuzzcare
