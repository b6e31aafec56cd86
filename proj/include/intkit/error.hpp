#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace intkit {

/// Root of every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed expression text. `offset` is the byte offset of the offending token.
class SyntaxError : public Error {
 public:
  SyntaxError(const std::string& what, std::size_t offset)
      : Error(what + " at offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class UnknownFunction : public SyntaxError {
 public:
  UnknownFunction(const std::string& name, std::size_t offset)
      : SyntaxError("unknown function '" + name + "'", offset), name_(name) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

class UnboundVariable : public Error {
 public:
  explicit UnboundVariable(const std::string& name)
      : Error("unbound variable '" + name + "'"), name_(name) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

/// Arithmetic domain violation during evaluation (pole, log of zero, ...).
/// `subtree` is the rendered sub-expression whose evaluation failed.
class DomainError : public Error {
 public:
  DomainError(const std::string& what, std::string subtree)
      : Error(what + " in '" + subtree + "'"), subtree_(std::move(subtree)) {}
  const std::string& subtree() const noexcept { return subtree_; }

 private:
  std::string subtree_;
};

class NotDifferentiable : public Error {
 public:
  using Error::Error;
};

/// Inputs violate an operation's precondition (non-exact field, bad mesh, ...).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Iterative method failed or a numeric guard tripped.
class NumericError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public NumericError {
 public:
  using NumericError::NumericError;
};

}  // namespace intkit
