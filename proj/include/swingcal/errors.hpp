#pragma once

#include <stdexcept>
#include <string>

namespace swingcal {

/// Broad failure class; the CLI maps each to an exit code.
enum class ErrorKind { Usage, Data, Numerical };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& what) : Error(ErrorKind::Usage, what) {}
};

// Data errors: the input cannot be processed as given.

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(ErrorKind::Data, what) {}
};

class SizeError : public Error {
 public:
  explicit SizeError(const std::string& what) : Error(ErrorKind::Data, what) {}
};

class TargetError : public Error {
 public:
  explicit TargetError(const std::string& what) : Error(ErrorKind::Data, what) {}
};

class MissingTargetError : public Error {
 public:
  explicit MissingTargetError(const std::string& what) : Error(ErrorKind::Data, what) {}
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(ErrorKind::Data, "line " + std::to_string(line) + ": " + what), line_(line) {}

  /// 1-based line number in the offending file (the header is line 1).
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Numerical errors: these indicate a solver or arithmetic failure rather than bad input.

class DivisionError : public Error {
 public:
  explicit DivisionError(const std::string& what) : Error(ErrorKind::Numerical, what) {}
};

class ConvergenceError : public Error {
 public:
  explicit ConvergenceError(const std::string& what) : Error(ErrorKind::Numerical, what) {}
};

class InstabilityError : public Error {
 public:
  explicit InstabilityError(const std::string& what) : Error(ErrorKind::Numerical, what) {}
};

class BoundViolationError : public Error {
 public:
  explicit BoundViolationError(const std::string& what) : Error(ErrorKind::Numerical, what) {}
};

}  // namespace swingcal
