#pragma once

#include <stdexcept>
#include <string>

namespace symlie {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegenerateDivision : public Error {
 public:
  using Error::Error;
};

class SubstitutionError : public Error {
 public:
  using Error::Error;
};

class NearSingularEvaluation : public Error {
 public:
  using Error::Error;
};

class MissingBinding : public Error {
 public:
  using Error::Error;
};

class OrderLimit : public Error {
 public:
  using Error::Error;
};

class InvalidBinding : public Error {
 public:
  using Error::Error;
};

class CoordinateMismatch : public Error {
 public:
  using Error::Error;
};

class SingularTransform : public Error {
 public:
  using Error::Error;
};

class ClosureViolation : public Error {
 public:
  using Error::Error;
};

class RankError : public Error {
 public:
  using Error::Error;
};

class JacobiViolation : public Error {
 public:
  using Error::Error;
};

class UnstableRank : public Error {
 public:
  using Error::Error;
};

class FiniteTimeEscape : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& message, int line, int column)
      : Error(message + " at line " + std::to_string(line) + ", column " +
              std::to_string(column)),
        line_(line),
        column_(column) {}

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

}  // namespace symlie
