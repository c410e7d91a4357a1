#pragma once

#include <stdexcept>
#include <string>

namespace dde {

// Base class for all library errors.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Evaluation outside the grid interval.
class OutOfDomain : public Error {
public:
  using Error::Error;
};

// A history segment fed to a V_alpha-only operation violates the slope bound.
class NotInValpha : public Error {
public:
  using Error::Error;
};

class DimensionMismatch : public Error {
public:
  using Error::Error;
};

class LagOutOfRange : public Error {
public:
  using Error::Error;
};

class DelayOutOfRange : public Error {
public:
  using Error::Error;
};

class KernelDomain : public Error {
public:
  using Error::Error;
};

// The weight rate required by the contraction condition exceeds the cap.
class RhoOverflow : public Error {
public:
  using Error::Error;
};

// Picard iteration hit the iteration cap with a non-contracting ratio.
class NoConvergence : public Error {
public:
  using Error::Error;
};

class ParseError : public Error {
public:
  ParseError(int line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

private:
  int line_;
};

class ValidationError : public Error {
public:
  using Error::Error;
};

}  // namespace dde
