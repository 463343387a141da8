#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace shapeflow {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Degenerate facet, open surface where a closed one is required, and similar.
class GeometryError : public Error {
 public:
  using Error::Error;
};

/// Raised when a mesh update produces non-positive element areas.
class InversionError : public GeometryError {
 public:
  InversionError(const std::string& what, std::vector<int> elements)
      : GeometryError(what), elements_(std::move(elements)) {}

  const std::vector<int>& elements() const noexcept { return elements_; }

 private:
  std::vector<int> elements_;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line)
      : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}

  int line() const noexcept { return line_; }

 private:
  int line_;
};

/// Linear solver failure. Carries the last relative residual reached.
class SolverError : public Error {
 public:
  SolverError(const std::string& what, double residual)
      : Error(what + " (relative residual " + std::to_string(residual) + ")"),
        residual_(residual) {}

  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Cached model fields were requested for a mesh other than the one solved on.
class StaleStateError : public Error {
 public:
  using Error::Error;
};

}  // namespace shapeflow
