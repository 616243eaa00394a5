#pragma once

#include <stdexcept>
#include <string>

namespace xmcnn {

// Base for library failures detected at runtime. Plain precondition
// violations (bad shapes, out-of-range arguments) throw
// std::invalid_argument instead.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed input file; message carries path and line number.
class ParseError : public Error {
 public:
  ParseError(const std::string& path, long line, const std::string& what)
      : Error(path + ":" + std::to_string(line) + ": " + what),
        path_(path),
        line_(line) {}
  const std::string& path() const { return path_; }
  long line() const { return line_; }

 private:
  std::string path_;
  long line_;
};

// Well-formed but self-contradictory input (e.g. conflicting relevance
// assignments for the same pair).
class InconsistencyError : public Error {
 public:
  using Error::Error;
};

// Singular systems, non-finite intermediate values.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// A retrieval metric was requested in a configuration where it has no
// defined value (e.g. recall with zero relevant items).
class UndefinedMetricError : public Error {
 public:
  using Error::Error;
};

}  // namespace xmcnn
