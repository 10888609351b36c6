#pragma once

#include <stdexcept>
#include <string>

namespace grevf {

/// Input outside the configured domain, invalid interval, etc.
class DomainError : public std::domain_error {
public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// A computation produced or encountered a non-finite value.
class NumericError : public std::runtime_error {
public:
  explicit NumericError(const std::string& what, long index = -1)
      : std::runtime_error(what), index_(index) {}

  /// Index of the offending node/sample, or -1 when not applicable.
  long index() const noexcept { return index_; }

private:
  long index_;
};

/// Cholesky failed even at the largest jitter in the schedule.
class NotPositiveDefiniteError : public std::runtime_error {
public:
  NotPositiveDefiniteError(const std::string& what, double attempted_jitter)
      : std::runtime_error(what), attempted_jitter_(attempted_jitter) {}

  double attempted_jitter() const noexcept { return attempted_jitter_; }

private:
  double attempted_jitter_;
};

/// Dimension mismatch between operands.
class ShapeError : public std::invalid_argument {
public:
  explicit ShapeError(const std::string& what) : std::invalid_argument(what) {}
};

/// Request exceeds the representable capacity (e.g. more eigenpairs than nodes).
class CapacityError : public std::invalid_argument {
public:
  explicit CapacityError(const std::string& what) : std::invalid_argument(what) {}
};

/// Numerically degenerate spectrum or rank deficit.
class RankError : public std::runtime_error {
public:
  explicit RankError(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed input file.
class ParseError : public std::runtime_error {
public:
  ParseError(const std::string& what, long line = -1)
      : std::runtime_error(what), line_(line) {}

  long line() const noexcept { return line_; }

private:
  long line_;
};

/// Optimizer produced a non-finite objective.
class DivergenceError : public std::runtime_error {
public:
  DivergenceError(const std::string& what, long iteration)
      : std::runtime_error(what), iteration_(iteration) {}

  long iteration() const noexcept { return iteration_; }

private:
  long iteration_;
};

/// File system / IO failure.
class IoError : public std::runtime_error {
public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace grevf
