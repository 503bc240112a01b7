#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace szlab {

/// Invalid input to an operation (bad dimension, point outside a chart, ...).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Requested work exceeds a documented cap (d_N, grid nodes, samples).
class ResourceCapError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical breakdown: non-PSD Gram/covariance, ill-conditioned fit.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class WeightParseError : public DomainError {
 public:
  WeightParseError(const std::string& msg, std::size_t position)
      : DomainError(msg + " at position " + std::to_string(position)),
        position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

}  // namespace szlab
