#pragma once

#include <stdexcept>
#include <string>

namespace locamp {

/// Bad parameters or malformed configuration.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A non-finite value appeared inside an iterative algorithm.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& where, int iteration, std::string quantity)
      : std::runtime_error(where + ": non-finite " + quantity + " at iteration " +
                           std::to_string(iteration)),
        iteration_(iteration),
        quantity_(std::move(quantity)) {}

  int iteration() const { return iteration_; }
  const std::string& quantity() const { return quantity_; }

 private:
  int iteration_;
  std::string quantity_;
};

/// An exact reference computation is not feasible for this prior or size.
class OracleUnavailable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw InvalidArgument(message);
}

}  // namespace locamp
