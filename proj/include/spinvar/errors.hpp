#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace spinvar {

/// Bad input: wrong dimensions, out-of-range parameters, malformed spins.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A Hilbert space or configuration table would exceed its configured cap.
class CapacityError : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// Eigensolver failure, non-finite intermediates, or residues above tolerance.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Failure while evaluating one disorder sample; carries the sample index.
class SampleError : public std::runtime_error {
 public:
  SampleError(std::size_t index, const std::string& what)
      : std::runtime_error("disorder sample " + std::to_string(index) + ": " + what),
        index_(index) {}

  std::size_t sample_index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

}  // namespace spinvar
