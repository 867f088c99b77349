#pragma once

#include <stdexcept>
#include <string>

namespace anisonorm {

/// Shape or sequence-length violation in a system or argument.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// NaN or infinity found where a finite real is required.
class NonFiniteError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Time indices supplied in the wrong order (e.g. j < k for a transition).
class IndexOrderError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical argument lies outside the domain of the operation, for
/// example q >= 1/||F||_inf^2 where I - q*Lambda stops being positive
/// definite.
class RangeError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace anisonorm
