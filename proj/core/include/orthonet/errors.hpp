#pragma once

#include <stdexcept>
#include <string>

namespace orthonet {

/// Raised for malformed arguments: non-finite entries, dimension mismatches,
/// out-of-range indices, unparsable input files.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a factorization meets a (numerically) rank-deficient matrix.
class SingularInput : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace orthonet
