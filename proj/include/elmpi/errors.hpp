#pragma once

#include <stdexcept>
#include <string>

namespace elmpi {

/// Dimension mismatch between operands (rows/columns/lengths disagree).
struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Invalid configuration: empty neuron specs, degenerate splits, bad grids.
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Data unusable for the requested operation (empty or too few samples).
struct DataError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// SPD factorization failed; carries the index of the offending pivot.
struct SingularError : std::runtime_error {
  int pivot;
  SingularError(int pivot_index, const std::string& what)
      : std::runtime_error(what), pivot(pivot_index) {}
};

/// Malformed text input; the message carries the row/column location.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// File-level failure: missing path, version mismatch, checksum mismatch.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace elmpi
