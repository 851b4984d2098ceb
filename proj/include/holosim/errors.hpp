#pragma once

#include <stdexcept>
#include <string>

namespace holosim {

// Process exit codes shared by all command-line entry points.
enum ExitCode : int {
  exit_ok = 0,
  exit_config = 2,
  exit_data = 3,
  exit_stat = 4,
};

// Bad or inconsistent configuration (unknown keys, out-of-range values,
// masks touching the Nyquist boundary, ...).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input data (unsorted tag files, truncated
// records, mismatched grid dimensions, unwritable outputs, ...).
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A detection or statistic could not be formed from otherwise valid data
// (no fringe order above the noise floor, undefined g2 ratio, ...).
struct StatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace holosim
