#pragma once

#include <stdexcept>
#include <string>

namespace annomap {

// Input data failed parsing or an invariant check. CLI exit code 2.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Training aborted (divergence, bad configuration). CLI exit code 3.
struct TrainingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Analysis inputs are inconsistent (key mismatch, undefined statistic). CLI exit code 4.
struct AnalysisError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Filesystem / stream failure. CLI exit code 5.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace annomap
