#pragma once

#include <stdexcept>
#include <string>

namespace dpf {

// Base class for every numerical failure raised by the library.
struct FilterError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidInput : FilterError {
  using FilterError::FilterError;
};

// The balanced-scheme denominator 1 - delta*f' vanished at one step.
struct SingularScheme : FilterError {
  SingularScheme(int step_index, double denominator_value)
      : FilterError("balanced scheme singular at step " + std::to_string(step_index) +
                    ": 1 - delta*f' = " + std::to_string(denominator_value)),
        step(step_index),
        denominator(denominator_value) {}
  int step;
  double denominator;
};

struct ConvergenceError : FilterError {
  ConvergenceError(const std::string& where, double last_residual, int iterations_run)
      : FilterError(where + " did not converge: residual " + std::to_string(last_residual) +
                    " after " + std::to_string(iterations_run) + " iterations"),
        residual(last_residual),
        iterations(iterations_run) {}
  double residual;
  int iterations;
};

// Position left the domain where the azimuth is defined (x <= 0 or the origin).
struct DegeneratePosition : FilterError {
  using FilterError::FilterError;
};

// Scan never crosses mean_D = 1, so no value can be interpolated.
struct NoBracket : FilterError {
  using FilterError::FilterError;
};

// Candidate-trajectory acceptance band rejects essentially everything.
struct InfeasibleBand : FilterError {
  using FilterError::FilterError;
};

}  // namespace dpf
