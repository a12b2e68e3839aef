#pragma once

#include <functional>
#include <vector>

namespace dpf {

/**
 * A scalar SDE  dx = f(x,t) dt + sqrt(noise_scale) dw  on [0, horizon],
 * conditioned on both endpoints x(0) = x_start and x(horizon) = x_end.
 * The mesh is dyadic: N = 2^levels steps.
 */
struct BridgeSpec {
  std::function<double(double, double)> drift;        // f(x, t)
  std::function<double(double, double)> drift_slope;  // df/dx at (x, t)
  double noise_scale = 1.0;                           // variance rate
  double horizon = 1.0;
  int levels = 1;
  double x_start = 0.0;
  double x_end = 0.0;

  int steps() const { return 1 << levels; }
  double dt() const { return horizon / steps(); }
};

/// Per-step increment mean and variance of the balanced implicit scheme:
/// a_n = delta f / (1 - delta f'),  var_n = noise_scale * delta / (1 - delta f')^2.
struct StepParams {
  std::vector<double> a;
  std::vector<double> var;
};

struct PathSample {
  std::vector<double> values;  // interior nodes x^1 .. x^{N-1}
  double endpoint_phase = 0.0;
  int iterations_used = 0;
  std::vector<double> residual_history;  // max-norm change per sweep, diagnostics
};

struct IterationConfig {
  double tol = 1e-10;       // max-norm change of the interior values
  int max_iter = 100;
  double relaxation = 1.0;  // halved on residual growth, floored at 1/16 of the start value
};

/// Evaluate the balanced scheme along a full path (N+1 nodes, endpoints included).
StepParams step_params(const std::vector<double>& path, const BridgeSpec& spec);

/**
 * Dyadic midpoint sampling of the interior nodes for fixed step parameters.
 * Each span midpoint merges the forward law (from the left node) with the
 * backward law (from the right node) and maps one reference draw through the
 * merged Gaussian. Reference draws are consumed breadth-first: the global
 * midpoint first, then the two quarter points left to right, and so on.
 */
std::vector<double> subdivide_sample(const BridgeSpec& spec, const StepParams& params,
                                     const std::vector<double>& xi);

/**
 * Conditioned-path sampler for state-dependent drift: iterate
 * subdivide_sample(step_params(path)) with the reference vector held fixed,
 * starting from the straight line between the endpoints, until the path
 * stops moving. endpoint_phase is (x_end - x_start - sum a)^2 / (2 sum var)
 * at the converged parameters.
 */
PathSample bridge_iterate(const BridgeSpec& spec, const std::vector<double>& xi,
                          const IterationConfig& cfg = {});

}  // namespace dpf
