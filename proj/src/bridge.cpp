#include "dpf/bridge.hpp"

#include <cmath>
#include <limits>

#include "dpf/errors.hpp"
#include "dpf/gaussian.hpp"

namespace dpf {

namespace {

void validate(const BridgeSpec& spec) {
  if (!spec.drift || !spec.drift_slope)
    throw InvalidInput("BridgeSpec: drift and drift_slope are required");
  if (spec.levels < 1) throw InvalidInput("BridgeSpec: levels must be >= 1 (dyadic mesh)");
  if (!(spec.noise_scale > 0.0) || !std::isfinite(spec.noise_scale))
    throw InvalidInput("BridgeSpec: noise_scale must be finite and > 0");
  if (!(spec.horizon > 0.0) || !std::isfinite(spec.horizon))
    throw InvalidInput("BridgeSpec: horizon must be finite and > 0");
  if (!std::isfinite(spec.x_start) || !std::isfinite(spec.x_end))
    throw InvalidInput("BridgeSpec: endpoints must be finite");
}

void validate(const IterationConfig& cfg) {
  if (!(cfg.tol > 0.0)) throw InvalidInput("IterationConfig: tol must be > 0");
  if (cfg.max_iter < 1) throw InvalidInput("IterationConfig: max_iter must be >= 1");
  if (!(cfg.relaxation > 0.0) || cfg.relaxation > 1.0)
    throw InvalidInput("IterationConfig: relaxation must lie in (0, 1]");
}

bool same_params(const StepParams& lhs, const StepParams& rhs) {
  return lhs.a == rhs.a && lhs.var == rhs.var;
}

}  // namespace

StepParams step_params(const std::vector<double>& path, const BridgeSpec& spec) {
  validate(spec);
  const int n = spec.steps();
  if (static_cast<int>(path.size()) != n + 1)
    throw InvalidInput("step_params: path must hold N+1 nodes including both endpoints");
  const double delta = spec.dt();
  StepParams out;
  out.a.resize(n);
  out.var.resize(n);
  for (int k = 0; k < n; ++k) {
    const double t = k * delta;
    const double denom = 1.0 - delta * spec.drift_slope(path[k], t);
    if (std::abs(denom) <= 1e-8) throw SingularScheme(k, denom);
    out.a[k] = delta * spec.drift(path[k], t) / denom;
    out.var[k] = spec.noise_scale * delta / (denom * denom);
  }
  return out;
}

std::vector<double> subdivide_sample(const BridgeSpec& spec, const StepParams& params,
                                     const std::vector<double>& xi) {
  validate(spec);
  const int n = spec.steps();
  if (static_cast<int>(xi.size()) != n - 1)
    throw InvalidInput("subdivide_sample: need exactly N-1 reference draws");
  if (static_cast<int>(params.a.size()) != n || static_cast<int>(params.var.size()) != n)
    throw InvalidInput("subdivide_sample: step parameters do not match the mesh");

  // prefix sums over steps: total drift and spread accumulated up to node i
  std::vector<double> drift_to(n + 1, 0.0), spread_to(n + 1, 0.0);
  for (int k = 0; k < n; ++k) {
    drift_to[k + 1] = drift_to[k] + params.a[k];
    spread_to[k + 1] = spread_to[k] + params.var[k];
  }

  std::vector<double> node(n + 1);
  node[0] = spec.x_start;
  node[n] = spec.x_end;
  std::size_t next_ref = 0;
  for (int span = n; span >= 2; span /= 2) {
    for (int left = 0; left + span <= n; left += span) {
      const int right = left + span;
      const int mid = left + span / 2;
      const Gaussian1D forward(node[left] + (drift_to[mid] - drift_to[left]),
                               spread_to[mid] - spread_to[left]);
      const Gaussian1D backward(node[right] - (drift_to[right] - drift_to[mid]),
                                spread_to[right] - spread_to[mid]);
      node[mid] = sample_from(merge(forward, backward).merged, xi[next_ref++]);
    }
  }
  return std::vector<double>(node.begin() + 1, node.end() - 1);
}

PathSample bridge_iterate(const BridgeSpec& spec, const std::vector<double>& xi,
                          const IterationConfig& cfg) {
  validate(spec);
  validate(cfg);
  const int n = spec.steps();
  if (static_cast<int>(xi.size()) != n - 1)
    throw InvalidInput("bridge_iterate: need exactly N-1 reference draws");

  // first guess: the straight line between the endpoints (exact for zero drift)
  std::vector<double> path(n + 1);
  for (int k = 0; k <= n; ++k)
    path[k] = spec.x_start + (spec.x_end - spec.x_start) * (static_cast<double>(k) / n);

  StepParams params = step_params(path, spec);
  double omega = cfg.relaxation;
  const double omega_floor = cfg.relaxation / 16.0;
  double prev_residual = std::numeric_limits<double>::infinity();
  std::vector<double> residuals;

  for (int sweep = 1; sweep <= cfg.max_iter; ++sweep) {
    const std::vector<double> proposal = subdivide_sample(spec, params, xi);
    double residual = 0.0;
    for (int k = 1; k < n; ++k) {
      const double step = omega * (proposal[k - 1] - path[k]);
      residual = std::max(residual, std::abs(step));
      path[k] += step;
    }
    residuals.push_back(residual);
    const StepParams next = step_params(path, spec);
    // A full step that leaves the scheme parameters untouched means the path
    // is already the fixed point of the sampling map.
    const bool params_fixed = omega == 1.0 && same_params(params, next);
    params = next;

    if (residual < cfg.tol || params_fixed) {
      double drift_sum = 0.0, spread_sum = 0.0;
      for (int k = 0; k < n; ++k) {
        drift_sum += params.a[k];
        spread_sum += params.var[k];
      }
      const double gap = spec.x_end - spec.x_start - drift_sum;
      PathSample out;
      out.values.assign(path.begin() + 1, path.end() - 1);
      out.endpoint_phase = gap * gap / (2.0 * spread_sum);
      out.iterations_used = params_fixed ? sweep : sweep - 1;
      out.residual_history = std::move(residuals);
      return out;
    }
    if (residual > prev_residual) omega = std::max(0.5 * omega, omega_floor);
    prev_residual = residual;
  }
  throw ConvergenceError("bridge_iterate", prev_residual, cfg.max_iter);
}

}  // namespace dpf
