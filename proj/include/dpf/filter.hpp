#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "dpf/azimuth.hpp"
#include "dpf/errors.hpp"
#include "dpf/gaussian.hpp"
#include "dpf/rng.hpp"

namespace dpf {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

struct Particle {
  ShipState state;
  double phase_accum = 0.0;  // phases accrued since the last resample
};
using Ensemble = std::vector<Particle>;

/// Unit-normal reference draws, held fixed for the whole of one solve.
struct RefPair {
  double xi_x = 0.0;
  double xi_y = 0.0;
};

struct ForwardConfig {
  double tol = 1e-12;       // max-norm change of the displacement iterate
  int max_iter = 50;
  double relaxation = 1.0;  // halved on residual growth, floored at 1/16 of the start value
  bool warm_start = false;  // start from the previous displacement instead of 0
};

struct ResamplePolicy {
  enum class Kind { every_step, ratio_threshold, subsets, never };
  Kind kind = Kind::every_step;
  double ratio_limit = 10.0;  // L > 1, for ratio_threshold
  int subset_size = 2;        // >= 2, for subsets

  static ResamplePolicy every_step() { return {}; }
  static ResamplePolicy ratio_threshold(double limit) {
    if (!(limit > 1.0)) throw InvalidInput("ResamplePolicy: ratio limit must be > 1");
    return ResamplePolicy{Kind::ratio_threshold, limit, 2};
  }
  static ResamplePolicy subsets(int size) {
    if (size < 2) throw InvalidInput("ResamplePolicy: subset size must be >= 2");
    return ResamplePolicy{Kind::subsets, 10.0, size};
  }
  static ResamplePolicy never() { return ResamplePolicy{Kind::never, 10.0, 2}; }
};

struct ForwardResult {
  double dx = 0.0;  // converged displacement
  double dy = 0.0;
  ShipState new_state;
  double phase = 0.0;
  int iterations_used = 0;
};

/// The shipped observation map. Tests substitute exactly linear maps.
struct AzimuthObservation {
  ObsLinearization linearize(double x, double y) const { return dpf::linearize(x, y); }
};

/**
 * One direct-sampling forward step for a single particle, generic over the
 * observation map (anything with linearize(x, y) -> ObsLinearization).
 *
 * Iterates, with the reference pair held fixed: linearize at the current
 * landing point; express the observation and the motion prior as Gaussian
 * laws for the component of the displacement along the bearing gradient;
 * merge them; sample the along-gradient component from the merged law with
 * xi_x and the orthogonal component from its untouched prior with xi_y;
 * rotate back. The merge phase at convergence is the particle's weight
 * exponent for this step.
 */
template <class Obs>
ForwardResult forward_step_with(const ShipState& state, double b_next, const Obs& obs,
                                const ModelParams& p, const RefPair& refs,
                                const ForwardConfig& cfg = {}) {
  if (!(cfg.tol > 0.0)) throw InvalidInput("ForwardConfig: tol must be > 0");
  if (cfg.max_iter < 1) throw InvalidInput("ForwardConfig: max_iter must be >= 1");
  if (!(cfg.relaxation > 0.0) || cfg.relaxation > 1.0)
    throw InvalidInput("ForwardConfig: relaxation must lie in (0, 1]");
  if (!std::isfinite(refs.xi_x) || !std::isfinite(refs.xi_y))
    throw InvalidInput("forward_step: non-finite reference draw");

  if (p.sigma == 0.0) {
    // Noiseless motion: the displacement law collapses onto the prior mean.
    ForwardResult out;
    out.dx = state.dx;
    out.dy = state.dy;
    out.new_state = ShipState{state.x + out.dx, state.y + out.dy, out.dx, out.dy};
    if (p.s > 0.0) {
      const ObsLinearization lin = obs.linearize(out.new_state.x, out.new_state.y);
      const double gap = (lin.f - b_next) / lin.r;
      out.phase = gap * gap * lin.r * lin.r / (2.0 * p.s);
    }
    return out;
  }
  if (p.s == 0.0)
    throw InvalidInput("forward_step: exact observations (s = 0) require sigma = 0");

  double dx = cfg.warm_start ? state.dx : 0.0;
  double dy = cfg.warm_start ? state.dy : 0.0;
  double omega = cfg.relaxation;
  const double omega_floor = cfg.relaxation / 16.0;
  double prev_residual = std::numeric_limits<double>::infinity();
  const double root_sigma = std::sqrt(p.sigma);

  for (int sweep = 1; sweep <= cfg.max_iter; ++sweep) {
    const ObsLinearization lin = obs.linearize(state.x + dx, state.y + dy);
    // Law of the along-gradient component implied by the linearized observation.
    const Gaussian1D from_observation(
        -(lin.f - lin.f_x * dx - lin.f_y * dy - b_next) / lin.r,
        p.s / (lin.r * lin.r));
    // Law of the same component under the motion prior (isotropic, variance sigma).
    const Gaussian1D from_motion((lin.f_x * state.dx + lin.f_y * state.dy) / lin.r, p.sigma);
    const MergeResult posterior = merge(from_observation, from_motion);
    // Orthogonal component: the observation carries no information about it.
    const double ortho_mean = (-lin.f_y * state.dx + lin.f_x * state.dy) / lin.r;

    const double along = sample_from(posterior.merged, refs.xi_x);
    const double ortho = ortho_mean + root_sigma * refs.xi_y;
    const double prop_x = (lin.f_x * along - lin.f_y * ortho) / lin.r;
    const double prop_y = (lin.f_y * along + lin.f_x * ortho) / lin.r;

    const double step_x = omega * (prop_x - dx);
    const double step_y = omega * (prop_y - dy);
    const double residual = std::max(std::abs(step_x), std::abs(step_y));
    dx += step_x;
    dy += step_y;

    if (residual < cfg.tol) {
      ForwardResult out;
      out.dx = dx;
      out.dy = dy;
      out.new_state = ShipState{state.x + dx, state.y + dy, dx, dy};
      out.phase = posterior.phase;
      out.iterations_used = sweep - 1;
      return out;
    }
    if (residual > prev_residual) omega = std::max(0.5 * omega, omega_floor);
    prev_residual = residual;
  }
  throw ConvergenceError("forward_step", prev_residual, cfg.max_iter);
}

inline ForwardResult forward_step(const ShipState& state, double b_next, const ModelParams& p,
                                  const RefPair& refs, const ForwardConfig& cfg = {}) {
  return forward_step_with(state, b_next, AzimuthObservation{}, p, refs, cfg);
}

/**
 * Residual of the log-density consistency identity at a converged forward
 * step: the motion and observation factors at the returned displacement,
 * corrected by the phase, must reproduce the reference density
 * -(xi_x^2 + xi_y^2)/2. Requires sigma > 0 and s > 0.
 */
double forward_consistency_residual(const ShipState& before, const ForwardResult& result,
                                    double b_next, const ModelParams& p, const RefPair& refs);

/// CDF-inversion selection on weights exp(-(phase - min phase)).
std::vector<std::size_t> resample_indices(std::span<const double> phases,
                                          std::span<const double> uniform_draws);

/// Full resample: one uniform draw per slot, phases reset to zero.
Ensemble resample(const Ensemble& particles, std::span<const double> uniform_draws);

/// Policy resolution: returns the selected source index per slot, or nothing
/// when the policy leaves the ensemble untouched this step.
std::optional<std::vector<std::size_t>> plan_resample(std::span<const double> phases,
                                                      const ResamplePolicy& policy,
                                                      RngStream& rng);

Ensemble maybe_resample(const Ensemble& particles, const ResamplePolicy& policy, RngStream& rng);

struct FilterOptions {
  ResamplePolicy policy;
  ForwardConfig forward;
  bool smoothing = false;          // one-step-lag backward correction
  bool record_history = false;     // keep per-particle ancestral displacement histories
  bool record_particles = false;   // keep per-step particle snapshots
  bool track_consistency = false;  // evaluate the log-density identity per step
};

struct ParticleSnapshot {
  double x = 0.0;
  double y = 0.0;
  double phase_accum = 0.0;
};

struct FilterOutput {
  std::vector<Vec2> estimates;  // weighted ensemble mean per step
  std::vector<std::vector<Vec2>> displacement_history;          // [particle][step-1]
  std::vector<std::vector<ParticleSnapshot>> particle_dump;     // [step-1][particle]
  int max_forward_iterations = 0;
  long resamples = 0;
  double max_consistency_residual = 0.0;  // only when track_consistency
  long consistency_violations = 0;        // residual > 1e-8
};

/**
 * Filter driver. Particles start at (x0, y0) with the seeded displacement;
 * per step every particle gets a fresh reference pair from the stream
 * (seed, kForwardRefs, step, particle), the smoother (when on) re-interpolates
 * the previous position, the resampling policy is applied, and the estimate
 * is the phase-weighted ensemble mean. Deterministic in the seed and
 * independent of execution order.
 */
FilterOutput run_filter(std::span<const Observation> obs, const ModelParams& p, int particles,
                        const FilterOptions& opts, std::uint64_t seed);

}  // namespace dpf
