#include "dpf/smoother.hpp"

#include <cmath>
#include <limits>

#include "dpf/errors.hpp"
#include "dpf/gaussian.hpp"

namespace dpf {

BackwardResult backward_step(const BackwardInput& in, const ModelParams& p,
                             const ForwardConfig& cfg) {
  if (!(cfg.tol > 0.0)) throw InvalidInput("ForwardConfig: tol must be > 0");
  if (cfg.max_iter < 1) throw InvalidInput("ForwardConfig: max_iter must be >= 1");
  if (!(cfg.relaxation > 0.0) || cfg.relaxation > 1.0)
    throw InvalidInput("ForwardConfig: relaxation must lie in (0, 1]");
  if (!std::isfinite(in.d_tot_x) || !std::isfinite(in.d_tot_y) || !std::isfinite(in.b_mid))
    throw InvalidInput("backward_step: non-finite input");

  if (p.sigma == 0.0) {
    // Noiseless motion: both legs are point masses; the fixed endpoint wins.
    return BackwardResult{in.d_tot_x, in.d_tot_y, 0.0, 0};
  }
  if (p.s == 0.0)
    throw InvalidInput("backward_step: exact observations (s = 0) require sigma = 0");

  const double prior_mean_x = 2.0 * in.state_prev.dx;
  const double prior_mean_y = 2.0 * in.state_prev.dy;
  const double prior_var = 4.0 * p.sigma;

  double dx = 0.0, dy = 0.0;
  double omega = cfg.relaxation;
  const double omega_floor = cfg.relaxation / 16.0;
  double prev_residual = std::numeric_limits<double>::infinity();

  for (int sweep = 1; sweep <= cfg.max_iter; ++sweep) {
    const ObsLinearization lin =
        linearize(in.state_prev.x + 0.5 * dx, in.state_prev.y + 0.5 * dy);

    // Everything below lives in the frame rotated onto the bearing gradient:
    // "along" is the component of d_new on (f_x, f_y)/r, "ortho" the complement.
    const Gaussian1D obs_along(
        -(2.0 * lin.f - lin.f_x * dx - lin.f_y * dy - 2.0 * in.b_mid) / lin.r,
        4.0 * p.s / (lin.r * lin.r));
    const Gaussian1D prior_along(
        (lin.f_x * prior_mean_x + lin.f_y * prior_mean_y) / lin.r, prior_var);
    const Gaussian1D prior_ortho(
        (-lin.f_y * prior_mean_x + lin.f_x * prior_mean_y) / lin.r, prior_var);
    const double endpoint_along = (lin.f_x * in.d_tot_x + lin.f_y * in.d_tot_y) / lin.r;
    const double endpoint_ortho = (-lin.f_y * in.d_tot_x + lin.f_x * in.d_tot_y) / lin.r;

    const MergeResult first_leg = merge(obs_along, prior_along);  // phase phi_0
    const MergeResult along_post =
        merge(first_leg.merged, Gaussian1D(endpoint_along, p.sigma));  // phase phi_x
    const MergeResult ortho_post =
        merge(prior_ortho, Gaussian1D(endpoint_ortho, p.sigma));  // phase phi_y

    const double along = sample_from(along_post.merged, in.refs.xi_x);
    const double ortho = sample_from(ortho_post.merged, in.refs.xi_y);
    const double prop_x = (lin.f_x * along - lin.f_y * ortho) / lin.r;
    const double prop_y = (lin.f_y * along + lin.f_x * ortho) / lin.r;

    const double step_x = omega * (prop_x - dx);
    const double step_y = omega * (prop_y - dy);
    const double residual = std::max(std::abs(step_x), std::abs(step_y));
    dx += step_x;
    dy += step_y;

    if (residual < cfg.tol) {
      BackwardResult out;
      out.dx_new = dx;
      out.dy_new = dy;
      out.phase = first_leg.phase + along_post.phase + ortho_post.phase;
      out.iterations_used = sweep - 1;
      return out;
    }
    if (residual > prev_residual) omega = std::max(0.5 * omega, omega_floor);
    prev_residual = residual;
  }
  throw ConvergenceError("backward_step", prev_residual, cfg.max_iter);
}

SmoothingResult apply_smoothing(const ShipState& state_prev, const ShipState& state_next,
                                double b_mid, double b_next, const ModelParams& p,
                                const ForwardConfig& cfg, const RefPair& refs_backward,
                                const RefPair& refs_forward) {
  BackwardInput in;
  in.state_prev = state_prev;
  in.d_tot_x = state_next.x - state_prev.x;
  in.d_tot_y = state_next.y - state_prev.y;
  in.b_mid = b_mid;
  in.refs = refs_backward;
  const BackwardResult back = backward_step(in, p, cfg);

  const double mid_dx = 0.5 * back.dx_new;
  const double mid_dy = 0.5 * back.dy_new;
  const ShipState corrected_mid{state_prev.x + mid_dx, state_prev.y + mid_dy, mid_dx, mid_dy};
  const ForwardResult redo = forward_step(corrected_mid, b_next, p, refs_forward, cfg);

  SmoothingResult out;
  out.corrected_mid = corrected_mid;
  out.corrected_next = redo.new_state;
  out.phase_added = back.phase + redo.phase;
  out.iterations_used = std::max(back.iterations_used, redo.iterations_used);
  return out;
}

}  // namespace dpf
