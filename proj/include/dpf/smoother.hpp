#pragma once

#include "dpf/azimuth.hpp"
#include "dpf/filter.hpp"

namespace dpf {

/**
 * Backward re-interpolation input for the middle time n of a triple
 * (n-1, n, n+1). The two-step displacement d_tot is held fixed; the variable
 * solved for is the full first leg d_new (from the time-(n-1) position), and
 * the corrected time-n displacement is d_new / 2.
 */
struct BackwardInput {
  ShipState state_prev;   // time n-1; its displacement fields hold dX^{n-1}
  double d_tot_x = 0.0;   // dX^n + dX^{n+1}
  double d_tot_y = 0.0;
  double b_mid = 0.0;     // observation at time n
  RefPair refs;
};

struct BackwardResult {
  double dx_new = 0.0;  // full first-leg displacement
  double dy_new = 0.0;
  double phase = 0.0;   // sum of the three merge phases
  int iterations_used = 0;
};

/**
 * Solve for d_new by the same fixed-point scheme as the forward step, with
 * the bearing linearized at the midpoint (x^{n-1} + d_new/2, y^{n-1} + d_new/2
 * component-wise): the first-leg prior N(2 dX^{n-1}, 4 sigma) is conditioned
 * on the observation along the bearing gradient (phase phi_0), then merged
 * per rotated component with the endpoint law N(d_tot, sigma) (phases phi_x,
 * phi_y), and the reference pair is pushed through the merged laws. The
 * sampling happens in the rotated frame so the composite density identity
 * holds exactly at the linearized observation.
 */
BackwardResult backward_step(const BackwardInput& in, const ModelParams& p,
                             const ForwardConfig& cfg = {});

struct SmoothingResult {
  ShipState corrected_mid;   // time n
  ShipState corrected_next;  // time n+1
  double phase_added = 0.0;  // backward phase + re-run forward phase
  int iterations_used = 0;   // max of the two solves
};

/**
 * One-step-lag smoothing for one particle: re-interpolate time n between the
 * (fixed) endpoint states at n-1 and n+1 under the observation at n, then
 * re-run the forward step from the corrected time-n state to time n+1.
 */
SmoothingResult apply_smoothing(const ShipState& state_prev, const ShipState& state_next,
                                double b_mid, double b_next, const ModelParams& p,
                                const ForwardConfig& cfg, const RefPair& refs_backward,
                                const RefPair& refs_forward);

}  // namespace dpf
