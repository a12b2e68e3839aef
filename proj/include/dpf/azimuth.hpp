#pragma once

#include <cstdint>
#include <vector>

#include "dpf/rng.hpp"

namespace dpf {

/**
 * Ship tracking test bed: a planar random walk whose displacement drifts
 * (each displacement is Gaussian around the previous one) observed through
 * noisy bearings from the origin.
 */
struct ModelParams {
  double sigma = 1e-6;  // variance of the per-step displacement innovation
  double s = 25e-6;     // variance of the bearing measurement noise (rad^2)
  double x0 = 0.01;
  double y0 = 20.0;
  double dx1 = 0.002;   // displacement applied at step 1, mean for step 2
  double dy1 = -0.06;
  int n_steps = 160;

  // sigma = 0 / s = 0 are admitted as the exactly-noiseless testing mode.
  void validate() const;
};

struct ShipState {
  double x = 0.0;
  double y = 0.0;
  double dx = 0.0;  // displacement that produced (x, y)
  double dy = 0.0;
};

struct Observation {
  double b = 0.0;  // bearing, radians
  int step = 0;
};

/// First-order expansion of the bearing map at one point.
struct ObsLinearization {
  double f;    // bearing at the expansion point
  double f_x;  // -y / (x^2 + y^2)
  double f_y;  //  x / (x^2 + y^2)
  double r;    // |grad| = 1 / sqrt(x^2 + y^2)
};

/// arctan(y/x) for x > 0; anything else is outside the problem's domain
/// and raises DegeneratePosition.
double azimuth(double x, double y);

ObsLinearization linearize(double x, double y);

/// One step of the displacement random walk:
/// dx' = dx + sqrt(sigma) xi1, x' = x + dx' (same for y).
ShipState truth_step(const ShipState& state, double noise_x, double noise_y,
                     const ModelParams& p);

Observation observe(const ShipState& state, double noise, const ModelParams& p,
                    int step = 0);

struct Truth {
  std::vector<ShipState> trajectory;      // index = step; [0] is the initial state
  std::vector<Observation> observations;  // one per step 1..n_steps
};

/// Synthetic truth: step 1 applies (dx1, dy1) exactly, the innovation noise
/// starts at step 2, one bearing per step. Fully determined by the seed.
Truth generate_truth(const ModelParams& p, std::uint64_t seed);

}  // namespace dpf
