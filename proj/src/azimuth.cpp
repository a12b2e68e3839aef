#include "dpf/azimuth.hpp"

#include <cmath>
#include <string>

#include "dpf/errors.hpp"

namespace dpf {

namespace {

std::string point_text(double x, double y) {
  return "(" + std::to_string(x) + ", " + std::to_string(y) + ")";
}

}  // namespace

void ModelParams::validate() const {
  if (!(sigma >= 0.0) || !std::isfinite(sigma))
    throw InvalidInput("ModelParams: sigma must be finite and >= 0");
  if (!(s >= 0.0) || !std::isfinite(s))
    throw InvalidInput("ModelParams: s must be finite and >= 0");
  if (!std::isfinite(x0) || !std::isfinite(y0) || !std::isfinite(dx1) || !std::isfinite(dy1))
    throw InvalidInput("ModelParams: non-finite initial data");
  if (n_steps < 1) throw InvalidInput("ModelParams: n_steps must be >= 1");
}

double azimuth(double x, double y) {
  if (!std::isfinite(x) || !std::isfinite(y))
    throw DegeneratePosition("azimuth: non-finite position " + point_text(x, y));
  // The bearing is continuous everywhere except the closed half-line y = 0,
  // x <= 0 (branch cut through the observer). The test bed keeps y large and
  // positive; x may cross zero and the bearing just climbs past pi/2.
  if (y == 0.0 && x <= 0.0)
    throw DegeneratePosition("azimuth undefined at " + point_text(x, y) +
                             ": position on the bearing branch cut");
  return std::atan2(y, x);
}

ObsLinearization linearize(double x, double y) {
  const double f = azimuth(x, y);  // validates the position
  const double d2 = x * x + y * y;
  return ObsLinearization{f, -y / d2, x / d2, 1.0 / std::sqrt(d2)};
}

ShipState truth_step(const ShipState& state, double noise_x, double noise_y,
                     const ModelParams& p) {
  const double root_sigma = std::sqrt(p.sigma);
  ShipState out;
  out.dx = state.dx + root_sigma * noise_x;
  out.dy = state.dy + root_sigma * noise_y;
  out.x = state.x + out.dx;
  out.y = state.y + out.dy;
  if (out.x == 0.0 && out.y == 0.0)
    throw DegeneratePosition("truth_step reached the origin");
  return out;
}

Observation observe(const ShipState& state, double noise, const ModelParams& p, int step) {
  return Observation{azimuth(state.x, state.y) + std::sqrt(p.s) * noise, step};
}

Truth generate_truth(const ModelParams& p, std::uint64_t seed) {
  p.validate();
  RngStream root(seed);
  Truth out;
  out.trajectory.reserve(p.n_steps + 1);
  out.observations.reserve(p.n_steps);

  ShipState state{p.x0, p.y0, p.dx1, p.dy1};
  out.trajectory.push_back(state);
  for (int step = 1; step <= p.n_steps; ++step) {
    if (step == 1) {
      // The first displacement is a given, not a draw.
      state = ShipState{state.x + p.dx1, state.y + p.dy1, p.dx1, p.dy1};
      if (state.x == 0.0 && state.y == 0.0)
        throw DegeneratePosition("generate_truth: step 1 reached the origin");
    } else {
      RngStream motion = root.child(stream::kTruthMotion).child(step);
      const double nx = motion.normal();
      const double ny = motion.normal();
      state = truth_step(state, nx, ny, p);
    }
    RngStream obs_noise = root.child(stream::kTruthObserve).child(step);
    out.trajectory.push_back(state);
    out.observations.push_back(observe(state, obs_noise.normal(), p, step));
  }
  return out;
}

}  // namespace dpf
