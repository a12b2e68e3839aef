#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "dpf/azimuth.hpp"
#include "dpf/estimation.hpp"
#include "dpf/filter.hpp"

namespace dpf {

struct ExperimentConfig {
  ModelParams model;
  int runs = 2000;
  int particles = 100;
  bool smoothing = false;
  ResamplePolicy policy;
  ForwardConfig forward;
  std::uint64_t master_seed = 1;
  int threads = 0;  // 0 = hardware concurrency
};

/// Reporting checkpoints: 40, 80, 120, 160 clipped to the horizon; the final
/// step is always included.
std::vector<int> checkpoint_steps(int n_steps);

struct CheckpointStats {
  int step = 0;
  double mean_x = 0.0, mean_y = 0.0;
  std::optional<double> sd_x, sd_y;  // absent when fewer than two samples
  double se_x = 0.0, se_y = 0.0;     // standard errors of the means
};

struct RunStats {
  std::vector<CheckpointStats> checkpoints;
  int runs = 0;
  int particles = 0;
  int failures = 0;
};

struct IntrinsicRow {
  int step = 0;
  double sd_x = 0.0, sd_y = 0.0;
};

struct IntrinsicTable {
  std::vector<IntrinsicRow> rows;
  long accepted = 0;
  long proposals = 0;
};

/**
 * Intrinsic-uncertainty table: spread of trajectories statistically
 * compatible with one fixed observation record. Candidates reuse the
 * reference innovations along the bearing-gradient direction (frozen from
 * the reference run) and redraw the orthogonal components; a candidate is
 * accepted when its residual-variance estimate against the fixed bearings
 * lies within one standard error of the nominal noise variance,
 * |s_hat - s| <= s sqrt(2/n).
 */
IntrinsicTable intrinsic_uncertainty(const ExperimentConfig& cfg, int accepted_target);

/// Repeated (fresh truth, fresh reconstruction) pairs; per-checkpoint mean
/// and spread of the estimate-minus-truth discrepancy.
RunStats discrepancy_study(const ExperimentConfig& cfg);

struct TrajectorySeries {
  std::string name;
  std::vector<Vec2> points;  // index = step, including step 0
};

struct RobustnessResult {
  std::vector<TrajectorySeries> series;  // truth, baseline, perturbed, sigma_jitter
  double sigma_drawn = 0.0;
  int sigma_redraws = 0;
};

/**
 * One truth, three reconstructions: nominal, initial position perturbed by
 * (perturb_x0, perturb_y0), and motion variance misassumed as a Gaussian
 * draw N(sigma, (eps sigma)^2) redrawn while non-positive.
 */
RobustnessResult robustness_study(const ExperimentConfig& cfg, double perturb_x0,
                                  double perturb_y0, double sigma_jitter_eps);

/// Quick invariant suites (Gaussian algebra, bridge sampler, forward step);
/// prints one line per check, returns 0 when everything holds.
int selftest(std::ostream& log);

}  // namespace dpf
