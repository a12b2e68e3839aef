#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dpf/azimuth.hpp"

namespace dpf {

/**
 * Displacement-difference statistic for one trajectory. With
 * u_j = dx^{j+1} - dx^j and v_j likewise for j = 2..J,
 *
 *   D = [ (sum u_j)^2 + (sum v_j)^2 ] / [ sum u_j^2 + sum v_j^2 ].
 *
 * Independent increments give D = 1 on average; assuming too small a motion
 * variance in the filter pushes D above 1, too large pushes it below.
 */
struct DiscriminantInput {
  std::span<const double> dx_seq;  // per-step displacements dX^1, dX^2, ...
  std::span<const double> dy_seq;
  int window = 40;                 // J; the sums consume displacements up to dX^{J+1}
};

/// Core ratio on already-differenced sequences. Enforces the Cauchy-Schwarz
/// bound 0 <= D <= number of terms on every evaluation.
double discriminant_from_diffs(std::span<const double> u, std::span<const double> v);

double discriminant(const DiscriminantInput& in);

struct SigmaScanRow {
  double ratio = 1.0;  // sigma_assumed / sigma_true
  double mean_D = 0.0;
  double se_D = 0.0;   // standard error of mean_D
  int runs = 0;        // successful runs
  int failures = 0;
};

struct ScanConfig {
  int runs = 200;
  int particles = 30;
  int window = 40;  // J
  bool average_all_particles = false;  // default: ancestral history of particle 0
  int threads = 0;                     // 0 = hardware concurrency
  double failure_budget = 0.01;
};

/// The grid used for the published scan: 0.5, 0.6, ..., 1.5, 2.0.
const std::vector<double>& default_ratio_grid();

/**
 * For each ratio: reconstruct per-run synthetic truths (generated with the
 * true sigma, shared across ratios) with the filter assuming ratio * sigma,
 * run J+1 steps, and evaluate the discriminant on the recorded displacement
 * history. Rows aggregate mean and standard error over the runs.
 */
std::vector<SigmaScanRow> sigma_scan(std::span<const double> ratios, const ScanConfig& cfg,
                                     const ModelParams& p, std::uint64_t seed);

/// Linear interpolation of the ratio at which mean_D crosses 1, scaled by
/// sigma_base. Scanning in increasing ratio order, the first bracket wins.
double estimate_sigma(std::span<const SigmaScanRow> scan, double sigma_base = 1.0);

}  // namespace dpf
