#pragma once

#include <cmath>
#include <string>

#include "dpf/errors.hpp"

namespace dpf {

/// One-dimensional Gaussian law. Variance must be finite and strictly
/// positive; point masses are rejected at construction.
struct Gaussian1D {
  double mean;
  double variance;

  Gaussian1D(double mean_value, double variance_value)
      : mean(mean_value), variance(variance_value) {
    if (!std::isfinite(mean) || !std::isfinite(variance))
      throw InvalidInput("Gaussian1D: non-finite parameter");
    if (variance <= 0.0)
      throw InvalidInput("Gaussian1D: variance must be > 0, got " +
                         std::to_string(variance_value));
  }
};

/// Product of two Gaussian densities: a narrower Gaussian times exp(-phase).
struct MergeResult {
  Gaussian1D merged;
  double phase;  // >= 0; zero exactly when the input means coincide
};

/**
 * Pointwise product of two Gaussian densities:
 *
 *   exp(-(x-A1)^2/2V1) exp(-(x-A2)^2/2V2) = exp(-(x-m)^2/2v) exp(-phase)
 *
 * with v = V1 V2 / (V1+V2), m = (A1 V2 + A2 V1) / (V1+V2) (precision
 * weighted) and phase = (A2-A1)^2 / (2 (V1+V2)). The precision-weighted
 * mean is the unique choice for which the identity holds pointwise.
 */
inline MergeResult merge(const Gaussian1D& g1, const Gaussian1D& g2) {
  const double vsum = g1.variance + g2.variance;
  const double variance = g1.variance * g2.variance / vsum;
  const double mean = (g1.mean * g2.variance + g2.mean * g1.variance) / vsum;
  const double gap = g2.mean - g1.mean;
  return MergeResult{Gaussian1D(mean, variance), gap * gap / (2.0 * vsum)};
}

/// Push a unit-normal draw through the law: mean + sqrt(variance) * xi.
inline double sample_from(const Gaussian1D& g, double xi) {
  if (!std::isfinite(xi)) throw InvalidInput("sample_from: non-finite draw");
  return g.mean + std::sqrt(g.variance) * xi;
}

/// -(x - mean)^2 / (2 variance); the normalization constant is dropped.
inline double log_density_unnormalized(const Gaussian1D& g, double x) {
  const double d = x - g.mean;
  return -d * d / (2.0 * g.variance);
}

}  // namespace dpf
