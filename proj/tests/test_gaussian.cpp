#include <doctest.h>

#include <cmath>
#include <limits>

#include "dpf/gaussian.hpp"
#include "dpf/rng.hpp"

using namespace dpf;

TEST_CASE("merge: symmetric and equal-mean cases") {
  const MergeResult a = merge(Gaussian1D(0, 1), Gaussian1D(0, 1));
  CHECK(a.merged.mean == 0.0);
  CHECK(a.merged.variance == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(a.phase == 0.0);

  const MergeResult b = merge(Gaussian1D(3.5, 2.25), Gaussian1D(3.5, 2.25));
  CHECK(b.merged.mean == doctest::Approx(3.5).epsilon(1e-15));
  CHECK(b.merged.variance == doctest::Approx(1.125).epsilon(1e-15));
  CHECK(b.phase == 0.0);
}

TEST_CASE("merge: (1,2) x (3,4) against the pointwise product on a grid") {
  const Gaussian1D g1(1, 2), g2(3, 4);
  const MergeResult m = merge(g1, g2);
  CHECK(m.merged.mean == doctest::Approx(5.0 / 3.0).epsilon(1e-15));
  CHECK(m.merged.variance == doctest::Approx(4.0 / 3.0).epsilon(1e-15));
  CHECK(m.phase == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  for (int i = 0; i <= 40; ++i) {
    const double x = -6.0 + 0.3 * i;
    const double lhs = log_density_unnormalized(g1, x) + log_density_unnormalized(g2, x);
    const double rhs = log_density_unnormalized(m.merged, x) - m.phase;
    CHECK(std::abs(lhs - rhs) < 1e-12);
  }
}

TEST_CASE("merge: commutative in both fields, bitwise") {
  RngStream rng(11);
  for (int trial = 0; trial < 1000; ++trial) {
    const Gaussian1D g1(10 * (rng.uniform01() - 0.5), 0.01 + 3 * rng.uniform01());
    const Gaussian1D g2(10 * (rng.uniform01() - 0.5), 0.01 + 3 * rng.uniform01());
    const MergeResult ab = merge(g1, g2), ba = merge(g2, g1);
    CHECK(ab.merged.mean == ba.merged.mean);
    CHECK(ab.merged.variance == ba.merged.variance);
    CHECK(ab.phase == ba.phase);
  }
}

TEST_CASE("merge: product identity and contraction over random inputs") {
  RngStream rng(12);
  for (int trial = 0; trial < 300; ++trial) {
    const Gaussian1D g1(8 * (rng.uniform01() - 0.5), std::exp(4 * (rng.uniform01() - 0.5)));
    const Gaussian1D g2(8 * (rng.uniform01() - 0.5), std::exp(4 * (rng.uniform01() - 0.5)));
    const MergeResult m = merge(g1, g2);
    CHECK(m.merged.variance < std::min(g1.variance, g2.variance));
    CHECK(m.phase >= 0.0);
    for (int probe = 0; probe < 100; ++probe) {
      const double x = m.merged.mean + 6 * (rng.uniform01() - 0.5);
      const double lhs = log_density_unnormalized(g1, x) + log_density_unnormalized(g2, x);
      const double rhs = log_density_unnormalized(m.merged, x) - m.phase;
      CHECK(std::abs(lhs - rhs) < 1e-10);
    }
  }
}

TEST_CASE("merge: an uninformative factor drops out") {
  const Gaussian1D g1(2.0, 3.0);
  const Gaussian1D g2(-5.0, 3.0e12);  // 1e12 x the variance of g1
  const MergeResult m = merge(g1, g2);
  CHECK(m.merged.mean == doctest::Approx(g1.mean).epsilon(1e-6));
  CHECK(m.merged.variance == doctest::Approx(g1.variance).epsilon(1e-6));
  CHECK(m.phase < 1e-6);
}

TEST_CASE("sample_from: frozen values and standardizing round trip") {
  CHECK(sample_from(Gaussian1D(2, 9), 1.0) == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(sample_from(Gaussian1D(0, 1), 0.0) == 0.0);
  CHECK(sample_from(Gaussian1D(5.0 / 3.0, 4.0 / 3.0), -1.0) ==
        doctest::Approx(5.0 / 3.0 - std::sqrt(4.0 / 3.0)).epsilon(1e-15));

  RngStream rng(13);
  for (int trial = 0; trial < 1000; ++trial) {
    const Gaussian1D g(20 * (rng.uniform01() - 0.5), 0.01 + 9 * rng.uniform01());
    const double xi = rng.normal();
    CHECK(std::abs((sample_from(g, xi) - g.mean) / std::sqrt(g.variance) - xi) < 1e-12);
  }
}

TEST_CASE("log_density_unnormalized: frozen values") {
  CHECK(log_density_unnormalized(Gaussian1D(0, 1), 0.0) == 0.0);
  CHECK(log_density_unnormalized(Gaussian1D(0, 1), 1.0) == doctest::Approx(-0.5));
  CHECK(log_density_unnormalized(Gaussian1D(1, 2), 3.0) == doctest::Approx(-1.0));
}

TEST_CASE("invalid Gaussian parameters are rejected") {
  CHECK_THROWS_AS(Gaussian1D(0.0, 0.0), InvalidInput);
  CHECK_THROWS_AS(Gaussian1D(0.0, -1.0), InvalidInput);
  CHECK_THROWS_AS(Gaussian1D(std::nan(""), 1.0), InvalidInput);
  CHECK_THROWS_AS(Gaussian1D(0.0, std::numeric_limits<double>::infinity()), InvalidInput);
  CHECK_THROWS_AS(sample_from(Gaussian1D(0, 1), std::nan("")), InvalidInput);
}
