#include <doctest.h>

#include <cmath>
#include <vector>

#include "dpf/azimuth.hpp"
#include "dpf/csv.hpp"
#include "dpf/errors.hpp"
#include "dpf/rng.hpp"
#include "oracle_helpers.hpp"

using namespace dpf;

TEST_CASE("azimuth: values and domain") {
  CHECK(azimuth(1.0, 1.0) == doctest::Approx(std::acos(-1.0) / 4).epsilon(1e-15));
  CHECK(azimuth(3.0, 4.0) == doctest::Approx(std::atan(4.0 / 3.0)).epsilon(1e-15));
  CHECK(azimuth(3.0, 4.0) == doctest::Approx(0.92729521800161219).epsilon(1e-14));
  CHECK(azimuth(0.01, 20.0) == doctest::Approx(std::atan(2000.0)).epsilon(1e-15));
  CHECK_THROWS_AS(azimuth(0.0, 0.0), DegeneratePosition);
  CHECK_THROWS_AS(azimuth(-1.0, 0.0), DegeneratePosition);
  CHECK_THROWS_AS(azimuth(std::nan(""), 1.0), DegeneratePosition);
  // continuous across the y-axis for positive y
  CHECK(azimuth(-1e-9, 20.0) == doctest::Approx(azimuth(1e-9, 20.0)).epsilon(1e-9));
}

TEST_CASE("linearize: frozen values") {
  const ObsLinearization lin = linearize(3.0, 4.0);
  CHECK(lin.f_x == doctest::Approx(-0.16).epsilon(1e-15));
  CHECK(lin.f_y == doctest::Approx(0.12).epsilon(1e-15));
  CHECK(lin.r == doctest::Approx(0.2).epsilon(1e-15));

  const ObsLinearization axis = linearize(1.0, 0.0);
  CHECK(axis.f == 0.0);
  CHECK(axis.f_x == 0.0);
  CHECK(axis.f_y == 1.0);

  const ObsLinearization ship = linearize(0.01, 20.0);
  CHECK(ship.r == doctest::Approx(1.0 / std::sqrt(400.0001)).epsilon(1e-15));
  CHECK(ship.f_x == doctest::Approx(-20.0 / 400.0001).epsilon(1e-15));
}

TEST_CASE("linearize: gradient matches central differences, gradient is tangent") {
  RngStream rng(31);
  for (int trial = 0; trial < 1000; ++trial) {
    const double x = 0.01 + 3.0 * rng.uniform01();
    const double y = 0.5 + 30.0 * rng.uniform01();
    const ObsLinearization lin = linearize(x, y);
    const double h = 1e-6;
    const double fd_x = (azimuth(x + h, y) - azimuth(x - h, y)) / (2 * h);
    const double fd_y = (azimuth(x, y + h) - azimuth(x, y - h)) / (2 * h);
    CHECK(lin.f_x == doctest::Approx(fd_x).epsilon(1e-6));
    CHECK(lin.f_y == doctest::Approx(fd_y).epsilon(1e-6));
    CHECK(std::abs(lin.f_x * x + lin.f_y * y) <= 1e-12 * std::abs(lin.f_x * x));
    // rows built from the gradient form an exact rotation
    CHECK(std::abs((lin.f_x * lin.f_x + lin.f_y * lin.f_y) / (lin.r * lin.r) - 1.0) < 1e-14);
  }
}

TEST_CASE("linearize: gradient homogeneity of degree -1") {
  RngStream rng(32);
  for (int trial = 0; trial < 200; ++trial) {
    const double x = 0.05 + rng.uniform01();
    const double y = 1.0 + 10.0 * rng.uniform01();
    const double dx = rng.normal(), dy = rng.normal();
    const double lambda = 0.1 + 5.0 * rng.uniform01();
    const ObsLinearization a = linearize(x, y);
    const ObsLinearization b = linearize(lambda * x, lambda * y);
    const double dir_a = a.f_x * dx + a.f_y * dy;
    const double dir_b = b.f_x * (lambda * dx) + b.f_y * (lambda * dy);
    CHECK(dir_b == doctest::Approx(dir_a).epsilon(1e-12));
  }
}

TEST_CASE("truth_step: frozen arithmetic") {
  ModelParams p;
  const ShipState start{0.01, 20.0, 0.002, -0.06};

  const ShipState repeat = truth_step(start, 0.0, 0.0, p);
  CHECK(repeat.dx == 0.002);
  CHECK(repeat.x == doctest::Approx(0.012).epsilon(1e-15));

  const ShipState kicked = truth_step(start, 1.0, 0.0, p);
  CHECK(kicked.dx == doctest::Approx(0.003).epsilon(1e-15));
  CHECK(kicked.x == doctest::Approx(0.013).epsilon(1e-15));
  CHECK(kicked.dy == -0.06);

  const ShipState two = truth_step(truth_step(start, 0.0, 0.0, p), 0.0, 0.0, p);
  CHECK(two.x == doctest::Approx(0.01 + 2 * 0.002).epsilon(1e-15));
}

TEST_CASE("observe: noise scaling") {
  ModelParams p;
  const ShipState st{0.01, 20.0, 0.002, -0.06};
  const double base = azimuth(0.01, 20.0);
  CHECK(observe(st, 0.0, p).b == base);
  CHECK(observe(st, 1.0, p).b == doctest::Approx(base + 0.005).epsilon(1e-15));
  CHECK(observe(st, -2.0, p).b == doctest::Approx(base - 0.01).epsilon(1e-15));
}

TEST_CASE("generate_truth: noiseless straight line and determinism") {
  ModelParams p;
  p.sigma = 0.0;
  p.s = 0.0;
  p.n_steps = 20;
  const Truth t = generate_truth(p, 5);
  for (int n = 0; n <= 20; ++n) {
    CHECK(t.trajectory[n].x == doctest::Approx(p.x0 + n * p.dx1).epsilon(1e-14));
    CHECK(t.trajectory[n].y == doctest::Approx(p.y0 + n * p.dy1).epsilon(1e-14));
  }
  for (int n = 1; n <= 20; ++n)
    CHECK(t.observations[n - 1].b ==
          azimuth(t.trajectory[n].x, t.trajectory[n].y));

  ModelParams nominal;
  const Truth a = generate_truth(nominal, 77);
  const Truth b = generate_truth(nominal, 77);
  for (int n = 0; n <= nominal.n_steps; ++n) {
    CHECK(a.trajectory[n].x == b.trajectory[n].x);
    CHECK(a.trajectory[n].y == b.trajectory[n].y);
  }
}

TEST_CASE("generate_truth: increment statistics over many seeds") {
  // dx^160 = dx1 + sum of 159 innovations: mean dx1, variance 159 sigma
  ModelParams p;
  const int n_seeds = 10000;
  std::vector<double> dx160(n_seeds);
  for (int seed = 0; seed < n_seeds; ++seed)
    dx160[seed] = generate_truth(p, 100000 + seed).trajectory[160].dx;
  const double mean = oracle::mean_of(dx160);
  const double var = oracle::variance_of(dx160);
  const double expected_var = 159.0 * p.sigma;
  const double se_mean = std::sqrt(expected_var / n_seeds);
  const double se_var = expected_var * std::sqrt(2.0 / (n_seeds - 1));
  CHECK(std::abs(mean - p.dx1) < 3 * se_mean);
  CHECK(std::abs(var - expected_var) < 3 * se_var);
}

TEST_CASE("generate_truth: golden CSV regenerates bit-identically") {
  ModelParams p;
  const Truth t = generate_truth(p, 1);
  const std::string fresh = csv::truth_csv(t);
  const std::string stored = csv::read_file(std::string(DPF_TEST_DATA_DIR) +
                                            "/golden_truth_seed1.csv");
  CHECK(fresh == stored);
}

TEST_CASE("model parameter validation") {
  ModelParams p;
  p.sigma = -1.0;
  CHECK_THROWS_AS(p.validate(), InvalidInput);
  p.sigma = 1e-6;
  p.n_steps = 0;
  CHECK_THROWS_AS(p.validate(), InvalidInput);
  p.n_steps = 10;
  p.s = std::nan("");
  CHECK_THROWS_AS(p.validate(), InvalidInput);
}
