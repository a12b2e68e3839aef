#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <sstream>
#include <string>
#include <vector>

#include "dpf/csv.hpp"
#include "dpf/errors.hpp"
#include "dpf/experiments.hpp"
#include "dpf/rng.hpp"

using namespace dpf;

namespace {

// Parsing an emitted document and re-emitting it must reproduce the bytes:
// every numeric field has to survive strtod + %.17g unchanged.
void check_roundtrip(const std::string& doc) {
  const auto rows = csv::parse(doc);
  std::string rebuilt;
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) rebuilt += ',';
      const std::string& field = row[i];
      char* end = nullptr;
      const double value = std::strtod(field.c_str(), &end);
      const bool numeric = !field.empty() && end == field.c_str() + field.size();
      rebuilt += numeric ? csv::format_double(value) : field;
    }
    rebuilt += '\n';
  }
  CHECK(rebuilt == doc);
}

ExperimentConfig quick_config(int runs, int particles, int steps, std::uint64_t seed) {
  ExperimentConfig cfg;
  cfg.model.n_steps = steps;
  cfg.runs = runs;
  cfg.particles = particles;
  cfg.master_seed = seed;
  cfg.threads = 2;
  return cfg;
}

}  // namespace

TEST_CASE("checkpoint_steps: clipped table checkpoints plus the horizon") {
  CHECK(checkpoint_steps(160) == std::vector<int>{40, 80, 120, 160});
  CHECK(checkpoint_steps(200) == std::vector<int>{40, 80, 120, 160, 200});
  CHECK(checkpoint_steps(100) == std::vector<int>{40, 80, 100});
  CHECK(checkpoint_steps(30) == std::vector<int>{30});
}

TEST_CASE("intrinsic_uncertainty: noiseless model collapses to the reference") {
  ExperimentConfig cfg = quick_config(1, 1, 40, 11);
  cfg.model.sigma = 0.0;
  cfg.model.s = 0.0;
  const IntrinsicTable table = intrinsic_uncertainty(cfg, 10);
  CHECK(table.accepted == 10);
  for (const IntrinsicRow& row : table.rows) {
    CHECK(row.sd_x == 0.0);
    CHECK(row.sd_y == 0.0);
  }
}

TEST_CASE("intrinsic_uncertainty: an out-of-band reference record is reported") {
  // this seed's observation record has a residual-variance estimate above
  // s (1 + sqrt(2/n)), so no candidate can land inside the band
  ExperimentConfig cfg = quick_config(1, 1, 160, 12);
  CHECK_THROWS_AS(intrinsic_uncertainty(cfg, 10), InfeasibleBand);
}

TEST_CASE("intrinsic_uncertainty: default-parameter smoke run") {
  ExperimentConfig cfg = quick_config(1, 1, 160, 1);
  const IntrinsicTable a = intrinsic_uncertainty(cfg, 30);
  REQUIRE(a.rows.size() == 4);
  CHECK(a.accepted == 30);
  CHECK(a.proposals >= 30);
  for (const IntrinsicRow& row : a.rows) {
    CHECK(std::isfinite(row.sd_x));
    CHECK(row.sd_x >= 0.0);
    CHECK(row.sd_y >= 0.0);
  }
  // the late-step spread dominates the early one
  CHECK(a.rows.back().sd_y > a.rows.front().sd_y);

  const IntrinsicTable b = intrinsic_uncertainty(cfg, 30);
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].sd_x == b.rows[i].sd_x);
    CHECK(a.rows[i].sd_y == b.rows[i].sd_y);
  }
}

TEST_CASE("discrepancy_study: single run reports means without spreads") {
  const ExperimentConfig cfg = quick_config(1, 3, 40, 21);
  const RunStats stats = discrepancy_study(cfg);
  CHECK(stats.runs == 1);
  CHECK(stats.failures == 0);
  REQUIRE(stats.checkpoints.size() == 1);
  CHECK(!stats.checkpoints[0].sd_x.has_value());
  CHECK(!stats.checkpoints[0].sd_y.has_value());
  CHECK(std::isfinite(stats.checkpoints[0].mean_y));
}

TEST_CASE("discrepancy_study: worker count does not change the result") {
  ExperimentConfig cfg = quick_config(8, 5, 40, 22);
  cfg.threads = 1;
  const RunStats serial = discrepancy_study(cfg);
  cfg.threads = 4;
  const RunStats parallel = discrepancy_study(cfg);
  REQUIRE(serial.checkpoints.size() == parallel.checkpoints.size());
  for (std::size_t c = 0; c < serial.checkpoints.size(); ++c) {
    CHECK(serial.checkpoints[c].mean_x == parallel.checkpoints[c].mean_x);
    CHECK(serial.checkpoints[c].mean_y == parallel.checkpoints[c].mean_y);
    CHECK(*serial.checkpoints[c].sd_y == *parallel.checkpoints[c].sd_y);
  }
}

TEST_CASE("discrepancy_study: smoothing leaves the final-step spread in family") {
  ExperimentConfig cfg = quick_config(200, 30, 160, 23);
  const RunStats plain = discrepancy_study(cfg);
  cfg.smoothing = true;
  const RunStats smoothed = discrepancy_study(cfg);
  const double sd_plain = *plain.checkpoints.back().sd_y;
  const double sd_smooth = *smoothed.checkpoints.back().sd_y;
  CHECK(sd_smooth / sd_plain > 0.75);
  CHECK(sd_smooth / sd_plain < 1.33);
}

TEST_CASE("robustness_study: zero perturbation and zero jitter reproduce the baseline") {
  const ExperimentConfig cfg = quick_config(1, 10, 60, 24);
  const RobustnessResult r = robustness_study(cfg, 0.0, 0.0, 0.0);
  REQUIRE(r.series.size() == 4);
  CHECK(r.series[0].name == "truth");
  CHECK(r.series[1].name == "baseline");
  CHECK(r.sigma_drawn == cfg.model.sigma);
  CHECK(r.sigma_redraws == 0);
  for (std::size_t k = 0; k < r.series[1].points.size(); ++k) {
    CHECK(r.series[2].points[k].x == r.series[1].points[k].x);
    CHECK(r.series[2].points[k].y == r.series[1].points[k].y);
    CHECK(r.series[3].points[k].x == r.series[1].points[k].x);
    CHECK(r.series[3].points[k].y == r.series[1].points[k].y);
  }
}

TEST_CASE("robustness_study: jittered sigma stays positive and is recorded") {
  const ExperimentConfig cfg = quick_config(1, 10, 60, 25);
  const RobustnessResult r = robustness_study(cfg, 0.1, 0.4, 0.4);
  CHECK(r.sigma_drawn > 0.0);
  CHECK(r.sigma_redraws >= 0);
  REQUIRE(r.series.size() == 4);
  // perturbed reconstruction starts at the perturbed point
  CHECK(r.series[2].points[0].x == doctest::Approx(cfg.model.x0 + 0.1).epsilon(1e-15));
  CHECK(r.series[2].points[0].y == doctest::Approx(cfg.model.y0 + 0.4).epsilon(1e-15));
  CHECK_THROWS_AS(robustness_study(cfg, 0.0, 0.0, 1.0), InvalidInput);
}

TEST_CASE("csv: emitted documents survive parse + re-emit byte-identically") {
  ModelParams p;
  p.n_steps = 12;
  const Truth truth = generate_truth(p, 31);
  check_roundtrip(csv::truth_csv(truth));

  FilterOptions opts;
  opts.record_particles = true;
  const FilterOutput out = run_filter(truth.observations, p, 4, opts, 32);
  check_roundtrip(csv::filter_csv(out, truth));
  check_roundtrip(csv::particles_csv(out));

  const ExperimentConfig cfg = quick_config(3, 4, 40, 33);
  check_roundtrip(csv::table2_csv(discrepancy_study(cfg)));

  const ExperimentConfig one = quick_config(1, 4, 40, 34);
  check_roundtrip(csv::table2_csv(discrepancy_study(one)));  // absent sd fields

  ScanConfig scan;
  scan.runs = 4;
  scan.particles = 6;
  scan.threads = 2;
  const std::vector<double> ratios = {0.5, 1.0};
  check_roundtrip(csv::table3_csv(sigma_scan(ratios, scan, p, 35)));

  ExperimentConfig rc = quick_config(1, 6, 40, 36);
  check_roundtrip(csv::fig1_csv(robustness_study(rc, 0.1, 0.4, 0.4)));

  ExperimentConfig ic = quick_config(1, 1, 60, 37);
  check_roundtrip(csv::table1_csv(intrinsic_uncertainty(ic, 10)));
}

TEST_CASE("csv: file write and read are inverse") {
  const std::string path = "/tmp/dpf_csv_roundtrip_test.csv";
  const std::string content = "a,b\n1.5,2.25\n";
  csv::write_file(path, content);
  CHECK(csv::read_file(path) == content);
  CHECK_THROWS_AS(csv::read_file("/nonexistent/nope.csv"), FilterError);
}

TEST_CASE("selftest: passes and reports") {
  std::ostringstream log;
  CHECK(selftest(log) == 0);
  CHECK(log.str().find("all checks passed") != std::string::npos);
}
