#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "dpf/csv.hpp"
#include "dpf/errors.hpp"
#include "dpf/estimation.hpp"
#include "dpf/experiments.hpp"
#include "dpf/filter.hpp"
#include "dpf/parallel.hpp"

namespace {

using namespace dpf;

struct CliOptions {
  std::uint64_t seed = 1;
  int runs = 0;  // 0: use the subcommand default
  int particles = 0;
  int steps = 160;
  double sigma = 1e-6;
  double obs_var = 25e-6;
  double x0 = 0.01, y0 = 20.0, dx1 = 0.002, dy1 = -0.06;
  std::string resample = "every";
  bool smoothing = false;
  std::string out;
  int threads = 0;
  // table1
  int target = 200;
  // fig1
  double perturb_x = 0.1, perturb_y = 0.4, jitter_eps = 0.4;
  // table3 / estimate-sigma
  bool all_particles = false;
  // filter
  bool dump_particles = false;
};

ResamplePolicy parse_policy(const std::string& text) {
  try {
    if (text == "every") return ResamplePolicy::every_step();
    if (text == "never") return ResamplePolicy::never();
    if (text.rfind("ratio:", 0) == 0)
      return ResamplePolicy::ratio_threshold(std::stod(text.substr(6)));
    if (text.rfind("subsets:", 0) == 0)
      return ResamplePolicy::subsets(std::stoi(text.substr(8)));
  } catch (const InvalidInput& e) {
    throw CLI::ValidationError("--resample", e.what());
  } catch (const std::exception&) {
    throw CLI::ValidationError("--resample", "bad numeric parameter in " + text);
  }
  throw CLI::ValidationError("--resample",
                             "expected every, never, ratio:<L> or subsets:<k>, got " + text);
}

ModelParams model_from(const CliOptions& cli) {
  ModelParams p;
  p.sigma = cli.sigma;
  p.s = cli.obs_var;
  p.x0 = cli.x0;
  p.y0 = cli.y0;
  p.dx1 = cli.dx1;
  p.dy1 = cli.dy1;
  p.n_steps = cli.steps;
  p.validate();
  return p;
}

ExperimentConfig experiment_from(const CliOptions& cli, int default_runs,
                                 int default_particles) {
  ExperimentConfig cfg;
  cfg.model = model_from(cli);
  cfg.runs = cli.runs > 0 ? cli.runs : default_runs;
  cfg.particles = cli.particles > 0 ? cli.particles : default_particles;
  cfg.smoothing = cli.smoothing;
  cfg.policy = parse_policy(cli.resample);
  cfg.master_seed = cli.seed;
  cfg.threads = cli.threads;
  return cfg;
}

void emit(const std::string& path, const std::string& content) {
  csv::write_file(path, content);
  std::cout << "wrote " << path << "\n";
}

int run_simulate(const CliOptions& cli) {
  const Truth truth = generate_truth(model_from(cli), cli.seed);
  emit(cli.out.empty() ? "truth.csv" : cli.out, csv::truth_csv(truth));
  return 0;
}

int run_filter_cmd(const CliOptions& cli) {
  const ModelParams p = model_from(cli);
  const RngStream job = RngStream(cli.seed).child(stream::kRun).child(0);
  const Truth truth = generate_truth(p, job.child(1).key());
  FilterOptions opts;
  opts.policy = parse_policy(cli.resample);
  opts.smoothing = cli.smoothing;
  opts.record_particles = cli.dump_particles;
  const int particles = cli.particles > 0 ? cli.particles : 100;
  const FilterOutput out = run_filter(truth.observations, p, particles, opts, job.child(2).key());
  const std::string path = cli.out.empty() ? "filter.csv" : cli.out;
  emit(path, csv::filter_csv(out, truth));
  if (cli.dump_particles) emit(path + ".particles.csv", csv::particles_csv(out));
  return 0;
}

int run_table1(const CliOptions& cli) {
  const ExperimentConfig cfg = experiment_from(cli, 1, 100);
  const IntrinsicTable table = intrinsic_uncertainty(cfg, cli.target);
  emit(cli.out.empty() ? "table1.csv" : cli.out, csv::table1_csv(table));
  std::cout << "accepted " << table.accepted << " of " << table.proposals << " proposals\n";
  return 0;
}

int run_table2(const CliOptions& cli) {
  const ExperimentConfig cfg = experiment_from(cli, 2000, 100);
  const RunStats stats = discrepancy_study(cfg);
  emit(cli.out.empty() ? "table2.csv" : cli.out, csv::table2_csv(stats));
  return 0;
}

int run_table3(const CliOptions& cli) {
  const ExperimentConfig cfg = experiment_from(cli, 200, 30);
  ScanConfig scan;
  scan.runs = cfg.runs;
  scan.particles = cfg.particles;
  scan.threads = cfg.threads;
  scan.average_all_particles = cli.all_particles;
  const std::vector<SigmaScanRow> rows =
      sigma_scan(default_ratio_grid(), scan, cfg.model, cfg.master_seed);
  emit(cli.out.empty() ? "table3.csv" : cli.out, csv::table3_csv(rows));
  return 0;
}

int run_fig1(const CliOptions& cli) {
  const ExperimentConfig cfg = experiment_from(cli, 1, 100);
  const RobustnessResult result =
      robustness_study(cfg, cli.perturb_x, cli.perturb_y, cli.jitter_eps);
  emit(cli.out.empty() ? "fig1.csv" : cli.out, csv::fig1_csv(result));
  std::cout << "sigma_assumed=" << csv::format_double(result.sigma_drawn) << " redraws="
            << result.sigma_redraws << "\n";
  return 0;
}

int run_estimate_sigma(const CliOptions& cli) {
  const ExperimentConfig cfg = experiment_from(cli, 2000, 30);
  ScanConfig scan;
  scan.runs = cfg.runs;
  scan.particles = cfg.particles;
  scan.threads = cfg.threads;
  scan.average_all_particles = cli.all_particles;
  const std::vector<SigmaScanRow> rows =
      sigma_scan(default_ratio_grid(), scan, cfg.model, cfg.master_seed);
  if (!cli.out.empty()) emit(cli.out, csv::table3_csv(rows));
  const double estimate = estimate_sigma(rows, cfg.model.sigma);
  std::cout << "sigma_estimate=" << csv::format_double(estimate) << "\n"
            << "ratio=" << csv::format_double(estimate / cfg.model.sigma) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Direct-sampling particle filter for bearings-only ship tracking"};
  app.fallthrough();
  CliOptions cli;

  app.add_option("--seed", cli.seed, "master seed (64-bit)")->envname("FILTER_SEED");
  app.add_option("--runs", cli.runs, "Monte Carlo runs (0 = subcommand default)");
  app.add_option("--particles", cli.particles, "ensemble size (0 = subcommand default)");
  app.add_option("--steps", cli.steps, "number of filter steps");
  app.add_option("--sigma", cli.sigma, "motion increment variance");
  app.add_option("--obs-var", cli.obs_var, "bearing noise variance");
  app.add_option("--x0", cli.x0, "initial x");
  app.add_option("--y0", cli.y0, "initial y");
  app.add_option("--dx1", cli.dx1, "first displacement, x");
  app.add_option("--dy1", cli.dy1, "first displacement, y");
  app.add_option("--resample", cli.resample, "every | never | ratio:<L> | subsets:<k>");
  app.add_flag("--smoothing", cli.smoothing, "enable one-step-lag backward smoothing");
  app.add_option("--out", cli.out, "output CSV path");
  app.add_option("--threads", cli.threads, "worker threads (0 = hardware)");
  app.set_config("--config", "", "key=value configuration file; CLI flags win");

  CLI::App* sim = app.add_subcommand("simulate", "generate one synthetic truth + bearings CSV");
  CLI::App* filt = app.add_subcommand("filter", "run one reconstruction against a fresh truth");
  filt->add_flag("--dump-particles", cli.dump_particles, "also write per-particle snapshots");
  CLI::App* t1 = app.add_subcommand("table1", "intrinsic-uncertainty table");
  t1->add_option("--target", cli.target, "accepted candidates to collect");
  CLI::App* t2 = app.add_subcommand("table2", "discrepancy study over repeated runs");
  CLI::App* t3 = app.add_subcommand("table3", "discriminant scan over assumed/true sigma ratios");
  t3->add_flag("--all-particles", cli.all_particles, "average D over the whole ensemble");
  CLI::App* f1 = app.add_subcommand("fig1", "robustness trajectories (perturbed start, misassumed sigma)");
  f1->add_option("--perturb-x", cli.perturb_x, "initial x perturbation");
  f1->add_option("--perturb-y", cli.perturb_y, "initial y perturbation");
  f1->add_option("--jitter-eps", cli.jitter_eps, "relative sd of the assumed sigma");
  CLI::App* est = app.add_subcommand("estimate-sigma", "locate sigma from the discriminant crossing");
  est->add_flag("--all-particles", cli.all_particles, "average D over the whole ensemble");
  CLI::App* self = app.add_subcommand("selftest", "run the built-in invariant suites");
  app.require_subcommand(1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (sim->parsed()) return run_simulate(cli);
    if (filt->parsed()) return run_filter_cmd(cli);
    if (t1->parsed()) return run_table1(cli);
    if (t2->parsed()) return run_table2(cli);
    if (t3->parsed()) return run_table3(cli);
    if (f1->parsed()) return run_fig1(cli);
    if (est->parsed()) return run_estimate_sigma(cli);
    if (self->parsed()) return selftest(std::cout) == 0 ? 0 : 2;
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  } catch (const FilterError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
