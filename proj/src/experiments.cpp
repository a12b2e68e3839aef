#include "dpf/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "dpf/bridge.hpp"
#include "dpf/errors.hpp"
#include "dpf/gaussian.hpp"
#include "dpf/parallel.hpp"
#include "dpf/rng.hpp"

namespace dpf {

std::vector<int> checkpoint_steps(int n_steps) {
  std::vector<int> out;
  for (int c : {40, 80, 120, 160})
    if (c <= n_steps) out.push_back(c);
  if (out.empty() || out.back() != n_steps) out.push_back(n_steps);
  return out;
}

namespace {

struct MomentAccumulator {
  int n = 0;
  double sum = 0.0, sum_sq = 0.0;
  void add(double v) {
    ++n;
    sum += v;
    sum_sq += v * v;
  }
  double mean() const { return sum / n; }
  // sample variance; callers guard n >= 2
  double variance() const {
    const double m = mean();
    return std::max(0.0, (sum_sq - n * m * m) / (n - 1));
  }
  double sd() const { return std::sqrt(variance()); }
};

}  // namespace

IntrinsicTable intrinsic_uncertainty(const ExperimentConfig& cfg, int accepted_target) {
  cfg.model.validate();
  if (accepted_target < 2)
    throw InvalidInput("intrinsic_uncertainty: need at least two accepted candidates");
  const ModelParams& p = cfg.model;
  const int n = p.n_steps;
  const RngStream root(cfg.master_seed);

  const Truth ref = generate_truth(p, root.child(stream::kRun).child(0).child(1).key());

  // Reference innovations of the displacement walk (zero at step 1 by
  // construction) and the bearing-gradient direction at each reference point.
  std::vector<Vec2> innovation(n + 1, Vec2{});
  std::vector<Vec2> gradient_dir(n + 1, Vec2{});
  for (int step = 2; step <= n; ++step) {
    innovation[step] = Vec2{ref.trajectory[step].dx - ref.trajectory[step - 1].dx,
                            ref.trajectory[step].dy - ref.trajectory[step - 1].dy};
    const ObsLinearization lin = linearize(ref.trajectory[step].x, ref.trajectory[step].y);
    gradient_dir[step] = Vec2{lin.f_x / lin.r, lin.f_y / lin.r};
  }

  const std::vector<int> checkpoints = checkpoint_steps(n);
  const double band = p.s * std::sqrt(2.0 / n);
  const double root_sigma = std::sqrt(p.sigma);

  std::vector<MomentAccumulator> acc_x(checkpoints.size()), acc_y(checkpoints.size());
  IntrinsicTable out;
  std::vector<ShipState> candidate(n + 1);

  while (out.accepted < accepted_target) {
    RngStream draw =
        root.child(stream::kCandidate).child(static_cast<std::uint64_t>(out.proposals));
    ++out.proposals;

    candidate[0] = ref.trajectory[0];
    candidate[1] = ref.trajectory[1];  // step 1 is the given displacement
    for (int step = 2; step <= n; ++step) {
      const Vec2 g = gradient_dir[step];
      const double along = innovation[step].x * g.x + innovation[step].y * g.y;
      const double ortho = root_sigma * draw.normal();
      ShipState& st = candidate[step];
      st.dx = candidate[step - 1].dx + along * g.x + ortho * -g.y;
      st.dy = candidate[step - 1].dy + along * g.y + ortho * g.x;
      st.x = candidate[step - 1].x + st.dx;
      st.y = candidate[step - 1].y + st.dy;
    }

    double residual_sq = 0.0;
    bool usable = true;
    for (int step = 1; step <= n && usable; ++step) {
      try {
        const double gap = ref.observations[step - 1].b -
                           azimuth(candidate[step].x, candidate[step].y);
        residual_sq += gap * gap;
      } catch (const DegeneratePosition&) {
        usable = false;
      }
    }
    if (usable && std::abs(residual_sq / n - p.s) <= band) {
      ++out.accepted;
      for (std::size_t c = 0; c < checkpoints.size(); ++c) {
        const int step = checkpoints[c];
        acc_x[c].add(candidate[step].x - ref.trajectory[step].x);
        acc_y[c].add(candidate[step].y - ref.trajectory[step].y);
      }
    }
    if (out.proposals >= 1000000 && out.accepted < out.proposals / 1000)
      throw InfeasibleBand("intrinsic_uncertainty: acceptance rate below 0.1% after " +
                           std::to_string(out.proposals) + " proposals");
  }

  for (std::size_t c = 0; c < checkpoints.size(); ++c)
    out.rows.push_back(IntrinsicRow{checkpoints[c], acc_x[c].sd(), acc_y[c].sd()});
  return out;
}

RunStats discrepancy_study(const ExperimentConfig& cfg) {
  cfg.model.validate();
  if (cfg.runs < 1) throw InvalidInput("discrepancy_study: runs must be >= 1");
  if (cfg.particles < 1) throw InvalidInput("discrepancy_study: particles must be >= 1");

  const std::vector<int> checkpoints = checkpoint_steps(cfg.model.n_steps);
  const RngStream root(cfg.master_seed);
  constexpr double kFail = std::numeric_limits<double>::quiet_NaN();
  // errors[run][checkpoint]
  std::vector<std::vector<Vec2>> errors(cfg.runs,
                                        std::vector<Vec2>(checkpoints.size(), Vec2{kFail, kFail}));

  parallel_for(cfg.runs, cfg.threads, [&](int run) {
    const RngStream job = root.child(stream::kRun).child(static_cast<std::uint64_t>(run));
    FilterOptions opts;
    opts.policy = cfg.policy;
    opts.forward = cfg.forward;
    opts.smoothing = cfg.smoothing;
    try {
      const Truth truth = generate_truth(cfg.model, job.child(1).key());
      const FilterOutput fo =
          run_filter(truth.observations, cfg.model, cfg.particles, opts, job.child(2).key());
      for (std::size_t c = 0; c < checkpoints.size(); ++c) {
        const int step = checkpoints[c];
        errors[run][c] = Vec2{fo.estimates[step - 1].x - truth.trajectory[step].x,
                              fo.estimates[step - 1].y - truth.trajectory[step].y};
      }
    } catch (const FilterError&) {
      // failed run: all checkpoints stay NaN
    }
  });

  RunStats stats;
  stats.particles = cfg.particles;
  for (std::size_t c = 0; c < checkpoints.size(); ++c) {
    MomentAccumulator mx, my;
    for (int run = 0; run < cfg.runs; ++run) {
      if (std::isnan(errors[run][c].x)) continue;
      mx.add(errors[run][c].x);
      my.add(errors[run][c].y);
    }
    if (c == 0) {
      stats.runs = mx.n;
      stats.failures = cfg.runs - mx.n;
      if (stats.failures > 0.01 * cfg.runs)
        throw FilterError("discrepancy_study: " + std::to_string(stats.failures) + " of " +
                          std::to_string(cfg.runs) + " runs failed");
    }
    CheckpointStats row;
    row.step = checkpoints[c];
    row.mean_x = mx.mean();
    row.mean_y = my.mean();
    if (mx.n > 1) {
      row.sd_x = mx.sd();
      row.sd_y = my.sd();
      row.se_x = *row.sd_x / std::sqrt(static_cast<double>(mx.n));
      row.se_y = *row.sd_y / std::sqrt(static_cast<double>(my.n));
    }
    stats.checkpoints.push_back(row);
  }
  return stats;
}

RobustnessResult robustness_study(const ExperimentConfig& cfg, double perturb_x0,
                                  double perturb_y0, double sigma_jitter_eps) {
  cfg.model.validate();
  if (!(sigma_jitter_eps >= 0.0) || sigma_jitter_eps >= 1.0)
    throw InvalidInput("robustness_study: sigma jitter must lie in [0, 1)");

  const RngStream root(cfg.master_seed);
  const RngStream job = root.child(stream::kRun).child(0);
  const Truth truth = generate_truth(cfg.model, job.child(1).key());
  const std::uint64_t filter_seed = job.child(2).key();

  FilterOptions opts;
  opts.policy = cfg.policy;
  opts.forward = cfg.forward;
  opts.smoothing = cfg.smoothing;

  auto reconstruct = [&](const ModelParams& params) {
    const FilterOutput fo =
        run_filter(truth.observations, params, cfg.particles, opts, filter_seed);
    std::vector<Vec2> pts;
    pts.reserve(fo.estimates.size() + 1);
    pts.push_back(Vec2{params.x0, params.y0});
    pts.insert(pts.end(), fo.estimates.begin(), fo.estimates.end());
    return pts;
  };

  RobustnessResult out;
  std::vector<Vec2> truth_pts;
  truth_pts.reserve(truth.trajectory.size());
  for (const ShipState& st : truth.trajectory) truth_pts.push_back(Vec2{st.x, st.y});
  out.series.push_back(TrajectorySeries{"truth", std::move(truth_pts)});
  out.series.push_back(TrajectorySeries{"baseline", reconstruct(cfg.model)});

  ModelParams perturbed = cfg.model;
  perturbed.x0 += perturb_x0;
  perturbed.y0 += perturb_y0;
  out.series.push_back(TrajectorySeries{"perturbed", reconstruct(perturbed)});

  RngStream jitter = root.child(stream::kSigmaJitter);
  double sigma_assumed = cfg.model.sigma * (1.0 + sigma_jitter_eps * jitter.normal());
  while (sigma_assumed <= 0.0) {
    ++out.sigma_redraws;
    sigma_assumed = cfg.model.sigma * (1.0 + sigma_jitter_eps * jitter.normal());
  }
  out.sigma_drawn = sigma_assumed;
  ModelParams jittered = cfg.model;
  jittered.sigma = sigma_assumed;
  out.series.push_back(TrajectorySeries{"sigma_jitter", reconstruct(jittered)});
  return out;
}

namespace {

bool check(std::ostream& log, const std::string& name, bool ok) {
  log << (ok ? "PASS " : "FAIL ") << name << "\n";
  return ok;
}

}  // namespace

int selftest(std::ostream& log) {
  bool all = true;
  RngStream rng(0x5e1f7e57);

  // Gaussian product identity on random merges and probe points.
  {
    double worst = 0.0;
    for (int trial = 0; trial < 2000; ++trial) {
      const Gaussian1D g1(10.0 * (rng.uniform01() - 0.5), 0.05 + 5.0 * rng.uniform01());
      const Gaussian1D g2(10.0 * (rng.uniform01() - 0.5), 0.05 + 5.0 * rng.uniform01());
      const MergeResult m = merge(g1, g2);
      for (int probe = 0; probe < 3; ++probe) {
        const double x = m.merged.mean + 8.0 * (rng.uniform01() - 0.5);
        const double lhs = log_density_unnormalized(g1, x) + log_density_unnormalized(g2, x);
        const double rhs = log_density_unnormalized(m.merged, x) - m.phase;
        worst = std::max(worst, std::abs(lhs - rhs));
      }
    }
    all &= check(log, "gaussian product identity (worst " + std::to_string(worst) + ")",
                 worst < 1e-10);
  }

  // Standardizing a pushed-through draw recovers the draw.
  {
    double worst = 0.0;
    for (int trial = 0; trial < 2000; ++trial) {
      const Gaussian1D g(20.0 * (rng.uniform01() - 0.5), 0.01 + 10.0 * rng.uniform01());
      const double xi = rng.normal();
      const double back = (sample_from(g, xi) - g.mean) / std::sqrt(g.variance);
      worst = std::max(worst, std::abs(back - xi));
    }
    all &= check(log, "reference-draw round trip", worst < 1e-12);
  }

  // Discrete path-density identity for the conditioned-path sampler.
  {
    double worst = 0.0;
    BridgeSpec spec;
    spec.noise_scale = 1.0;
    spec.horizon = 1.0;
    spec.levels = 4;
    spec.x_start = 0.0;
    spec.x_end = 1.0;
    const std::vector<std::pair<std::function<double(double, double)>,
                                std::function<double(double, double)>>>
        drifts = {{[](double, double) { return 0.0; }, [](double, double) { return 0.0; }},
                  {[](double x, double) { return -x; }, [](double, double) { return -1.0; }}};
    for (const auto& [f, fp] : drifts) {
      spec.drift = f;
      spec.drift_slope = fp;
      for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> xi(spec.steps() - 1);
        double xi_sq = 0.0;
        for (double& v : xi) {
          v = rng.normal();
          xi_sq += v * v;
        }
        const PathSample path = bridge_iterate(spec, xi);
        std::vector<double> full(spec.steps() + 1);
        full.front() = spec.x_start;
        full.back() = spec.x_end;
        std::copy(path.values.begin(), path.values.end(), full.begin() + 1);
        const StepParams sp = step_params(full, spec);
        double quad = 0.0;
        for (int k = 0; k < spec.steps(); ++k) {
          const double inc = full[k + 1] - full[k] - sp.a[k];
          quad += inc * inc / sp.var[k];
        }
        const double expected = xi_sq + 2.0 * path.endpoint_phase;
        worst = std::max(worst, std::abs(quad - expected) / std::max(1.0, std::abs(expected)));
      }
    }
    all &= check(log, "bridge quadratic-form identity (worst " + std::to_string(worst) + ")",
                 worst < 1e-8);
  }

  // Forward-step consistency identity over a short filter run.
  {
    ModelParams p;
    p.n_steps = 40;
    const Truth truth = generate_truth(p, 42);
    FilterOptions opts;
    opts.track_consistency = true;
    const FilterOutput fo = run_filter(truth.observations, p, 10, opts, 43);
    all &= check(log,
                 "forward-step log-density identity (worst " +
                     std::to_string(fo.max_consistency_residual) + ")",
                 fo.consistency_violations == 0);
  }

  log << (all ? "selftest: all checks passed\n" : "selftest: FAILURES\n");
  return all ? 0 : 1;
}

}  // namespace dpf
