#include "dpf/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "dpf/errors.hpp"
#include "dpf/filter.hpp"
#include "dpf/parallel.hpp"
#include "dpf/rng.hpp"

namespace dpf {

double discriminant_from_diffs(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size() || u.empty())
    throw InvalidInput("discriminant: need matching nonempty difference sequences");
  double su = 0.0, sv = 0.0, squares = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    su += u[i];
    sv += v[i];
    squares += u[i] * u[i] + v[i] * v[i];
  }
  if (squares == 0.0)
    throw InvalidInput("discriminant undefined: all displacement differences are zero");
  const double d = (su * su + sv * sv) / squares;
  const double bound = static_cast<double>(u.size());
  if (!(d >= 0.0) || d > bound * (1.0 + 1e-12))
    throw FilterError("discriminant outside [0, n]: " + std::to_string(d));
  return d;
}

double discriminant(const DiscriminantInput& in) {
  if (in.window < 3) throw InvalidInput("discriminant: window must be >= 3");
  const std::size_t need = static_cast<std::size_t>(in.window) + 1;
  if (in.dx_seq.size() < need || in.dy_seq.size() < need)
    throw InvalidInput("discriminant: sums over j = 2..J consume J+1 displacements");
  std::vector<double> u(in.window - 1), v(in.window - 1);
  for (int j = 2; j <= in.window; ++j) {
    u[j - 2] = in.dx_seq[j] - in.dx_seq[j - 1];
    v[j - 2] = in.dy_seq[j] - in.dy_seq[j - 1];
  }
  return discriminant_from_diffs(u, v);
}

const std::vector<double>& default_ratio_grid() {
  static const std::vector<double> grid = {0.5, 0.6, 0.7, 0.8, 0.9, 1.0,
                                           1.1, 1.2, 1.3, 1.4, 1.5, 2.0};
  return grid;
}

namespace {

double trajectory_discriminant(const FilterOutput& out, const ScanConfig& cfg) {
  auto one = [&](std::size_t particle) {
    const auto& hist = out.displacement_history[particle];
    std::vector<double> dx(hist.size()), dy(hist.size());
    for (std::size_t t = 0; t < hist.size(); ++t) {
      dx[t] = hist[t].x;
      dy[t] = hist[t].y;
    }
    return discriminant(DiscriminantInput{dx, dy, cfg.window});
  };
  if (!cfg.average_all_particles) return one(0);
  double total = 0.0;
  for (std::size_t i = 0; i < out.displacement_history.size(); ++i) total += one(i);
  return total / static_cast<double>(out.displacement_history.size());
}

}  // namespace

std::vector<SigmaScanRow> sigma_scan(std::span<const double> ratios, const ScanConfig& cfg,
                                     const ModelParams& p, std::uint64_t seed) {
  p.validate();
  if (cfg.runs < 1) throw InvalidInput("sigma_scan: runs must be >= 1");
  if (cfg.particles < 1) throw InvalidInput("sigma_scan: particles must be >= 1");
  for (double ratio : ratios)
    if (!(ratio > 0.0)) throw InvalidInput("sigma_scan: ratios must be > 0");

  ModelParams truth_params = p;
  truth_params.n_steps = cfg.window + 1;  // the discriminant consumes dX^1..dX^{J+1}

  const RngStream root(seed);
  const int n_ratios = static_cast<int>(ratios.size());
  // values[run][ratio]; NaN marks a failed (ratio, run) cell
  std::vector<std::vector<double>> values(cfg.runs,
                                          std::vector<double>(n_ratios,
                                                              std::numeric_limits<double>::quiet_NaN()));

  parallel_for(cfg.runs, cfg.threads, [&](int run) {
    const RngStream job = root.child(stream::kRun).child(static_cast<std::uint64_t>(run));
    const Truth truth = generate_truth(truth_params, job.child(1).key());
    for (int ri = 0; ri < n_ratios; ++ri) {
      ModelParams assumed = truth_params;
      assumed.sigma = ratios[ri] * truth_params.sigma;
      FilterOptions opts;
      opts.record_history = true;
      try {
        const FilterOutput out =
            run_filter(truth.observations, assumed, cfg.particles, opts,
                       job.child(2).child(static_cast<std::uint64_t>(ri)).key());
        values[run][ri] = trajectory_discriminant(out, cfg);
      } catch (const FilterError&) {
        // leave the cell as NaN; counted below against the failure budget
      }
    }
  });

  std::vector<SigmaScanRow> rows(n_ratios);
  for (int ri = 0; ri < n_ratios; ++ri) {
    SigmaScanRow& row = rows[ri];
    row.ratio = ratios[ri];
    double sum = 0.0;
    for (int run = 0; run < cfg.runs; ++run) {
      const double d = values[run][ri];
      if (std::isnan(d)) {
        ++row.failures;
      } else {
        ++row.runs;
        sum += d;
      }
    }
    if (row.failures > cfg.failure_budget * cfg.runs)
      throw FilterError("sigma_scan: ratio " + std::to_string(row.ratio) + " lost " +
                        std::to_string(row.failures) + " of " + std::to_string(cfg.runs) +
                        " runs");
    if (row.runs == 0) throw FilterError("sigma_scan: no successful runs");
    row.mean_D = sum / row.runs;
    if (row.runs > 1) {
      double ss = 0.0;
      for (int run = 0; run < cfg.runs; ++run) {
        const double d = values[run][ri];
        if (!std::isnan(d)) ss += (d - row.mean_D) * (d - row.mean_D);
      }
      row.se_D = std::sqrt(ss / (row.runs - 1)) / std::sqrt(static_cast<double>(row.runs));
    }
  }
  return rows;
}

double estimate_sigma(std::span<const SigmaScanRow> scan, double sigma_base) {
  if (scan.size() < 2) throw InvalidInput("estimate_sigma: need at least two scan rows");
  std::vector<SigmaScanRow> rows(scan.begin(), scan.end());
  std::sort(rows.begin(), rows.end(),
            [](const SigmaScanRow& a, const SigmaScanRow& b) { return a.ratio < b.ratio; });
  for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
    const double lo = rows[i].mean_D - 1.0;
    const double hi = rows[i + 1].mean_D - 1.0;
    if (lo == 0.0) return rows[i].ratio * sigma_base;
    if (lo * hi <= 0.0) {
      const double t = lo / (lo - hi);  // hi != lo here since lo != 0 and lo*hi <= 0
      return (rows[i].ratio + t * (rows[i + 1].ratio - rows[i].ratio)) * sigma_base;
    }
  }
  if (rows.back().mean_D == 1.0) return rows.back().ratio * sigma_base;
  throw NoBracket("estimate_sigma: mean_D never crosses 1 on the scanned grid");
}

}  // namespace dpf
