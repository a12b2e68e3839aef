#include "dpf/filter.hpp"

#include <algorithm>
#include <cmath>

#include "dpf/smoother.hpp"

namespace dpf {

double forward_consistency_residual(const ShipState& before, const ForwardResult& result,
                                    double b_next, const ModelParams& p, const RefPair& refs) {
  if (!(p.sigma > 0.0) || !(p.s > 0.0))
    throw InvalidInput("forward_consistency_residual: needs sigma > 0 and s > 0");
  const double lhs = -0.5 * (refs.xi_x * refs.xi_x + refs.xi_y * refs.xi_y);
  const double mx = result.dx - before.dx;
  const double my = result.dy - before.dy;
  const double obs_gap = azimuth(result.new_state.x, result.new_state.y) - b_next;
  const double rhs = -(mx * mx + my * my) / (2.0 * p.sigma) -
                     obs_gap * obs_gap / (2.0 * p.s) + result.phase;
  return std::abs(lhs - rhs);
}

std::vector<std::size_t> resample_indices(std::span<const double> phases,
                                          std::span<const double> uniform_draws) {
  if (phases.empty()) throw InvalidInput("resample: empty ensemble");
  double shift = phases[0];
  for (double phi : phases) {
    if (!std::isfinite(phi)) throw InvalidInput("resample: non-finite phase");
    shift = std::min(shift, phi);
  }
  // Subtracting the minimum phase keeps the weights away from underflow and
  // provably does not change the selection.
  std::vector<double> cdf(phases.size());
  double total = 0.0;
  for (std::size_t i = 0; i < phases.size(); ++i) {
    total += std::exp(-(phases[i] - shift));
    cdf[i] = total;
  }
  std::vector<std::size_t> picks(uniform_draws.size());
  for (std::size_t k = 0; k < uniform_draws.size(); ++k) {
    const double theta = uniform_draws[k];
    if (!(theta >= 0.0) || theta >= 1.0)
      throw InvalidInput("resample: uniform draw outside [0, 1)");
    const double target = theta * total;
    // theta = 0 resolves to the first particle with positive weight
    const auto it = target > 0.0 ? std::lower_bound(cdf.begin(), cdf.end(), target)
                                 : std::upper_bound(cdf.begin(), cdf.end(), 0.0);
    picks[k] = it == cdf.end() ? phases.size() - 1
                               : static_cast<std::size_t>(it - cdf.begin());
  }
  return picks;
}

Ensemble resample(const Ensemble& particles, std::span<const double> uniform_draws) {
  if (uniform_draws.size() != particles.size())
    throw InvalidInput("resample: need one uniform draw per particle");
  std::vector<double> phases(particles.size());
  for (std::size_t i = 0; i < particles.size(); ++i) phases[i] = particles[i].phase_accum;
  const std::vector<std::size_t> picks = resample_indices(phases, uniform_draws);
  Ensemble out;
  out.reserve(particles.size());
  for (std::size_t pick : picks) out.push_back(Particle{particles[pick].state, 0.0});
  return out;
}

std::optional<std::vector<std::size_t>> plan_resample(std::span<const double> phases,
                                                      const ResamplePolicy& policy,
                                                      RngStream& rng) {
  if (phases.empty()) throw InvalidInput("plan_resample: empty ensemble");
  const std::size_t m = phases.size();
  auto draw = [&rng](std::size_t count) {
    std::vector<double> u(count);
    for (double& v : u) v = rng.uniform01();
    return u;
  };
  switch (policy.kind) {
    case ResamplePolicy::Kind::never:
      return std::nullopt;
    case ResamplePolicy::Kind::every_step: {
      const std::vector<double> u = draw(m);
      return resample_indices(phases, u);
    }
    case ResamplePolicy::Kind::ratio_threshold: {
      if (!(policy.ratio_limit > 1.0))
        throw InvalidInput("ResamplePolicy: ratio limit must be > 1");
      const auto [lo, hi] = std::minmax_element(phases.begin(), phases.end());
      if (!(*hi - *lo > std::log(policy.ratio_limit))) return std::nullopt;
      const std::vector<double> u = draw(m);
      return resample_indices(phases, u);
    }
    case ResamplePolicy::Kind::subsets: {
      const std::size_t size = static_cast<std::size_t>(policy.subset_size);
      if (policy.subset_size < 2) throw InvalidInput("ResamplePolicy: subset size must be >= 2");
      if (size > m) throw InvalidInput("ResamplePolicy: subset size exceeds the ensemble");
      std::vector<std::size_t> picks(m);
      for (std::size_t start = 0; start < m; start += size) {
        const std::size_t count = std::min(size, m - start);
        const std::vector<double> u = draw(count);
        const std::vector<std::size_t> local =
            resample_indices(phases.subspan(start, count), u);
        for (std::size_t k = 0; k < count; ++k) picks[start + k] = start + local[k];
      }
      return picks;
    }
  }
  throw InvalidInput("plan_resample: unknown policy");
}

Ensemble maybe_resample(const Ensemble& particles, const ResamplePolicy& policy,
                        RngStream& rng) {
  std::vector<double> phases(particles.size());
  for (std::size_t i = 0; i < particles.size(); ++i) phases[i] = particles[i].phase_accum;
  const auto plan = plan_resample(phases, policy, rng);
  if (!plan) return particles;
  Ensemble out;
  out.reserve(particles.size());
  for (std::size_t pick : *plan) out.push_back(Particle{particles[pick].state, 0.0});
  return out;
}

FilterOutput run_filter(std::span<const Observation> obs, const ModelParams& p, int particles,
                        const FilterOptions& opts, std::uint64_t seed) {
  p.validate();
  if (obs.empty()) throw InvalidInput("run_filter: no observations");
  if (particles < 1) throw InvalidInput("run_filter: need at least one particle");
  if (opts.policy.kind == ResamplePolicy::Kind::subsets &&
      opts.policy.subset_size > particles)
    throw InvalidInput("run_filter: subset size exceeds the ensemble");

  const RngStream root(seed);
  const std::size_t m = static_cast<std::size_t>(particles);
  Ensemble ens(m, Particle{ShipState{p.x0, p.y0, p.dx1, p.dy1}, 0.0});
  // State two steps back per particle; the smoother interpolates against it.
  std::vector<ShipState> before_prev(m, ens[0].state);

  FilterOutput out;
  out.estimates.reserve(obs.size());
  if (opts.record_history) out.displacement_history.assign(m, {});
  if (opts.record_particles) out.particle_dump.reserve(obs.size());

  std::vector<double> phases(m);

  for (std::size_t k = 0; k < obs.size(); ++k) {
    const int step = static_cast<int>(k) + 1;
    const double b = obs[k].b;

    for (std::size_t i = 0; i < m; ++i) {
      RngStream ref_stream =
          root.child(stream::kForwardRefs).child(step).child(static_cast<std::uint64_t>(i));
      const RefPair refs{ref_stream.normal(), ref_stream.normal()};
      const ShipState mid_state = ens[i].state;  // time step-1

      ForwardResult fwd;
      try {
        fwd = forward_step(mid_state, b, p, refs, opts.forward);
      } catch (const FilterError& err) {
        throw FilterError("run_filter: step " + std::to_string(step) + ", particle " +
                          std::to_string(i) + ": " + err.what());
      }
      if (opts.track_consistency && p.sigma > 0.0 && p.s > 0.0) {
        const double res = forward_consistency_residual(mid_state, fwd, b, p, refs);
        out.max_consistency_residual = std::max(out.max_consistency_residual, res);
        if (res > 1e-8) ++out.consistency_violations;
      }
      out.max_forward_iterations = std::max(out.max_forward_iterations, fwd.iterations_used);

      double phase_add = fwd.phase;
      ShipState new_state = fwd.new_state;
      ShipState corrected_mid = mid_state;
      if (opts.smoothing && step >= 2) {
        RngStream back_stream = root.child(stream::kSmootherBackward)
                                    .child(step)
                                    .child(static_cast<std::uint64_t>(i));
        RngStream refwd_stream = root.child(stream::kSmootherForward)
                                     .child(step)
                                     .child(static_cast<std::uint64_t>(i));
        const RefPair refs_back{back_stream.normal(), back_stream.normal()};
        const RefPair refs_fwd{refwd_stream.normal(), refwd_stream.normal()};
        SmoothingResult sm;
        try {
          sm = apply_smoothing(before_prev[i], fwd.new_state, obs[k - 1].b, b, p,
                               opts.forward, refs_back, refs_fwd);
        } catch (const FilterError& err) {
          throw FilterError("run_filter: smoothing at step " + std::to_string(step) +
                            ", particle " + std::to_string(i) + ": " + err.what());
        }
        corrected_mid = sm.corrected_mid;
        new_state = sm.corrected_next;
        phase_add = sm.phase_added;
        out.max_forward_iterations = std::max(out.max_forward_iterations, sm.iterations_used);
      }

      if (opts.record_history) {
        auto& hist = out.displacement_history[i];
        if (opts.smoothing && step >= 2)
          hist[k - 1] = Vec2{corrected_mid.dx, corrected_mid.dy};
        hist.push_back(Vec2{new_state.dx, new_state.dy});
      }
      before_prev[i] = corrected_mid;
      ens[i].state = new_state;
      ens[i].phase_accum += phase_add;
    }

    for (std::size_t i = 0; i < m; ++i) phases[i] = ens[i].phase_accum;
    RngStream resample_stream = root.child(stream::kResample).child(step);
    if (const auto plan = plan_resample(phases, opts.policy, resample_stream)) {
      Ensemble next;
      next.reserve(m);
      std::vector<ShipState> next_before;
      next_before.reserve(m);
      std::vector<std::vector<Vec2>> next_hist;
      if (opts.record_history) next_hist.reserve(m);
      for (std::size_t pick : *plan) {
        next.push_back(Particle{ens[pick].state, 0.0});
        next_before.push_back(before_prev[pick]);
        if (opts.record_history) next_hist.push_back(out.displacement_history[pick]);
      }
      ens = std::move(next);
      before_prev = std::move(next_before);
      if (opts.record_history) out.displacement_history = std::move(next_hist);
      ++out.resamples;
    }

    // Estimate: weighted mean; after an actual resample all phases are zero
    // and this reduces to the plain average.
    double shift = ens[0].phase_accum;
    for (const Particle& part : ens) shift = std::min(shift, part.phase_accum);
    double wsum = 0.0, ex = 0.0, ey = 0.0;
    for (const Particle& part : ens) {
      const double w = std::exp(-(part.phase_accum - shift));
      wsum += w;
      ex += w * part.state.x;
      ey += w * part.state.y;
    }
    out.estimates.push_back(Vec2{ex / wsum, ey / wsum});

    if (opts.record_particles) {
      std::vector<ParticleSnapshot> snap(m);
      for (std::size_t i = 0; i < m; ++i)
        snap[i] = ParticleSnapshot{ens[i].state.x, ens[i].state.y, ens[i].phase_accum};
      out.particle_dump.push_back(std::move(snap));
    }
  }
  return out;
}

}  // namespace dpf
