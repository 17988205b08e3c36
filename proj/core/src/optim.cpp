#include "sen/optim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "sen/errors.hpp"
#include "sen/random.hpp"
#include "sen/text_io.hpp"

namespace sen {

namespace {

constexpr double kInitEmbeddingSd = 0.1;
constexpr double kInitSigmaFloor = 0.1;

struct Moments {
  double mean = 0.0;
  double sd = 0.0;
  bool valid = false;
};

Moments moments_of(const std::vector<double>& xs) {
  Moments m;
  if (xs.empty()) return m;
  for (double x : xs) m.mean += x;
  m.mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - m.mean) * (x - m.mean);
  m.sd = std::sqrt(var / static_cast<double>(xs.size()));
  m.valid = true;
  return m;
}

double quantile_of(std::vector<double> xs, double q) {
  std::sort(xs.begin(), xs.end());
  const double pos = q * static_cast<double>(xs.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const auto hi = std::min(lo + 1, xs.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return xs[lo] * (1.0 - frac) + xs[hi] * frac;
}

}  // namespace

ModelParameters initialize(const SingleEventNetwork& net, const ModelSpec& spec,
                           std::uint64_t seed) {
  validate_model_spec(spec);
  ModelParameters params(spec, net.num_targets(), net.num_sources(), net.horizon());
  Rng rng(mix_seed(seed, fnv1a64("init/embeddings")));
  for (int i = 0; i < net.num_targets(); ++i)
    for (int d = 0; d < spec.dim; ++d) params.z(i, d) = rng.normal(0.0, kInitEmbeddingSd);
  for (int j = 0; j < net.num_sources(); ++j)
    for (int d = 0; d < spec.dim; ++d) params.w(j, d) = rng.normal(0.0, kInitEmbeddingSd);
  // alpha, beta start at zero (the vector is zero-initialized).

  if (!variant_uses_impact(spec.variant)) return params;

  const double clamp = 1e-6 * std::max(net.horizon(), 1e-30);
  const bool log_scale = (params.impact_kind() == ImpactKind::kLogNormal ||
                          params.impact_kind() == ImpactKind::kPALogNormal);

  // Per-target elapsed citation times, on the scale the family is fitted on.
  std::vector<std::vector<double>> elapsed(net.num_targets());
  std::vector<double> pooled;
  std::vector<double> pooled_raw;
  for (const Event& e : net.events()) {
    const double raw = std::max(e.time - net.target_time(e.target), clamp);
    const double v = log_scale ? std::log(raw) : raw;
    elapsed[e.target].push_back(v);
    pooled.push_back(v);
    pooled_raw.push_back(raw);
  }
  const Moments global = moments_of(pooled);

  if (variant_impact_frozen(spec.variant)) {
    // Empirical fit, frozen for the whole run.
    std::vector<double> raw_times;
    for (int i = 0; i < net.num_targets(); ++i) {
      raw_times.clear();
      for (const Event& e : net.events_of_target(i))
        raw_times.push_back(std::max(e.time - net.target_time(i), clamp));
      if (raw_times.empty()) {
        if (pooled_raw.empty())
          raw_times.push_back(std::max(net.horizon() * 0.5, clamp));
        else
          raw_times = pooled_raw;
      }
      params.set_impact(i, fit_empirical(raw_times, params.impact_kind(), net.horizon()));
    }
    return params;
  }

  for (int i = 0; i < net.num_targets(); ++i) {
    const Moments own = moments_of(elapsed[i]);
    const Moments m = own.valid ? own : global;
    const double mean = m.valid ? m.mean : (log_scale ? 0.0 : 0.5 * net.horizon());
    const double sd = std::max(m.valid ? m.sd : 0.0, kInitSigmaFloor);
    if (params.mixture_k() == 0) {
      params.impact_slot(i, params.slot_mu()) = mean;
      params.impact_slot(i, params.slot_log_sigma()) = std::log(sd);
      continue;
    }
    // Components spread over the elapsed-time quantiles (falling back to an
    // even spread over the horizon) so they can separate during training.
    const int k = params.mixture_k();
    const auto& sample = elapsed[i].size() >= 2 ? elapsed[i] : pooled;
    for (int c = 0; c < k; ++c) {
      const double q = (c + 0.5) / static_cast<double>(k);
      const double center =
          sample.empty() ? q * net.horizon() : quantile_of(sample, q);
      params.impact_slot(i, c) = 0.0;  // logits
      params.impact_slot(i, k + c) = center;
      params.impact_slot(i, 2 * k + c) = std::log(sd);
    }
  }
  return params;
}

void adam_step(ModelParameters& params, const std::vector<double>& grad,
               AdamState& state, const TrainConfig& config, int iteration) {
  if (state.m.empty()) {
    state.m.assign(params.size(), 0.0);
    state.v.assign(params.size(), 0.0);
  }
  if (grad.size() != params.size() || state.m.size() != params.size())
    throw InvalidParams("adam_step: shape mismatch");

  const auto mask = params.frozen_mask();
  const double b1 = config.adam_beta1;
  const double b2 = config.adam_beta2;
  const double bc1 = 1.0 - std::pow(b1, iteration);
  const double bc2 = 1.0 - std::pow(b2, iteration);
  for (std::size_t s = 0; s < params.size(); ++s) {
    if (mask[s]) continue;
    state.m[s] = b1 * state.m[s] + (1.0 - b1) * grad[s];
    state.v[s] = b2 * state.v[s] + (1.0 - b2) * grad[s] * grad[s];
    const double m_hat = state.m[s] / bc1;
    const double v_hat = state.v[s] / bc2;
    params.data()[s] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.adam_eps);
  }
}

void write_trace_csv(const TrainTrace& trace, const std::string& path) {
  std::ostringstream out;
  out << "iteration,nll_estimate,ms\n";
  for (const TraceRow& row : trace.rows)
    out << row.iteration << ',' << format_double(row.nll) << ','
        << format_double(row.ms) << '\n';
  write_file(path, out.str());
}

FitResult fit(const SingleEventNetwork& net, const ModelSpec& spec,
              const TrainConfig& config, const ExcludeSet* exclude,
              const CheckpointFn& checkpoint) {
  if (!(config.learning_rate > 0.0)) throw InvalidParams("learning rate must be > 0");
  if (config.iterations < 1) throw InvalidParams("iterations must be >= 1");

  FitResult result{initialize(net, spec, config.seed), {}};
  ModelParameters& params = result.params;
  AdamState state;
  double lr = config.learning_rate;

  CaseControlSample pinned_sample;
  bool have_pinned = false;
  if (config.case_control && !config.case_control->resample_every_iteration) {
    pinned_sample = sample_case_controls(net, *config.case_control, exclude,
                                         config.case_control->seed);
    have_pinned = true;
  }

  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed_ms = [&]() {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                     t0)
        .count();
  };

  for (int it = 1; it <= config.iterations; ++it) {
    CaseControlSample fresh;
    const CaseControlSample* sample = nullptr;
    if (config.case_control) {
      if (have_pinned) {
        sample = &pinned_sample;
      } else {
        fresh = sample_case_controls(
            net, *config.case_control, exclude,
            mix_seed(config.case_control->seed, static_cast<std::uint64_t>(it)));
        sample = &fresh;
      }
    }

    auto objective = [&]() {
      return sample ? -log_likelihood_case_control(params, net, *sample)
                    : -log_likelihood(params, net, exclude, config.threads);
    };

    double nll;
    std::vector<double> grad;
    try {
      nll = objective();
      grad = gradients(params, net, sample, exclude, config.threads);
    } catch (const NumericalError&) {
      nll = std::numeric_limits<double>::quiet_NaN();
    }

    // One retry with a halved learning rate; the halving is permanent.
    if (!std::isfinite(nll)) {
      lr *= 0.5;
      try {
        nll = objective();
        grad = gradients(params, net, sample, exclude, config.threads);
      } catch (const NumericalError&) {
        nll = std::numeric_limits<double>::quiet_NaN();
      }
      if (!std::isfinite(nll)) {
        if (checkpoint && params.all_finite()) checkpoint(it, params);
        throw NumericalError("objective diverged at iteration " + std::to_string(it));
      }
    }

    const bool log_now = (it == 1) || (config.log_every > 0 && it % config.log_every == 0) ||
                         (it == config.iterations);
    if (log_now) {
      result.trace.rows.push_back({it, nll, elapsed_ms()});
      if (checkpoint && it != config.iterations) checkpoint(it, params);
    }

    TrainConfig step_config = config;
    step_config.learning_rate = lr;
    const ModelParameters before_step = params;
    adam_step(params, grad, state, step_config, it);

    if (!params.all_finite()) {
      if (checkpoint) checkpoint(it, before_step);
      throw NumericalError("parameters became non-finite at iteration " +
                           std::to_string(it));
    }
  }

  if (checkpoint) checkpoint(config.iterations, params);
  return result;
}

}  // namespace sen
