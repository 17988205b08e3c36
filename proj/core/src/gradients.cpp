#include <algorithm>
#include <cmath>
#include <sstream>

#include "sen/errors.hpp"
#include "sen/model.hpp"
#include "sen/parallel.hpp"
#include "sen/text_io.hpp"

namespace sen {

namespace {

constexpr double kDistanceSmoothing = 1e-12;
constexpr double kElapsedClampFraction = 1e-6;
constexpr std::size_t kGradChunk = 64;

struct TargetGradContext {
  ImpactParams impact;
  double integral = 0.0;
  ImpactGrad d_integral;  // d integral(exposure) / d theta_i
};

// Adds c * d(gamma_ij)/d(params) into buffer; gamma = alpha_i + beta_j - d_ij.
void add_rate_gradient(const ModelParameters& params, int i, int j, double c,
                       std::vector<double>& buf) {
  buf[params.offset_alpha() + i] += c;
  if (variant_uses_beta(params.variant())) buf[params.offset_beta() + j] += c;
  const int dim = params.dim();
  if (dim == 0) return;
  double sq = kDistanceSmoothing;
  for (int d = 0; d < dim; ++d) {
    const double diff = params.z(i, d) - params.w(j, d);
    sq += diff * diff;
  }
  const double dist = std::sqrt(sq);
  const std::size_t zi = params.offset_z() + static_cast<std::size_t>(i) * dim;
  const std::size_t wj = params.offset_w() + static_cast<std::size_t>(j) * dim;
  for (int d = 0; d < dim; ++d) {
    const double diff = params.z(i, d) - params.w(j, d);
    const double g = c * diff / dist;
    buf[zi + d] -= g;
    buf[wj + d] += g;
  }
}

void add_impact_gradient(const ModelParameters& params, int i, const ImpactGrad& g,
                         double c, std::vector<double>& buf) {
  const int k = params.mixture_k();
  if (k == 0) {
    buf[params.impact_offset(i, 0)] += c * g.d_mu;
    buf[params.impact_offset(i, 1)] += c * g.d_log_sigma;
    return;
  }
  for (int slot = 0; slot < k; ++slot) {
    buf[params.impact_offset(i, slot)] += c * g.d_logits[slot];
    buf[params.impact_offset(i, k + slot)] += c * g.d_component_mu[slot];
    buf[params.impact_offset(i, 2 * k + slot)] += c * g.d_component_log_sigma[slot];
  }
}

// Log-likelihood gradient contributions of one target's dyads.
void accumulate_target(const ModelParameters& params, const SingleEventNetwork& net,
                       const std::vector<TargetGradContext>& ctx, int i,
                       const ExcludeSet* exclude, const std::vector<int>* subset,
                       double scale, bool impact_trainable, std::vector<double>& buf) {
  const double eps = kElapsedClampFraction * std::max(net.horizon(), 1e-30);
  const ImpactKind kind = params.impact_kind();
  const TargetGradContext& tc = ctx[i];

  for (const Event& e : net.events_of_target(i)) {
    const double core = log_rate_core(params, i, e.source);
    const double exp_core = std::exp(core);
    const double cum = tc.integral * exp_core;
    const double q = cum / (1.0 + cum);
    add_rate_gradient(params, i, e.source, 1.0 - q, buf);
    if (impact_trainable) {
      const double dt = std::max(e.time - net.target_time(i), eps);
      const ImpactGrad lg = impact_log_pdf_grad(kind, tc.impact, dt);
      add_impact_gradient(params, i, lg, 1.0, buf);
      add_impact_gradient(params, i, tc.d_integral, -exp_core / (1.0 + cum), buf);
    }
  }

  auto control_dyad = [&](int j, double weight) {
    const double core = log_rate_core(params, i, j);
    const double exp_core = std::exp(core);
    const double cum = tc.integral * exp_core;
    const double q = cum / (1.0 + cum);
    add_rate_gradient(params, i, j, -weight * q, buf);
    if (impact_trainable)
      add_impact_gradient(params, i, tc.d_integral,
                          -weight * exp_core / (1.0 + cum), buf);
  };

  if (subset) {
    for (int j : *subset) control_dyad(j, scale);
  } else {
    for (std::int64_t o = 0; o < net.admissible_count(i); ++o) {
      const int j = net.sources_by_time()[net.first_admissible(i) + o];
      if (net.has_event(i, j)) continue;
      if (exclude && exclude->contains(i, j)) continue;
      control_dyad(j, 1.0);
    }
  }
}

}  // namespace

std::vector<double> gradients(const ModelParameters& params,
                              const SingleEventNetwork& net,
                              const CaseControlSample* sample,
                              const ExcludeSet* exclude, int threads) {
  const int n_targets = net.num_targets();
  const bool impact_trainable =
      variant_uses_impact(params.variant()) && !variant_impact_frozen(params.variant());

  std::vector<TargetGradContext> ctx(n_targets);
  for (int i = 0; i < n_targets; ++i) {
    ctx[i].impact = params.impact_view(i);
    const double exposure = net.horizon() - net.target_time(i);
    if (exposure > 0.0) {
      ctx[i].integral = impact_integral(params.impact_kind(), ctx[i].impact, exposure);
      if (impact_trainable)
        ctx[i].d_integral =
            impact_integral_grad(params.impact_kind(), ctx[i].impact, exposure);
    } else if (impact_trainable && params.mixture_k() > 0) {
      ctx[i].d_integral.resize_mixture(params.mixture_k());
    }
  }

  // Per-worker accumulation buffers with a static chunk assignment, merged in
  // worker order: reruns with the same thread count reduce identically.
  const std::size_t n_chunks = (static_cast<std::size_t>(n_targets) + kGradChunk - 1) / kGradChunk;
  const int n_workers = std::max(
      1, std::min<int>(threads, n_chunks == 0 ? 1 : static_cast<int>(n_chunks)));
  std::vector<std::vector<double>> buffers(
      static_cast<std::size_t>(n_workers), std::vector<double>(params.size(), 0.0));

  for_each_chunk_static(
      static_cast<std::size_t>(n_targets), threads, kGradChunk,
      [&](int worker, std::size_t lo, std::size_t hi) {
        auto& buf = buffers[static_cast<std::size_t>(worker)];
        for (std::size_t i = lo; i < hi; ++i) {
          const int ti = static_cast<int>(i);
          if (sample) {
            accumulate_target(params, net, ctx, ti, nullptr, &sample->controls[ti],
                              sample->scale[ti], impact_trainable, buf);
          } else {
            accumulate_target(params, net, ctx, ti, exclude, nullptr, 1.0,
                              impact_trainable, buf);
          }
        }
      });

  std::vector<double> grad(params.size(), 0.0);
  for (const auto& buf : buffers)
    for (std::size_t s = 0; s < grad.size(); ++s) grad[s] += buf[s];

  // Objective is the negative log-likelihood.
  for (double& g : grad) g = -g;
  const auto mask = params.frozen_mask();
  for (std::size_t s = 0; s < grad.size(); ++s)
    if (mask[s]) grad[s] = 0.0;

  for (std::size_t s = 0; s < grad.size(); ++s)
    if (!std::isfinite(grad[s]))
      throw NumericalError("non-finite gradient at " + params.slot_name(s));
  return grad;
}

std::vector<double> finite_difference_gradients(const ModelParameters& params,
                                                const SingleEventNetwork& net,
                                                const CaseControlSample* sample,
                                                const ExcludeSet* exclude, double h) {
  auto objective = [&](const ModelParameters& p) {
    return sample ? -log_likelihood_case_control(p, net, *sample)
                  : -log_likelihood(p, net, exclude);
  };
  ModelParameters work = params;
  const auto mask = params.frozen_mask();
  std::vector<double> fd(params.size(), 0.0);
  for (std::size_t s = 0; s < params.size(); ++s) {
    if (mask[s]) continue;
    const double saved = work.data()[s];
    work.data()[s] = saved + h;
    const double up = objective(work);
    work.data()[s] = saved - h;
    const double down = objective(work);
    work.data()[s] = saved;
    fd[s] = (up - down) / (2.0 * h);
  }
  return fd;
}

void write_gradient_check_csv(const ModelParameters& params,
                              const SingleEventNetwork& net, double h,
                              const std::string& path) {
  const auto analytic = gradients(params, net);
  const auto numeric = finite_difference_gradients(params, net, nullptr, nullptr, h);
  std::ostringstream out;
  out << "param,analytic,numeric,rel_error\n";
  for (std::size_t s = 0; s < params.size(); ++s) {
    const double denom = std::max({1.0, std::abs(analytic[s]), std::abs(numeric[s])});
    out << params.slot_name(s) << ',' << format_double(analytic[s]) << ','
        << format_double(numeric[s]) << ','
        << format_double(std::abs(analytic[s] - numeric[s]) / denom) << '\n';
  }
  write_file(path, out.str());
}

}  // namespace sen
