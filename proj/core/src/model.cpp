#include "sen/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sen/errors.hpp"
#include "sen/parallel.hpp"
#include "sen/random.hpp"
#include "sen/text_io.hpp"

namespace sen {

namespace {
constexpr double kDistanceSmoothing = 1e-12;
constexpr double kElapsedClampFraction = 1e-6;
}  // namespace

const char* model_variant_name(ModelVariant v) {
  switch (v) {
    case ModelVariant::kIfm: return "ifm";
    case ModelVariant::kPam: return "pam";
    case ModelVariant::kTpam: return "tpam";
    case ModelVariant::kLdm: return "ldm";
    case ModelVariant::kDisee: return "disee";
    case ModelVariant::kDiseePa: return "disee-pa";
    case ModelVariant::kFiDisee: return "fi-disee";
    case ModelVariant::kFiDiseePa: return "fi-disee-pa";
  }
  return "unknown";
}

ModelVariant model_variant_from_name(const std::string& name) {
  if (name == "ifm") return ModelVariant::kIfm;
  if (name == "pam") return ModelVariant::kPam;
  if (name == "tpam") return ModelVariant::kTpam;
  if (name == "ldm") return ModelVariant::kLdm;
  if (name == "disee") return ModelVariant::kDisee;
  if (name == "disee-pa") return ModelVariant::kDiseePa;
  if (name == "fi-disee") return ModelVariant::kFiDisee;
  if (name == "fi-disee-pa") return ModelVariant::kFiDiseePa;
  throw InvalidParams("unknown model variant: " + name);
}

const char* impact_family_name(ImpactFamily f) {
  switch (f) {
    case ImpactFamily::kLogNormal: return "log-normal";
    case ImpactFamily::kTruncatedNormal: return "truncated-normal";
    case ImpactFamily::kMixture: return "mixture";
  }
  return "unknown";
}

ImpactFamily impact_family_from_name(const std::string& name) {
  if (name == "log-normal") return ImpactFamily::kLogNormal;
  if (name == "truncated-normal") return ImpactFamily::kTruncatedNormal;
  if (name == "mixture") return ImpactFamily::kMixture;
  throw InvalidParams("unknown impact family: " + name);
}

bool variant_uses_embedding(ModelVariant v) {
  switch (v) {
    case ModelVariant::kLdm:
    case ModelVariant::kDisee:
    case ModelVariant::kDiseePa:
    case ModelVariant::kFiDisee:
    case ModelVariant::kFiDiseePa:
      return true;
    default:
      return false;
  }
}

bool variant_uses_beta(ModelVariant v) { return v != ModelVariant::kIfm; }

bool variant_uses_impact(ModelVariant v) {
  return v != ModelVariant::kPam && v != ModelVariant::kLdm;
}

bool variant_impact_frozen(ModelVariant v) {
  return v == ModelVariant::kFiDisee || v == ModelVariant::kFiDiseePa;
}

ImpactKind resolve_impact_kind(ModelVariant v, ImpactFamily f) {
  if (!variant_uses_impact(v)) return ImpactKind::kConstant;
  const bool pa = (v == ModelVariant::kDiseePa || v == ModelVariant::kFiDiseePa);
  switch (f) {
    case ImpactFamily::kLogNormal:
      return pa ? ImpactKind::kPALogNormal : ImpactKind::kLogNormal;
    case ImpactFamily::kTruncatedNormal:
      return pa ? ImpactKind::kPATruncatedNormal : ImpactKind::kTruncatedNormal;
    case ImpactFamily::kMixture:
      if (pa) throw InvalidParams("mixture impact has no PA form");
      return ImpactKind::kMixtureTruncatedNormal;
  }
  throw InvalidParams("unhandled impact family");
}

void validate_model_spec(const ModelSpec& spec) {
  if (variant_uses_embedding(spec.variant)) {
    if (spec.dim < 1)
      throw InvalidParams(std::string(model_variant_name(spec.variant)) +
                          " requires an embedding dimension >= 1");
  } else if (spec.dim != 0) {
    throw InvalidParams(std::string(model_variant_name(spec.variant)) +
                        " requires dim = 0 (no embedding space)");
  }
  if (variant_impact_frozen(spec.variant) && spec.family == ImpactFamily::kMixture)
    throw InvalidParams("fixed-impact variants have no empirical mixture fit");
  if (spec.family == ImpactFamily::kMixture && spec.mixture_k < 1)
    throw InvalidParams("mixture requires at least one component");
  resolve_impact_kind(spec.variant, spec.family);  // rejects PA + mixture
}

ModelParameters::ModelParameters(ModelSpec spec, int n_targets, int n_sources,
                                 double horizon)
    : spec_(spec), n_targets_(n_targets), n_sources_(n_sources), horizon_(horizon) {
  validate_model_spec(spec_);
  kind_ = resolve_impact_kind(spec_.variant, spec_.family);
  const bool impact = variant_uses_impact(spec_.variant);
  mix_k_ = (impact && kind_ == ImpactKind::kMixtureTruncatedNormal) ? spec_.mixture_k : 0;
  per_target_impact_slots_ = impact ? (mix_k_ > 0 ? 3 * mix_k_ : 2) : 0;

  lower_ = 0.0;
  upper_ = (kind_ == ImpactKind::kTruncatedNormal ||
            kind_ == ImpactKind::kPATruncatedNormal ||
            kind_ == ImpactKind::kMixtureTruncatedNormal)
               ? horizon_
               : std::numeric_limits<double>::infinity();

  const std::size_t nz = static_cast<std::size_t>(n_targets_) * spec_.dim;
  const std::size_t nw = static_cast<std::size_t>(n_sources_) * spec_.dim;
  off_z_ = 0;
  off_w_ = off_z_ + nz;
  off_alpha_ = off_w_ + nw;
  off_beta_ = off_alpha_ + n_targets_;
  off_impact_ = off_beta_ + n_sources_;
  data_.assign(off_impact_ + static_cast<std::size_t>(n_targets_) * per_target_impact_slots_,
               0.0);
}

ImpactParams ModelParameters::impact_view(int i) const {
  ImpactParams p;
  p.lower = lower_;
  p.upper = upper_;
  if (per_target_impact_slots_ == 0) return p;
  if (mix_k_ == 0) {
    p.mu = impact_slot(i, 0);
    p.log_sigma = impact_slot(i, 1);
    return p;
  }
  p.mixture_logits.resize(mix_k_);
  p.component_mu.resize(mix_k_);
  p.component_log_sigma.resize(mix_k_);
  for (int c = 0; c < mix_k_; ++c) {
    p.mixture_logits[c] = impact_slot(i, c);
    p.component_mu[c] = impact_slot(i, mix_k_ + c);
    p.component_log_sigma[c] = impact_slot(i, 2 * mix_k_ + c);
  }
  return p;
}

void ModelParameters::set_impact(int i, const ImpactParams& p) {
  if (per_target_impact_slots_ == 0) return;
  if (mix_k_ == 0) {
    impact_slot(i, 0) = p.mu;
    impact_slot(i, 1) = p.log_sigma;
    return;
  }
  if (p.mixture_size() != mix_k_)
    throw InvalidParams("mixture size mismatch in set_impact");
  for (int c = 0; c < mix_k_; ++c) {
    impact_slot(i, c) = p.mixture_logits[c];
    impact_slot(i, mix_k_ + c) = p.component_mu[c];
    impact_slot(i, 2 * mix_k_ + c) = p.component_log_sigma[c];
  }
}

std::vector<std::uint8_t> ModelParameters::frozen_mask() const {
  std::vector<std::uint8_t> mask(data_.size(), 0);
  if (!variant_uses_beta(spec_.variant)) {
    for (int j = 0; j < n_sources_; ++j) mask[off_beta_ + j] = 1;
  }
  if (variant_impact_frozen(spec_.variant)) {
    for (std::size_t s = off_impact_; s < data_.size(); ++s) mask[s] = 1;
  }
  return mask;
}

std::string ModelParameters::slot_name(std::size_t index) const {
  std::ostringstream out;
  if (index < off_w_) {
    const std::size_t r = index - off_z_;
    out << "z[" << r / spec_.dim << "][" << r % spec_.dim << "]";
  } else if (index < off_alpha_) {
    const std::size_t r = index - off_w_;
    out << "w[" << r / spec_.dim << "][" << r % spec_.dim << "]";
  } else if (index < off_beta_) {
    out << "alpha[" << index - off_alpha_ << "]";
  } else if (index < off_impact_) {
    out << "beta[" << index - off_beta_ << "]";
  } else {
    const std::size_t r = index - off_impact_;
    const int i = static_cast<int>(r / per_target_impact_slots_);
    const int slot = static_cast<int>(r % per_target_impact_slots_);
    if (mix_k_ == 0) {
      out << (slot == 0 ? "impact_mu[" : "impact_log_sigma[") << i << "]";
    } else if (slot < mix_k_) {
      out << "impact_logit[" << i << "][" << slot << "]";
    } else if (slot < 2 * mix_k_) {
      out << "impact_mu[" << i << "][" << slot - mix_k_ << "]";
    } else {
      out << "impact_log_sigma[" << i << "][" << slot - 2 * mix_k_ << "]";
    }
  }
  return out.str();
}

bool ModelParameters::all_finite() const {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

double log_rate_core(const ModelParameters& params, int i, int j) {
  double core = params.alpha(i);
  if (variant_uses_beta(params.variant())) core += params.beta(j);
  if (params.dim() > 0) {
    double sq = kDistanceSmoothing;
    for (int d = 0; d < params.dim(); ++d) {
      const double diff = params.z(i, d) - params.w(j, d);
      sq += diff * diff;
    }
    core -= std::sqrt(sq);
  }
  return core;
}

double intensity(const ModelParameters& params, const SingleEventNetwork& net,
                 int i, int j, double t) {
  const double eps = kElapsedClampFraction * std::max(net.horizon(), 1e-30);
  const double dt = std::max(t - net.target_time(i), eps);
  const double f = impact_pdf(params.impact_kind(), params.impact_view(i), dt);
  return f * std::exp(log_rate_core(params, i, j));
}

double cumulative_intensity(const ModelParameters& params,
                            const SingleEventNetwork& net, int i, int j) {
  const double exposure = net.horizon() - net.target_time(i);
  if (exposure <= 0.0) return 0.0;
  const double integral =
      impact_integral(params.impact_kind(), params.impact_view(i), exposure);
  return integral * std::exp(log_rate_core(params, i, j));
}

double link_probability_from_cumulative(double cumulative) {
  if (std::isinf(cumulative)) return 1.0;
  return cumulative / (1.0 + cumulative);
}

double link_probability(const ModelParameters& params,
                        const SingleEventNetwork& net, int i, int j) {
  return link_probability_from_cumulative(cumulative_intensity(params, net, i, j));
}

namespace {

[[noreturn]] void throw_dyad_error(const SingleEventNetwork& net, int i, int j,
                                   const char* what) {
  throw NumericalError(std::string(what) + " for dyad (" + net.target_id(i) + ", " +
                       net.source_id(j) + ")");
}

// Per-target quantities reused across every dyad of a likelihood pass.
struct TargetContext {
  double integral = 0.0;    // impact integral over the exposure window
  ImpactParams impact;
};

std::vector<TargetContext> build_target_contexts(const ModelParameters& params,
                                                 const SingleEventNetwork& net) {
  std::vector<TargetContext> ctx(net.num_targets());
  for (int i = 0; i < net.num_targets(); ++i) {
    ctx[i].impact = params.impact_view(i);
    const double exposure = net.horizon() - net.target_time(i);
    ctx[i].integral = exposure > 0.0
                          ? impact_integral(params.impact_kind(), ctx[i].impact, exposure)
                          : 0.0;
  }
  return ctx;
}

double elapsed_clamp(const SingleEventNetwork& net) {
  return kElapsedClampFraction * std::max(net.horizon(), 1e-30);
}

// Contribution of one target's dyads to the log-likelihood. Control dyads
// are either the full admissible non-link set (exact mode) or a scaled
// subsample. Kept in one routine so exact and case-control paths share code.
struct TargetTerms {
  double link = 0.0;
  double control = 0.0;
};

TargetTerms target_log_likelihood(const ModelParameters& params,
                                  const SingleEventNetwork& net,
                                  const std::vector<TargetContext>& ctx, int i,
                                  const ExcludeSet* exclude,
                                  const std::vector<int>* control_subset,
                                  double control_scale) {
  TargetTerms terms;
  const double eps = elapsed_clamp(net);
  const ImpactKind kind = params.impact_kind();

  for (const Event& e : net.events_of_target(i)) {
    const double core = log_rate_core(params, i, e.source);
    const double lambda_cum = ctx[i].integral * std::exp(core);
    const double dt = std::max(e.time - net.target_time(i), eps);
    const double f = impact_pdf(kind, ctx[i].impact, dt);
    const double term = std::log(f) + core - std::log1p(lambda_cum);
    if (!std::isfinite(term)) throw_dyad_error(net, i, e.source, "non-finite link term");
    terms.link += term;
  }

  auto control_contribution = [&](int j) {
    const double core = log_rate_core(params, i, j);
    const double lambda_cum = ctx[i].integral * std::exp(core);
    const double term = -std::log1p(lambda_cum);
    if (!std::isfinite(term)) throw_dyad_error(net, i, j, "non-finite control term");
    return term;
  };

  if (control_subset) {
    double sum = 0.0;
    for (int j : *control_subset) sum += control_contribution(j);
    terms.control = control_scale * sum;
  } else {
    for (std::int64_t o = 0; o < net.admissible_count(i); ++o) {
      const int j = net.sources_by_time()[net.first_admissible(i) + o];
      if (net.has_event(i, j)) continue;
      if (exclude && exclude->contains(i, j)) continue;
      terms.control += control_contribution(j);
    }
  }
  return terms;
}

}  // namespace

LikelihoodTerms log_likelihood_terms(const ModelParameters& params,
                                     const SingleEventNetwork& net,
                                     const ExcludeSet* exclude, int threads) {
  const auto ctx = build_target_contexts(params, net);
  const int n = net.num_targets();
  std::vector<double> link_partials(n, 0.0);

  const double control = chunked_reduce(
      static_cast<std::size_t>(n),
      [&](std::size_t lo, std::size_t hi) {
        double part = 0.0;
        for (std::size_t i = lo; i < hi; ++i) {
          const auto t = target_log_likelihood(params, net, ctx, static_cast<int>(i),
                                               exclude, nullptr, 1.0);
          link_partials[i] = t.link;
          part += t.control;
        }
        return part;
      },
      threads);

  LikelihoodTerms out;
  out.control_term = control;
  for (double v : link_partials) out.link_term += v;
  return out;
}

double log_likelihood(const ModelParameters& params, const SingleEventNetwork& net,
                      const ExcludeSet* exclude, int threads) {
  return log_likelihood_terms(params, net, exclude, threads).total();
}

CaseControlSample sample_case_controls(const SingleEventNetwork& net,
                                       const CaseControlConfig& config,
                                       const ExcludeSet* exclude,
                                       std::uint64_t seed) {
  if (config.ratio < 1 || config.min_controls < 1)
    throw InvalidParams("case-control ratio and min_controls must be >= 1");

  const int n_targets = net.num_targets();
  CaseControlSample sample;
  sample.controls.resize(n_targets);
  sample.scale.assign(n_targets, 0.0);
  Rng rng(seed);

  for (int i = 0; i < n_targets; ++i) {
    // Admissible non-links of target i, excluding held-out dyads.
    std::int64_t strict_links = 0;
    for (const Event& e : net.events_of_target(i))
      if (net.source_time(e.source) > net.target_time(i)) ++strict_links;
    std::int64_t population = net.admissible_count(i) - strict_links;
    if (exclude) {
      for (std::int64_t key : exclude->keys) {
        const int ti = static_cast<int>(key >> 32);
        if (ti != i) continue;
        const int j = static_cast<int>(key & 0xffffffff);
        if (j < 0 || j >= net.num_sources()) continue;
        if (net.source_time(j) > net.target_time(i) && !net.has_event(i, j))
          --population;
      }
    }
    if (population <= 0) continue;  // degenerate target contributes nothing

    const std::int64_t wanted = std::max<std::int64_t>(
        static_cast<std::int64_t>(config.ratio) * net.in_degree(i),
        config.min_controls);
    const std::int64_t n_draw = std::min<std::int64_t>(wanted, population);
    sample.scale[i] =
        static_cast<double>(population) / static_cast<double>(n_draw);

    auto admissible_at = [&](std::int64_t offset) {
      return net.sources_by_time()[net.first_admissible(i) + offset];
    };
    auto is_control = [&](int j) {
      if (net.has_event(i, j)) return false;
      if (exclude && exclude->contains(i, j)) return false;
      return true;
    };

    auto& chosen = sample.controls[i];
    chosen.reserve(static_cast<std::size_t>(n_draw));
    if (n_draw * 2 > population) {
      // Dense draw: enumerate candidates, partial Fisher-Yates.
      std::vector<int> pool;
      pool.reserve(static_cast<std::size_t>(population));
      for (std::int64_t o = 0; o < net.admissible_count(i); ++o) {
        const int j = admissible_at(o);
        if (is_control(j)) pool.push_back(j);
      }
      for (std::int64_t k = 0; k < n_draw; ++k) {
        const auto r = k + static_cast<std::int64_t>(rng.uniform_index(pool.size() - k));
        std::swap(pool[static_cast<std::size_t>(k)], pool[static_cast<std::size_t>(r)]);
        chosen.push_back(pool[static_cast<std::size_t>(k)]);
      }
    } else {
      std::unordered_set<int> seen;
      seen.reserve(static_cast<std::size_t>(n_draw) * 2);
      while (static_cast<std::int64_t>(chosen.size()) < n_draw) {
        const auto o = static_cast<std::int64_t>(
            rng.uniform_index(static_cast<std::uint64_t>(net.admissible_count(i))));
        const int j = admissible_at(o);
        if (!is_control(j) || !seen.insert(j).second) continue;
        chosen.push_back(j);
      }
    }
  }
  return sample;
}

LikelihoodTerms log_likelihood_case_control_terms(const ModelParameters& params,
                                                  const SingleEventNetwork& net,
                                                  const CaseControlSample& sample) {
  const auto ctx = build_target_contexts(params, net);
  LikelihoodTerms out;
  for (int i = 0; i < net.num_targets(); ++i) {
    const auto t = target_log_likelihood(params, net, ctx, i, nullptr,
                                         &sample.controls[i], sample.scale[i]);
    out.link_term += t.link;
    out.control_term += t.control;
  }
  return out;
}

double log_likelihood_case_control(const ModelParameters& params,
                                   const SingleEventNetwork& net,
                                   const CaseControlSample& sample) {
  return log_likelihood_case_control_terms(params, net, sample).total();
}

double log_likelihood_case_control(const ModelParameters& params,
                                   const SingleEventNetwork& net,
                                   const CaseControlConfig& config,
                                   const ExcludeSet* exclude) {
  const auto sample = sample_case_controls(net, config, exclude, config.seed);
  return log_likelihood_case_control(params, net, sample);
}

}  // namespace sen
