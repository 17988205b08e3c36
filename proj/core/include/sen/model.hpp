#ifndef SEN_MODEL_HPP
#define SEN_MODEL_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "sen/impact.hpp"
#include "sen/network.hpp"

namespace sen {

/// Model variants ordered from pure impact (IFM) to the full embedding model
/// with preferential-attachment impact. FI variants share the formulation of
/// their base model but keep the impact parameters frozen at an empirical fit.
enum class ModelVariant {
  kIfm,
  kPam,
  kTpam,
  kLdm,
  kDisee,
  kDiseePa,
  kFiDisee,
  kFiDiseePa,
};

const char* model_variant_name(ModelVariant v);
ModelVariant model_variant_from_name(const std::string& name);

/// Impact families selectable for the variants that carry an impact density.
enum class ImpactFamily { kLogNormal, kTruncatedNormal, kMixture };

const char* impact_family_name(ImpactFamily f);
ImpactFamily impact_family_from_name(const std::string& name);

struct ModelSpec {
  ModelVariant variant = ModelVariant::kDisee;
  ImpactFamily family = ImpactFamily::kLogNormal;
  int dim = 2;
  int mixture_k = 3;
};

bool variant_uses_embedding(ModelVariant v);
bool variant_uses_beta(ModelVariant v);   // false only for IFM
bool variant_uses_impact(ModelVariant v); // false for PAM / LDM
bool variant_impact_frozen(ModelVariant v);

/// The ImpactKind implied by (variant, family); Constant for PAM/LDM, the PA
/// flavor of the family for the _PA variants. Throws InvalidParams on
/// unsupported combinations (e.g. PA + mixture).
ImpactKind resolve_impact_kind(ModelVariant v, ImpactFamily f);

/// Throws InvalidParams if the spec is inconsistent (e.g. dim != 0 for PAM).
void validate_model_spec(const ModelSpec& spec);

/// All trainable state of one model instance, stored as a single flat vector
/// so the optimizer can treat parameters uniformly. Layout (row-major):
///   z [targets x dim] | w [sources x dim] | alpha [targets] | beta [sources]
///   | impact blocks (per-kind: mu/log_sigma, or mixture logits/mu/log_sigma)
/// Truncation bounds are shared, fixed at (0, horizon), and not trained.
class ModelParameters {
 public:
  ModelParameters(ModelSpec spec, int n_targets, int n_sources, double horizon);

  const ModelSpec& spec() const { return spec_; }
  ModelVariant variant() const { return spec_.variant; }
  ImpactKind impact_kind() const { return kind_; }
  int dim() const { return spec_.dim; }
  int mixture_k() const { return mix_k_; }
  int num_targets() const { return n_targets_; }
  int num_sources() const { return n_sources_; }
  double horizon() const { return horizon_; }
  double lower_bound() const { return lower_; }
  double upper_bound() const { return upper_; }

  std::size_t size() const { return data_.size(); }
  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  double& z(int i, int d) { return data_[off_z_ + static_cast<std::size_t>(i) * spec_.dim + d]; }
  double z(int i, int d) const { return data_[off_z_ + static_cast<std::size_t>(i) * spec_.dim + d]; }
  double& w(int j, int d) { return data_[off_w_ + static_cast<std::size_t>(j) * spec_.dim + d]; }
  double w(int j, int d) const { return data_[off_w_ + static_cast<std::size_t>(j) * spec_.dim + d]; }
  double& alpha(int i) { return data_[off_alpha_ + i]; }
  double alpha(int i) const { return data_[off_alpha_ + i]; }
  double& beta(int j) { return data_[off_beta_ + j]; }
  double beta(int j) const { return data_[off_beta_ + j]; }

  bool has_impact_block() const { return per_target_impact_slots_ > 0; }
  int impact_slots_per_target() const { return per_target_impact_slots_; }
  std::size_t impact_offset(int i, int slot) const {
    return off_impact_ + static_cast<std::size_t>(i) * per_target_impact_slots_ + slot;
  }
  double& impact_slot(int i, int slot) { return data_[impact_offset(i, slot)]; }
  double impact_slot(int i, int slot) const { return data_[impact_offset(i, slot)]; }

  /// Materializes the ImpactParams view of target i.
  ImpactParams impact_view(int i) const;
  void set_impact(int i, const ImpactParams& p);

  /// Slot layout inside one target's impact block:
  /// non-mixture: [mu, log_sigma]; mixture: [logits... , mu..., log_sigma...].
  int slot_mu() const { return mix_k_ > 0 ? -1 : 0; }
  int slot_log_sigma() const { return mix_k_ > 0 ? -1 : 1; }

  std::size_t offset_z() const { return off_z_; }
  std::size_t offset_w() const { return off_w_; }
  std::size_t offset_alpha() const { return off_alpha_; }
  std::size_t offset_beta() const { return off_beta_; }
  std::size_t offset_impact() const { return off_impact_; }

  /// True for slots excluded from training under this variant (frozen impact
  /// blocks, beta for IFM). The optimizer leaves masked slots untouched.
  std::vector<std::uint8_t> frozen_mask() const;

  /// Human-readable slot name ("z[3][0]", "alpha[2]", "impact_mu[7]", ...).
  std::string slot_name(std::size_t index) const;

  bool all_finite() const;

 private:
  ModelSpec spec_;
  ImpactKind kind_;
  int n_targets_ = 0;
  int n_sources_ = 0;
  int mix_k_ = 0;
  int per_target_impact_slots_ = 0;
  double horizon_ = 0.0;
  double lower_ = 0.0;
  double upper_ = 0.0;
  std::size_t off_z_ = 0, off_w_ = 0, off_alpha_ = 0, off_beta_ = 0, off_impact_ = 0;
  std::vector<double> data_;
};

/// Log-rate core: alpha_i + beta_j - dist(z_i, w_j), with the distance term
/// absent for dim-0 variants and beta absent for IFM. The distance carries a
/// 1e-12 smoothing term under the square root for differentiability at z = w.
double log_rate_core(const ModelParameters& params, int i, int j);

/// Event rate at absolute time t (>= target publication). The elapsed time
/// is clamped below at 1e-6 * horizon so log-normal impacts stay finite at
/// the publication instant.
double intensity(const ModelParameters& params, const SingleEventNetwork& net,
                 int i, int j, double t);

/// Closed-form integral of the intensity over the target's exposure window
/// [t_i, horizon].
double cumulative_intensity(const ModelParameters& params,
                            const SingleEventNetwork& net, int i, int j);

/// Event probability of the single-event process: Lambda / (1 + Lambda).
double link_probability(const ModelParameters& params,
                        const SingleEventNetwork& net, int i, int j);
double link_probability_from_cumulative(double cumulative);

/// Dyads kept out of the non-link sums (held-out positives and negatives
/// during training on a split).
struct ExcludeSet {
  std::unordered_set<std::int64_t> keys;
  void insert(const Dyad& d) { keys.insert(dyad_key(d)); }
  bool contains(int i, int j) const { return keys.count(dyad_key(i, j)) != 0; }
  bool empty() const { return keys.empty(); }
};

struct LikelihoodTerms {
  double link_term = 0.0;     // events: log lambda(t*) - log(1 + Lambda)
  double control_term = 0.0;  // non-links: -log(1 + Lambda)
  double total() const { return link_term + control_term; }
};

/// Exact log-likelihood over every admissible dyad (sources published
/// strictly after the target, plus all event dyads). Throws NumericalError
/// naming the dyad when a term is non-finite.
double log_likelihood(const ModelParameters& params, const SingleEventNetwork& net,
                      const ExcludeSet* exclude = nullptr, int threads = 1);
LikelihoodTerms log_likelihood_terms(const ModelParameters& params,
                                     const SingleEventNetwork& net,
                                     const ExcludeSet* exclude = nullptr,
                                     int threads = 1);

/// Case-control estimation: the link term stays exact, the per-target
/// control term is scaled up from a uniform subsample of admissible
/// non-links.
struct CaseControlConfig {
  int ratio = 5;         // controls per unit in-degree
  int min_controls = 5;
  bool resample_every_iteration = true;
  std::uint64_t seed = 0;
};

struct CaseControlSample {
  std::vector<std::vector<int>> controls;  // per-target sampled source indices
  std::vector<double> scale;               // N_i0 / n_i0
};

CaseControlSample sample_case_controls(const SingleEventNetwork& net,
                                       const CaseControlConfig& config,
                                       const ExcludeSet* exclude,
                                       std::uint64_t seed);

LikelihoodTerms log_likelihood_case_control_terms(const ModelParameters& params,
                                                  const SingleEventNetwork& net,
                                                  const CaseControlSample& sample);
double log_likelihood_case_control(const ModelParameters& params,
                                   const SingleEventNetwork& net,
                                   const CaseControlSample& sample);
/// Convenience overload drawing the sample from config.seed.
double log_likelihood_case_control(const ModelParameters& params,
                                   const SingleEventNetwork& net,
                                   const CaseControlConfig& config,
                                   const ExcludeSet* exclude = nullptr);

/// Gradient of the negative log-likelihood (exact when sample == nullptr)
/// with respect to every slot; frozen slots receive exact zeros.
std::vector<double> gradients(const ModelParameters& params,
                              const SingleEventNetwork& net,
                              const CaseControlSample* sample = nullptr,
                              const ExcludeSet* exclude = nullptr, int threads = 1);

/// Central finite-difference gradient of the same objective; test oracle and
/// the data behind the gradient-check report.
std::vector<double> finite_difference_gradients(const ModelParameters& params,
                                                const SingleEventNetwork& net,
                                                const CaseControlSample* sample,
                                                const ExcludeSet* exclude, double h);

/// CSV report: param-name, analytic, numeric, rel-error (one row per slot).
void write_gradient_check_csv(const ModelParameters& params,
                              const SingleEventNetwork& net, double h,
                              const std::string& path);

}  // namespace sen

#endif  // SEN_MODEL_HPP
