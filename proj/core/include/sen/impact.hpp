#ifndef SEN_IMPACT_HPP
#define SEN_IMPACT_HPP

#include <limits>
#include <vector>

namespace sen {

/// Families of per-target impact densities over elapsed time since
/// publication. PA kinds multiply the base pdf with its cdf, coupling aging
/// with accumulated attention; Constant is the no-impact case used by the
/// static model variants.
enum class ImpactKind {
  kLogNormal,
  kTruncatedNormal,
  kPALogNormal,
  kPATruncatedNormal,
  kConstant,
  kMixtureTruncatedNormal,
};

const char* impact_kind_name(ImpactKind kind);
ImpactKind impact_kind_from_name(const std::string& name);

/// Parameters of one impact density. sigma is stored as log_sigma so the
/// positivity constraint never needs projection during optimization.
/// For the mixture kind the scalar (mu, log_sigma) pair is unused and the
/// per-component vectors hold the state; softmax(mixture_logits) gives the
/// component weights.
struct ImpactParams {
  double mu = 0.0;
  double log_sigma = 0.0;
  double lower = 0.0;                                     // rho
  double upper = std::numeric_limits<double>::infinity(); // kappa
  std::vector<double> mixture_logits;
  std::vector<double> component_mu;
  std::vector<double> component_log_sigma;

  double sigma() const;
  int mixture_size() const { return static_cast<int>(mixture_logits.size()); }
  std::vector<double> mixture_weights() const;  // softmax of logits
};

/// Standard normal pdf and cdf. Phi is computed as 0.5*erfc(-x/sqrt(2)),
/// algebraically the erf form with better tail behavior; absolute accuracy
/// follows libm's erfc (well under 1e-12).
double std_normal_pdf(double x);
double std_normal_cdf(double x);

/// Density value at elapsed time dt (per time unit). Returns 0 outside the
/// support; Constant returns 1 for any dt.
double impact_pdf(ImpactKind kind, const ImpactParams& p, double dt);

/// Cumulative distribution at elapsed time dt, in [0, 1]. For PA kinds this
/// is the base family's cdf (the analytic object the closed-form integral is
/// built from). Constant reports the fraction of its (lower, upper) support.
double impact_cdf(ImpactKind kind, const ImpactParams& p, double dt);

/// Closed-form accumulated impact: integral of the impact function from 0 to
/// dt. Density kinds integrate to cdf(dt), PA kinds to cdf(dt)^2/2 by the
/// u = cdf(t) substitution, Constant to dt.
double impact_integral(ImpactKind kind, const ImpactParams& p, double dt);

/// Partial derivatives with respect to the trainable parameter slots of one
/// impact density (layout mirrors ImpactParams).
struct ImpactGrad {
  double d_mu = 0.0;
  double d_log_sigma = 0.0;
  std::vector<double> d_logits;
  std::vector<double> d_component_mu;
  std::vector<double> d_component_log_sigma;

  void resize_mixture(int k);
};

/// d log f(dt) / d theta for the impact density value at dt.
ImpactGrad impact_log_pdf_grad(ImpactKind kind, const ImpactParams& p, double dt);

/// d integral(dt) / d theta for the closed-form accumulated impact.
ImpactGrad impact_integral_grad(ImpactKind kind, const ImpactParams& p, double dt);

/// Empirical fit used by the fixed-impact model variants. LogNormal kinds:
/// exact MLE on logs (mean / population std of ln t, sigma floored at 1e-3).
/// TruncatedNormal kinds: moment matching on the untruncated parameters with
/// the same floor and bounds fixed to (0, horizon). PA kinds fit their base
/// family. Mixture and Constant kinds are not fittable here.
ImpactParams fit_empirical(const std::vector<double>& elapsed_times,
                           ImpactKind kind, double horizon);

}  // namespace sen

#endif  // SEN_IMPACT_HPP
