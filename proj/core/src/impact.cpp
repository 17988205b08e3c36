#include "sen/impact.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sen/errors.hpp"

namespace sen {

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014327;
constexpr double kSigmaFloor = 1e-3;

bool mixture_kind(ImpactKind k) { return k == ImpactKind::kMixtureTruncatedNormal; }
bool pa_kind(ImpactKind k) {
  return k == ImpactKind::kPALogNormal || k == ImpactKind::kPATruncatedNormal;
}
bool lognormal_base(ImpactKind k) {
  return k == ImpactKind::kLogNormal || k == ImpactKind::kPALogNormal;
}

void check_finite(const ImpactParams& p, ImpactKind kind) {
  if (!std::isfinite(p.mu) || !std::isfinite(p.log_sigma))
    throw InvalidParams("impact parameters must be finite");
  if (kind == ImpactKind::kTruncatedNormal || kind == ImpactKind::kPATruncatedNormal ||
      kind == ImpactKind::kMixtureTruncatedNormal) {
    if (std::isnan(p.lower) || std::isnan(p.upper) || !(p.lower < p.upper))
      throw InvalidParams("truncation bounds must satisfy lower < upper");
  }
  for (double v : p.mixture_logits)
    if (!std::isfinite(v)) throw InvalidParams("mixture logits must be finite");
  for (double v : p.component_mu)
    if (!std::isfinite(v)) throw InvalidParams("component means must be finite");
  for (double v : p.component_log_sigma)
    if (!std::isfinite(v)) throw InvalidParams("component scales must be finite");
}

// x * phi(x) with the correct 0 limit at +-inf.
double x_phi(double x) {
  if (std::isinf(x)) return 0.0;
  return x * std_normal_pdf(x);
}

double phi_or_zero(double x) {
  if (std::isinf(x)) return 0.0;
  return std_normal_pdf(x);
}

struct TruncNorm {
  double mu, sigma, a, b, z;  // a,b standardized bounds; z = Phi(b) - Phi(a)

  TruncNorm(double mu_, double sigma_, double lower, double upper)
      : mu(mu_), sigma(sigma_) {
    a = (lower - mu) / sigma;
    b = (upper - mu) / sigma;
    z = std_normal_cdf(b) - std_normal_cdf(a);
    if (!(z > 1e-300))
      throw InvalidParams("truncated normal has no mass inside its bounds");
  }

  double pdf(double t, double lower, double upper) const {
    if (t < lower || t > upper) return 0.0;
    const double s = (t - mu) / sigma;
    return std_normal_pdf(s) / (sigma * z);
  }

  double cdf(double t, double lower, double upper) const {
    if (t <= lower) return 0.0;
    if (t >= upper) return 1.0;
    const double s = (t - mu) / sigma;
    const double g = (std_normal_cdf(s) - std_normal_cdf(a)) / z;
    return std::clamp(g, 0.0, 1.0);
  }

  // d log pdf / d(mu, sigma) at t inside the support.
  void log_pdf_grad(double t, double* d_mu, double* d_sigma) const {
    const double s = (t - mu) / sigma;
    const double bound_term = (phi_or_zero(b) - phi_or_zero(a)) / (sigma * z);
    *d_mu = s / sigma + bound_term;
    *d_sigma = (s * s - 1.0) / sigma + (x_phi(b) - x_phi(a)) / (sigma * z);
  }

  // d cdf / d(mu, sigma) at t inside the support (0 outside).
  void cdf_grad(double t, double lower, double upper, double* d_mu,
                double* d_sigma) const {
    if (t <= lower || t >= upper) {
      *d_mu = 0.0;
      *d_sigma = 0.0;
      return;
    }
    const double s = (t - mu) / sigma;
    const double g = (std_normal_cdf(s) - std_normal_cdf(a)) / z;
    const double pa = phi_or_zero(a);
    const double pb = phi_or_zero(b);
    *d_mu = ((pa - phi_or_zero(s)) - g * (pa - pb)) / (sigma * z);
    *d_sigma = ((x_phi(a) - x_phi(s)) - g * (x_phi(a) - x_phi(b))) / (sigma * z);
  }
};

double lognormal_pdf(double mu, double sigma, double t) {
  if (t <= 0.0) return 0.0;
  const double s = (std::log(t) - mu) / sigma;
  return kInvSqrt2Pi * std::exp(-0.5 * s * s) / (t * sigma);
}

double lognormal_cdf(double mu, double sigma, double t) {
  if (t <= 0.0) return 0.0;
  return std_normal_cdf((std::log(t) - mu) / sigma);
}

// Base-family pdf/cdf dispatch for non-mixture kinds.
double base_pdf(ImpactKind kind, const ImpactParams& p, double dt) {
  if (lognormal_base(kind)) return lognormal_pdf(p.mu, p.sigma(), dt);
  TruncNorm tn(p.mu, p.sigma(), p.lower, p.upper);
  return tn.pdf(dt, p.lower, p.upper);
}

double base_cdf(ImpactKind kind, const ImpactParams& p, double dt) {
  if (lognormal_base(kind)) return lognormal_cdf(p.mu, p.sigma(), dt);
  TruncNorm tn(p.mu, p.sigma(), p.lower, p.upper);
  return tn.cdf(dt, p.lower, p.upper);
}

// (d cdf/d mu, d cdf/d log_sigma) for the base family of non-mixture kinds.
void base_cdf_grad(ImpactKind kind, const ImpactParams& p, double dt,
                   double* d_mu, double* d_ls) {
  const double sigma = p.sigma();
  if (lognormal_base(kind)) {
    if (dt <= 0.0) {
      *d_mu = 0.0;
      *d_ls = 0.0;
      return;
    }
    const double s = (std::log(dt) - p.mu) / sigma;
    const double ph = std_normal_pdf(s);
    *d_mu = -ph / sigma;
    *d_ls = -s * ph;  // sigma * (-s*phi/sigma)
    return;
  }
  TruncNorm tn(p.mu, sigma, p.lower, p.upper);
  double dm = 0.0, ds = 0.0;
  tn.cdf_grad(dt, p.lower, p.upper, &dm, &ds);
  *d_mu = dm;
  *d_ls = sigma * ds;
}

// (d log pdf/d mu, d log pdf/d log_sigma) for the base family.
void base_log_pdf_grad(ImpactKind kind, const ImpactParams& p, double dt,
                       double* d_mu, double* d_ls) {
  const double sigma = p.sigma();
  if (lognormal_base(kind)) {
    const double s = (std::log(dt) - p.mu) / sigma;
    *d_mu = s / sigma;
    *d_ls = s * s - 1.0;  // sigma * ((s^2-1)/sigma)
    return;
  }
  TruncNorm tn(p.mu, sigma, p.lower, p.upper);
  double dm = 0.0, ds = 0.0;
  tn.log_pdf_grad(dt, &dm, &ds);
  *d_mu = dm;
  *d_ls = sigma * ds;
}

}  // namespace

double ImpactParams::sigma() const {
  const double s = std::exp(log_sigma);
  return s;
}

std::vector<double> ImpactParams::mixture_weights() const {
  std::vector<double> w(mixture_logits.size());
  if (w.empty()) return w;
  const double m = *std::max_element(mixture_logits.begin(), mixture_logits.end());
  double total = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = std::exp(mixture_logits[i] - m);
    total += w[i];
  }
  for (double& v : w) v /= total;
  return w;
}

void ImpactGrad::resize_mixture(int k) {
  d_logits.assign(k, 0.0);
  d_component_mu.assign(k, 0.0);
  d_component_log_sigma.assign(k, 0.0);
}

const char* impact_kind_name(ImpactKind kind) {
  switch (kind) {
    case ImpactKind::kLogNormal: return "log-normal";
    case ImpactKind::kTruncatedNormal: return "truncated-normal";
    case ImpactKind::kPALogNormal: return "pa-log-normal";
    case ImpactKind::kPATruncatedNormal: return "pa-truncated-normal";
    case ImpactKind::kConstant: return "constant";
    case ImpactKind::kMixtureTruncatedNormal: return "mixture-truncated-normal";
  }
  return "unknown";
}

ImpactKind impact_kind_from_name(const std::string& name) {
  if (name == "log-normal") return ImpactKind::kLogNormal;
  if (name == "truncated-normal") return ImpactKind::kTruncatedNormal;
  if (name == "pa-log-normal") return ImpactKind::kPALogNormal;
  if (name == "pa-truncated-normal") return ImpactKind::kPATruncatedNormal;
  if (name == "constant") return ImpactKind::kConstant;
  if (name == "mixture-truncated-normal") return ImpactKind::kMixtureTruncatedNormal;
  throw InvalidParams("unknown impact kind: " + name);
}

double std_normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double std_normal_cdf(double x) {
  if (std::isinf(x)) return x > 0 ? 1.0 : 0.0;
  return 0.5 * std::erfc(-x * M_SQRT1_2);
}

double impact_pdf(ImpactKind kind, const ImpactParams& p, double dt) {
  check_finite(p, kind);
  switch (kind) {
    case ImpactKind::kConstant:
      return 1.0;
    case ImpactKind::kLogNormal:
    case ImpactKind::kTruncatedNormal:
      return base_pdf(kind, p, dt);
    case ImpactKind::kPALogNormal:
    case ImpactKind::kPATruncatedNormal:
      return base_pdf(kind, p, dt) * base_cdf(kind, p, dt);
    case ImpactKind::kMixtureTruncatedNormal: {
      const auto w = p.mixture_weights();
      double f = 0.0;
      for (std::size_t c = 0; c < w.size(); ++c) {
        TruncNorm tn(p.component_mu[c], std::exp(p.component_log_sigma[c]),
                     p.lower, p.upper);
        f += w[c] * tn.pdf(dt, p.lower, p.upper);
      }
      return f;
    }
  }
  throw InvalidParams("unhandled impact kind");
}

double impact_cdf(ImpactKind kind, const ImpactParams& p, double dt) {
  check_finite(p, kind);
  switch (kind) {
    case ImpactKind::kConstant: {
      if (dt <= p.lower) return 0.0;
      if (std::isinf(p.upper)) return dt >= p.upper ? 1.0 : 0.0;
      return std::clamp((dt - p.lower) / (p.upper - p.lower), 0.0, 1.0);
    }
    case ImpactKind::kLogNormal:
    case ImpactKind::kTruncatedNormal:
    case ImpactKind::kPALogNormal:
    case ImpactKind::kPATruncatedNormal:
      return base_cdf(kind, p, dt);
    case ImpactKind::kMixtureTruncatedNormal: {
      const auto w = p.mixture_weights();
      double g = 0.0;
      for (std::size_t c = 0; c < w.size(); ++c) {
        TruncNorm tn(p.component_mu[c], std::exp(p.component_log_sigma[c]),
                     p.lower, p.upper);
        g += w[c] * tn.cdf(dt, p.lower, p.upper);
      }
      return g;
    }
  }
  throw InvalidParams("unhandled impact kind");
}

double impact_integral(ImpactKind kind, const ImpactParams& p, double dt) {
  check_finite(p, kind);
  switch (kind) {
    case ImpactKind::kConstant:
      return dt;
    case ImpactKind::kLogNormal:
    case ImpactKind::kTruncatedNormal:
    case ImpactKind::kMixtureTruncatedNormal:
      return impact_cdf(kind, p, dt);
    case ImpactKind::kPALogNormal:
    case ImpactKind::kPATruncatedNormal: {
      const double g = base_cdf(kind, p, dt);
      return 0.5 * g * g;
    }
  }
  throw InvalidParams("unhandled impact kind");
}

ImpactGrad impact_log_pdf_grad(ImpactKind kind, const ImpactParams& p, double dt) {
  check_finite(p, kind);
  ImpactGrad g;
  switch (kind) {
    case ImpactKind::kConstant:
      return g;
    case ImpactKind::kLogNormal:
    case ImpactKind::kTruncatedNormal:
      base_log_pdf_grad(kind, p, dt, &g.d_mu, &g.d_log_sigma);
      return g;
    case ImpactKind::kPALogNormal:
    case ImpactKind::kPATruncatedNormal: {
      base_log_pdf_grad(kind, p, dt, &g.d_mu, &g.d_log_sigma);
      const double cdf = base_cdf(kind, p, dt);
      if (cdf > 0.0) {
        double cm = 0.0, cls = 0.0;
        base_cdf_grad(kind, p, dt, &cm, &cls);
        g.d_mu += cm / cdf;
        g.d_log_sigma += cls / cdf;
      }
      return g;
    }
    case ImpactKind::kMixtureTruncatedNormal: {
      const int k = p.mixture_size();
      g.resize_mixture(k);
      const auto w = p.mixture_weights();
      std::vector<double> comp_pdf(k);
      double f = 0.0;
      for (int c = 0; c < k; ++c) {
        TruncNorm tn(p.component_mu[c], std::exp(p.component_log_sigma[c]),
                     p.lower, p.upper);
        comp_pdf[c] = tn.pdf(dt, p.lower, p.upper);
        f += w[c] * comp_pdf[c];
      }
      if (f <= 0.0) return g;  // log f is -inf; caller surfaces the error
      for (int c = 0; c < k; ++c) {
        g.d_logits[c] = w[c] * (comp_pdf[c] - f) / f;
        if (comp_pdf[c] > 0.0) {
          const double sigma_c = std::exp(p.component_log_sigma[c]);
          TruncNorm tn(p.component_mu[c], sigma_c, p.lower, p.upper);
          double dm = 0.0, ds = 0.0;
          tn.log_pdf_grad(dt, &dm, &ds);
          g.d_component_mu[c] = w[c] * comp_pdf[c] * dm / f;
          g.d_component_log_sigma[c] = w[c] * comp_pdf[c] * (sigma_c * ds) / f;
        }
      }
      return g;
    }
  }
  throw InvalidParams("unhandled impact kind");
}

ImpactGrad impact_integral_grad(ImpactKind kind, const ImpactParams& p, double dt) {
  check_finite(p, kind);
  ImpactGrad g;
  switch (kind) {
    case ImpactKind::kConstant:
      return g;
    case ImpactKind::kLogNormal:
    case ImpactKind::kTruncatedNormal:
      base_cdf_grad(kind, p, dt, &g.d_mu, &g.d_log_sigma);
      return g;
    case ImpactKind::kPALogNormal:
    case ImpactKind::kPATruncatedNormal: {
      const double cdf = base_cdf(kind, p, dt);
      double cm = 0.0, cls = 0.0;
      base_cdf_grad(kind, p, dt, &cm, &cls);
      g.d_mu = cdf * cm;
      g.d_log_sigma = cdf * cls;
      return g;
    }
    case ImpactKind::kMixtureTruncatedNormal: {
      const int k = p.mixture_size();
      g.resize_mixture(k);
      const auto w = p.mixture_weights();
      std::vector<double> comp_cdf(k);
      double total = 0.0;
      for (int c = 0; c < k; ++c) {
        const double sigma_c = std::exp(p.component_log_sigma[c]);
        TruncNorm tn(p.component_mu[c], sigma_c, p.lower, p.upper);
        comp_cdf[c] = tn.cdf(dt, p.lower, p.upper);
        total += w[c] * comp_cdf[c];
      }
      for (int c = 0; c < k; ++c) {
        const double sigma_c = std::exp(p.component_log_sigma[c]);
        TruncNorm tn(p.component_mu[c], sigma_c, p.lower, p.upper);
        double dm = 0.0, ds = 0.0;
        tn.cdf_grad(dt, p.lower, p.upper, &dm, &ds);
        g.d_logits[c] = w[c] * (comp_cdf[c] - total);
        g.d_component_mu[c] = w[c] * dm;
        g.d_component_log_sigma[c] = w[c] * sigma_c * ds;
      }
      return g;
    }
  }
  throw InvalidParams("unhandled impact kind");
}

ImpactParams fit_empirical(const std::vector<double>& elapsed_times,
                           ImpactKind kind, double horizon) {
  if (elapsed_times.empty()) throw EmptySample("fit_empirical: empty sample");
  if (mixture_kind(kind) || kind == ImpactKind::kConstant)
    throw InvalidParams("fit_empirical: kind has no empirical closed form");
  for (double t : elapsed_times)
    if (!(t > 0.0) || !std::isfinite(t))
      throw InvalidParams("fit_empirical: elapsed times must be positive");

  const double n = static_cast<double>(elapsed_times.size());
  ImpactParams p;
  if (lognormal_base(kind)) {
    double mean = 0.0;
    for (double t : elapsed_times) mean += std::log(t);
    mean /= n;
    double var = 0.0;
    for (double t : elapsed_times) {
      const double d = std::log(t) - mean;
      var += d * d;
    }
    var /= n;  // population variance
    p.mu = mean;
    p.log_sigma = std::log(std::max(std::sqrt(var), kSigmaFloor));
    p.lower = 0.0;
    p.upper = std::numeric_limits<double>::infinity();
  } else {
    double mean = 0.0;
    for (double t : elapsed_times) mean += t;
    mean /= n;
    double var = 0.0;
    for (double t : elapsed_times) {
      const double d = t - mean;
      var += d * d;
    }
    var /= n;
    p.mu = mean;
    p.log_sigma = std::log(std::max(std::sqrt(var), kSigmaFloor));
    p.lower = 0.0;
    p.upper = horizon;
  }
  return p;
}

}  // namespace sen
