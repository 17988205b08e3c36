#include "sen/generator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <nlohmann/json.hpp>

#include "sen/errors.hpp"
#include "sen/impact.hpp"
#include "sen/text_io.hpp"

namespace sen {

namespace {

using json = nlohmann::ordered_json;

void check_config(const GeneratorConfig& c) {
  if (c.nodes < 2) throw InvalidParams("generator: need at least 2 nodes");
  if (!(c.horizon > 0.0)) throw InvalidParams("generator: horizon must be > 0");
  const double positives[] = {c.alpha_lambda, c.theta_lambda, c.alpha_beta,
                              c.theta_beta,   c.sigma_m,      c.alpha_s,
                              c.theta_s,      c.sigma_z,      c.sigma_w,
                              c.alpha_tau,    c.theta_tau};
  for (double v : positives)
    if (!(v > 0.0)) throw InvalidParams("generator: shapes/scales/sds must be > 0");
  if (c.dim < 1) throw InvalidParams("generator: dim must be >= 1");
}

std::string node_id(int index) { return "n" + std::to_string(index); }

ImpactParams planted_impact(const PlantedTruth& truth, int i) {
  ImpactParams p;
  p.mu = truth.mu[i];
  p.log_sigma = std::log(truth.sigma[i]);
  if (truth.family == ImpactFamily::kTruncatedNormal) {
    p.lower = 0.0;
    p.upper = truth.horizon;
  }
  return p;
}

ImpactKind planted_kind(const PlantedTruth& truth) {
  return truth.family == ImpactFamily::kTruncatedNormal
             ? ImpactKind::kTruncatedNormal
             : ImpactKind::kLogNormal;
}

}  // namespace

GeneratorConfig generator_preset(const std::string& name) {
  GeneratorConfig c;
  if (name == "art-small") {
    c.nodes = 1600;
    c.dim = 2;
    c.horizon = 10.0;
    c.alpha_lambda = 0.06;
    c.theta_lambda = 200.0;
    c.alpha_beta = 2.0;
    c.theta_beta = 0.5;
    c.mu_m = 0.3;
    c.sigma_m = 0.4;
    c.alpha_s = 4.0;
    c.theta_s = 0.15;
    c.sigma_z = 2.5;
    c.sigma_w = 2.5;
    c.include_isolated = false;
    return c;
  }
  if (name == "art") {
    c.nodes = 5000;
    c.dim = 2;
    c.horizon = 10.0;
    c.alpha_lambda = 0.35;
    c.theta_lambda = 120.0;
    c.alpha_beta = 2.0;
    c.theta_beta = 0.5;
    c.mu_m = 0.3;
    c.sigma_m = 0.4;
    c.alpha_s = 4.0;
    c.theta_s = 0.15;
    c.sigma_z = 2.5;
    c.sigma_w = 2.5;
    c.include_isolated = false;
    return c;
  }
  throw InvalidParams("unknown generator preset: " + name);
}

std::vector<int> sample_without_replacement(std::span<const double> weights, int k,
                                            Rng& rng) {
  const int n = static_cast<int>(weights.size());
  if (k < 0 || k > n)
    throw InvalidParams("sample_without_replacement: k out of range");
  for (double w : weights)
    if (!(w >= 0.0) || !std::isfinite(w))
      throw InvalidParams("sample_without_replacement: weights must be finite, >= 0");

  // Exponential race keys for the positive weights; zero-weight indices are
  // only drawn on once the positives run out, ordered by their own Exp(1)
  // keys (so an all-zero vector degrades to a uniform draw).
  std::vector<std::pair<double, int>> race;
  std::vector<std::pair<double, int>> zeros;
  race.reserve(static_cast<std::size_t>(n));
  for (int idx = 0; idx < n; ++idx) {
    const double e = rng.exponential();
    if (weights[idx] > 0.0)
      race.emplace_back(e / weights[idx], idx);
    else
      zeros.emplace_back(e, idx);
  }
  std::sort(race.begin(), race.end());
  std::sort(zeros.begin(), zeros.end());
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(k));
  for (int s = 0; s < k; ++s) {
    const std::size_t u = static_cast<std::size_t>(s);
    out.push_back(u < race.size() ? race[u].second : zeros[u - race.size()].second);
  }
  return out;
}

std::vector<int> sample_without_replacement(std::span<const double> weights, int k,
                                            std::uint64_t seed) {
  Rng rng(seed);
  return sample_without_replacement(weights, k, rng);
}

Generated generate(const GeneratorConfig& config) {
  check_config(config);
  const int n = config.nodes;
  Rng rng(config.seed);

  PlantedTruth truth;
  truth.horizon = config.horizon;
  truth.dim = config.dim;
  truth.family = config.family;
  truth.time.resize(n);
  truth.lambda.resize(n);
  truth.kappa.resize(n);
  truth.beta.resize(n);
  truth.mu.resize(n);
  truth.sigma.resize(n);
  truth.z.assign(n, std::vector<double>(config.dim));
  truth.w.assign(n, std::vector<double>(config.dim));

  if (!config.appendix_variant) {
    for (int i = 0; i < n; ++i) {
      truth.time[i] = rng.uniform(0.0, config.horizon);
      truth.lambda[i] = rng.gamma(config.alpha_lambda, config.theta_lambda);
      truth.beta[i] = rng.gamma(config.alpha_beta, config.theta_beta);
      for (int d = 0; d < config.dim; ++d) truth.z[i][d] = rng.normal(0.0, config.sigma_z);
      for (int d = 0; d < config.dim; ++d) truth.w[i][d] = rng.normal(0.0, config.sigma_w);
      truth.mu[i] = rng.normal(config.mu_m, config.sigma_m);
      truth.sigma[i] = std::max(rng.gamma(config.alpha_s, config.theta_s), 1e-4);
    }
  } else {
    // Two-level appendix process: kappa's rate and count first, impact
    // parameters after the relabeling step below.
    for (int i = 0; i < n; ++i) {
      truth.time[i] = rng.uniform(0.0, config.horizon);
      truth.lambda[i] = rng.gamma(config.alpha_lambda, config.theta_lambda);
      truth.kappa[i] = rng.poisson(truth.lambda[i]);
      truth.beta[i] = rng.gamma(config.alpha_beta, config.theta_beta);
      for (int d = 0; d < config.dim; ++d) truth.z[i][d] = rng.normal(0.0, config.sigma_z);
      for (int d = 0; d < config.dim; ++d) truth.w[i][d] = rng.normal(0.0, config.sigma_w);
    }
  }

  // Relabel nodes so appearance times are non-decreasing (stable on ties).
  {
    const auto perm = sort_permutation_by_time(truth.time);
    PlantedTruth sorted = truth;
    for (int k = 0; k < n; ++k) {
      const int o = perm[k];
      sorted.time[k] = truth.time[o];
      sorted.lambda[k] = truth.lambda[o];
      sorted.kappa[k] = truth.kappa[o];
      sorted.beta[k] = truth.beta[o];
      sorted.mu[k] = truth.mu[o];
      sorted.sigma[k] = truth.sigma[o];
      sorted.z[k] = truth.z[o];
      sorted.w[k] = truth.w[o];
    }
    truth = std::move(sorted);
  }
  truth.node_ids.resize(n);
  for (int i = 0; i < n; ++i) truth.node_ids[i] = node_id(i);

  if (config.appendix_variant) {
    for (int i = 0; i < n; ++i) {
      const double tau = rng.gamma(config.alpha_tau, config.theta_tau);
      truth.mu[i] = rng.normal(config.mu_loc, std::sqrt(1.0 / tau));
      truth.sigma[i] = std::max(1.0 / tau, 1e-4);
    }
  } else {
    for (int i = 0; i < n; ++i) truth.kappa[i] = rng.poisson(truth.lambda[i]);
  }

  const ImpactKind kind = planted_kind(truth);

  // Draw each node's citing set among later nodes.
  std::vector<Event> events;
  std::vector<double> weights;
  for (int i = 0; i < n - 1; ++i) {
    const long long kappa_i = truth.kappa[i];
    const int n_later = n - 1 - i;
    const int draw = static_cast<int>(std::min<long long>(kappa_i, n_later));
    if (draw == 0) continue;

    const ImpactParams impact = planted_impact(truth, i);
    weights.assign(static_cast<std::size_t>(n_later), 0.0);
    for (int j = i + 1; j < n; ++j) {
      double sq = 0.0;
      for (int d = 0; d < config.dim; ++d) {
        const double diff = truth.z[i][d] - truth.w[j][d];
        sq += diff * diff;
      }
      const double f = impact_pdf(kind, impact, truth.time[j] - truth.time[i]);
      weights[static_cast<std::size_t>(j - i - 1)] =
          static_cast<double>(kappa_i) * f * truth.beta[j] / std::exp(std::sqrt(sq));
    }
    const auto picks = sample_without_replacement(weights, draw, rng);
    for (int offset : picks) {
      const int j = i + 1 + offset;
      events.push_back({i, j, truth.time[j]});
    }
  }

  // Bipartite export: each node appears as a target and as a source role.
  std::vector<char> is_target(n, config.include_isolated ? 1 : 0);
  std::vector<char> is_source(n, config.include_isolated ? 1 : 0);
  if (!config.include_isolated) {
    for (const Event& e : events) {
      is_target[e.target] = 1;
      is_source[e.source] = 1;
    }
  }
  std::vector<int> target_of(n, -1), source_of(n, -1);
  NetworkData data;
  for (int i = 0; i < n; ++i) {
    if (is_target[i]) {
      target_of[i] = static_cast<int>(data.target_ids.size());
      data.target_ids.push_back(truth.node_ids[i]);
      data.target_times.push_back(truth.time[i]);
    }
    if (is_source[i]) {
      source_of[i] = static_cast<int>(data.source_ids.size());
      data.source_ids.push_back(truth.node_ids[i]);
      data.source_times.push_back(truth.time[i]);
    }
  }
  data.events.reserve(events.size());
  for (const Event& e : events)
    data.events.push_back({target_of[e.target], source_of[e.source], e.time});
  data.horizon = config.horizon;

  return {SingleEventNetwork::build(std::move(data)), std::move(truth)};
}

GeneratorReport validate_statistics(const SingleEventNetwork& net,
                                    const PlantedTruth& truth, int mc_reps,
                                    std::uint64_t seed) {
  GeneratorReport report;
  const int n = static_cast<int>(truth.node_ids.size());

  report.empirical_mean_citations =
      static_cast<double>(net.num_events()) / static_cast<double>(n);

  // Monte-Carlo estimate of E[min(Poisson(lambda_i), N - 1 - i)] averaged
  // over nodes, with a fresh Poisson draw per repetition.
  Rng rng(mix_seed(seed, fnv1a64("genreport/mc")));
  double sum = 0.0, sum_sq = 0.0;
  for (int r = 0; r < mc_reps; ++r) {
    double rep = 0.0;
    for (int i = 0; i < n; ++i) {
      const long long cap = n - 1 - i;
      const long long draw = std::min<long long>(rng.poisson(truth.lambda[i]), cap);
      rep += static_cast<double>(draw);
    }
    rep /= static_cast<double>(n);
    sum += rep;
    sum_sq += rep * rep;
  }
  report.expected_mean_citations = sum / mc_reps;
  const double var =
      std::max(0.0, sum_sq / mc_reps - report.expected_mean_citations *
                                           report.expected_mean_citations);
  report.expected_mean_stderr = std::sqrt(var / mc_reps);

  // Citation-age histogram vs the planted curve for well-cited nodes.
  const ImpactKind kind = planted_kind(truth);
  for (int i = 0; i < n; ++i) {
    if (truth.kappa[i] < 20) continue;
    const int t_idx = net.target_index(truth.node_ids[i]);
    if (t_idx < 0) continue;
    const auto row = net.events_of_target(t_idx);
    if (row.size() < 10) continue;
    const double window = truth.horizon - net.target_time(t_idx);
    if (!(window > 0.0)) continue;
    constexpr int kBins = 20;
    std::vector<double> hist(kBins, 0.0);
    for (const Event& e : row) {
      const double dt = e.time - net.target_time(t_idx);
      int b = static_cast<int>(dt / window * kBins);
      b = std::clamp(b, 0, kBins - 1);
      hist[b] += 1.0;
    }
    const double bin_w = window / kBins;
    for (double& h : hist) h /= (static_cast<double>(row.size()) * bin_w);
    const ImpactParams impact = planted_impact(truth, i);
    // Model density renormalized over the observed window.
    const double mass = impact_cdf(kind, impact, window);
    if (!(mass > 0.0)) continue;
    double l1 = 0.0;
    for (int b = 0; b < kBins; ++b) {
      const double lo = b * bin_w;
      const double hi = lo + bin_w;
      const double model =
          (impact_cdf(kind, impact, hi) - impact_cdf(kind, impact, lo)) / (mass * bin_w);
      l1 += std::abs(hist[b] - model) * bin_w;
    }
    report.impact_l1.emplace_back(truth.node_ids[i], l1);
  }

  int min_deg = std::numeric_limits<int>::max(), max_deg = 0;
  long long total_deg = 0;
  for (int i = 0; i < net.num_targets(); ++i) {
    const int d = net.in_degree(i);
    min_deg = std::min(min_deg, d);
    max_deg = std::max(max_deg, d);
    total_deg += d;
  }
  report.min_in_degree = net.num_targets() > 0 ? min_deg : 0;
  report.max_in_degree = max_deg;
  report.mean_in_degree =
      net.num_targets() > 0
          ? static_cast<double>(total_deg) / static_cast<double>(net.num_targets())
          : 0.0;
  return report;
}

std::string GeneratorReport::to_json() const {
  json doc;
  doc["empirical_mean_citations"] = empirical_mean_citations;
  doc["expected_mean_citations"] = expected_mean_citations;
  doc["expected_mean_stderr"] = expected_mean_stderr;
  doc["min_in_degree"] = min_in_degree;
  doc["max_in_degree"] = max_in_degree;
  doc["mean_in_degree"] = mean_in_degree;
  json l1 = json::array();
  for (const auto& [id, v] : impact_l1) l1.push_back({{"node", id}, {"l1", v}});
  doc["impact_l1"] = std::move(l1);
  return doc.dump(2) + "\n";
}

void save_truth_json(const PlantedTruth& truth, const std::string& path) {
  json doc;
  doc["horizon"] = truth.horizon;
  doc["dim"] = truth.dim;
  doc["family"] = impact_family_name(truth.family);
  doc["node_ids"] = truth.node_ids;
  doc["time"] = truth.time;
  doc["lambda"] = truth.lambda;
  doc["kappa"] = truth.kappa;
  doc["beta"] = truth.beta;
  doc["mu"] = truth.mu;
  doc["sigma"] = truth.sigma;
  doc["z"] = truth.z;
  doc["w"] = truth.w;
  write_file(path, doc.dump() + "\n");
}

PlantedTruth load_truth_json(const std::string& path) {
  const auto doc = json::parse(read_file(path));
  PlantedTruth truth;
  truth.horizon = doc.at("horizon").get<double>();
  truth.dim = doc.at("dim").get<int>();
  truth.family = impact_family_from_name(doc.at("family").get<std::string>());
  truth.node_ids = doc.at("node_ids").get<std::vector<std::string>>();
  truth.time = doc.at("time").get<std::vector<double>>();
  truth.lambda = doc.at("lambda").get<std::vector<double>>();
  truth.kappa = doc.at("kappa").get<std::vector<long long>>();
  truth.beta = doc.at("beta").get<std::vector<double>>();
  truth.mu = doc.at("mu").get<std::vector<double>>();
  truth.sigma = doc.at("sigma").get<std::vector<double>>();
  truth.z = doc.at("z").get<std::vector<std::vector<double>>>();
  truth.w = doc.at("w").get<std::vector<std::vector<double>>>();
  return truth;
}

}  // namespace sen
