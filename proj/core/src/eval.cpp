#include "sen/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "sen/errors.hpp"
#include "sen/text_io.hpp"

namespace sen {

namespace {
using json = nlohmann::ordered_json;
}

std::vector<double> score_dyads(const ModelParameters& params,
                                const SingleEventNetwork& net,
                                std::span<const Dyad> dyads) {
  std::vector<double> scores(dyads.size());
  for (std::size_t k = 0; k < dyads.size(); ++k)
    scores[k] = link_probability(params, net, dyads[k].target, dyads[k].source);
  return scores;
}

std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  std::size_t k = 0;
  while (k < n) {
    std::size_t j = k;
    while (j + 1 < n && values[order[j + 1]] == values[order[k]]) ++j;
    const double avg = 0.5 * (static_cast<double>(k) + static_cast<double>(j)) + 1.0;
    for (std::size_t s = k; s <= j; ++s) ranks[order[s]] = avg;
    k = j + 1;
  }
  return ranks;
}

double auc_roc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size())
    throw InvalidParams("auc_roc: scores/labels length mismatch");
  std::size_t n_pos = 0, n_neg = 0;
  for (int y : labels) (y != 0 ? n_pos : n_neg) += 1;
  if (n_pos == 0 || n_neg == 0)
    throw UndefinedMetric("auc_roc: both classes must be present");

  const auto ranks = average_ranks(scores);
  double rank_sum = 0.0;
  for (std::size_t k = 0; k < labels.size(); ++k)
    if (labels[k] != 0) rank_sum += ranks[k];
  const double n_pos_d = static_cast<double>(n_pos);
  const double u = rank_sum - n_pos_d * (n_pos_d + 1.0) / 2.0;
  return u / (n_pos_d * static_cast<double>(n_neg));
}

double auc_pr(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size())
    throw InvalidParams("auc_pr: scores/labels length mismatch");
  std::size_t n_pos = 0;
  for (int y : labels) n_pos += (y != 0);
  if (n_pos == 0) throw UndefinedMetric("auc_pr: no positives");

  // Average precision with ties grouped: thresholds descend over distinct
  // scores; every positive in a group contributes the group-end precision.
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });

  double ap = 0.0;
  double tp = 0.0, fp = 0.0;
  std::size_t k = 0;
  while (k < order.size()) {
    std::size_t j = k;
    double tp_gain = 0.0, fp_gain = 0.0;
    while (j < order.size() && scores[order[j]] == scores[order[k]]) {
      (labels[order[j]] != 0 ? tp_gain : fp_gain) += 1.0;
      ++j;
    }
    tp += tp_gain;
    fp += fp_gain;
    if (tp_gain > 0.0) ap += tp_gain * (tp / (tp + fp));
    k = j;
  }
  return ap / static_cast<double>(n_pos);
}

EvalReport evaluate(const SplitResult& split, const ModelParameters& params) {
  const auto t0 = std::chrono::steady_clock::now();

  std::vector<Dyad> dyads;
  std::vector<int> labels;
  dyads.reserve(split.test_positives.size() + split.test_negatives.size());
  for (const Event& e : split.test_positives) {
    dyads.push_back({e.target, e.source});
    labels.push_back(1);
  }
  for (const Dyad& d : split.test_negatives) {
    dyads.push_back(d);
    labels.push_back(0);
  }
  const auto scores = score_dyads(params, split.train, dyads);

  EvalReport report;
  report.auc_roc = auc_roc(scores, labels);
  report.auc_pr = auc_pr(scores, labels);
  report.variant = model_variant_name(params.variant());
  report.dim = params.dim();
  report.n_test_pos = static_cast<int>(split.test_positives.size());
  report.n_test_neg = static_cast<int>(split.test_negatives.size());
  report.runtime_ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
  return report;
}

double spearman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2)
    throw InvalidParams("spearman: need two equal-length samples");
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    ma += ra[k];
    mb += rb[k];
  }
  ma /= n;
  mb /= n;
  double cov = 0.0, va = 0.0, vb = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    cov += (ra[k] - ma) * (rb[k] - mb);
    va += (ra[k] - ma) * (ra[k] - ma);
    vb += (rb[k] - mb) * (rb[k] - mb);
  }
  if (va == 0.0 || vb == 0.0)
    throw UndefinedMetric("spearman: a sample is constant");
  return cov / std::sqrt(va * vb);
}

RecoveryStats recovery_stats(const ModelParameters& params, const PlantedTruth& truth,
                             const SingleEventNetwork& net, long long min_kappa,
                             int grid_points) {
  std::vector<double> fitted_mass;
  std::vector<double> planted_kappa;
  double l1_sum = 0.0;
  int l1_count = 0;

  const ImpactKind planted_kind = truth.family == ImpactFamily::kTruncatedNormal
                                      ? ImpactKind::kTruncatedNormal
                                      : ImpactKind::kLogNormal;
  const bool fitted_has_impact = variant_uses_impact(params.variant());

  for (std::size_t node = 0; node < truth.node_ids.size(); ++node) {
    if (truth.kappa[node] < min_kappa) continue;
    const int i = net.target_index(truth.node_ids[node]);
    if (i < 0) continue;
    fitted_mass.push_back(std::exp(params.alpha(i)));
    planted_kappa.push_back(static_cast<double>(truth.kappa[node]));

    if (!fitted_has_impact) continue;
    ImpactParams planted;
    planted.mu = truth.mu[node];
    planted.log_sigma = std::log(truth.sigma[node]);
    if (truth.family == ImpactFamily::kTruncatedNormal) {
      planted.lower = 0.0;
      planted.upper = truth.horizon;
    }
    const ImpactParams fitted = params.impact_view(i);
    const double step = net.horizon() / grid_points;
    double l1 = 0.0;
    for (int g = 0; g < grid_points; ++g) {
      const double dt = (g + 0.5) * step;
      l1 += std::abs(impact_pdf(params.impact_kind(), fitted, dt) -
                     impact_pdf(planted_kind, planted, dt)) *
            step;
    }
    l1_sum += l1;
    ++l1_count;
  }

  if (fitted_mass.size() < 10)
    throw InsufficientTruth("recovery_stats: fewer than 10 targets with kappa >= " +
                            std::to_string(min_kappa));

  RecoveryStats stats;
  stats.n_qualifying = static_cast<int>(fitted_mass.size());
  stats.spearman_alpha_kappa = spearman(fitted_mass, planted_kappa);
  stats.mean_impact_l1 = l1_count > 0 ? l1_sum / l1_count : 0.0;
  return stats;
}

std::string report_to_json(const EvalReport& report, bool include_runtime) {
  json doc;
  doc["variant"] = report.variant;
  doc["dim"] = report.dim;
  doc["auc_roc"] = report.auc_roc;
  doc["auc_pr"] = report.auc_pr;
  doc["n_test_pos"] = report.n_test_pos;
  doc["n_test_neg"] = report.n_test_neg;
  if (report.recovery) {
    doc["recovery"] = {{"spearman_alpha_kappa", report.recovery->spearman_alpha_kappa},
                       {"mean_impact_l1", report.recovery->mean_impact_l1},
                       {"n_qualifying", report.recovery->n_qualifying}};
  }
  if (include_runtime) doc["runtime_ms"] = report.runtime_ms;
  return doc.dump(2) + "\n";
}

void append_report_csv_row(const EvalReport& report, const std::string& dataset,
                           const std::string& path) {
  const bool fresh = !std::filesystem::exists(path);
  std::ofstream out(path, std::ios::app);
  if (!out) throw ParseError("cannot append to " + path);
  if (fresh) out << "model,dim,dataset,auc_pr,auc_roc\n";
  out << report.variant << ',' << report.dim << ',' << dataset << ','
      << format_double(report.auc_pr) << ',' << format_double(report.auc_roc) << '\n';
}

}  // namespace sen
