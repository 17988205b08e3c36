#ifndef SEN_EVAL_HPP
#define SEN_EVAL_HPP

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sen/generator.hpp"
#include "sen/model.hpp"
#include "sen/split.hpp"

namespace sen {

struct RecoveryStats {
  double spearman_alpha_kappa = 0.0;
  double mean_impact_l1 = 0.0;
  int n_qualifying = 0;
};

struct EvalReport {
  double auc_roc = 0.0;
  double auc_pr = 0.0;
  std::string variant;
  int dim = 0;
  int n_test_pos = 0;
  int n_test_neg = 0;
  std::optional<RecoveryStats> recovery;
  double runtime_ms = 0.0;
};

/// Event probabilities Lambda/(1+Lambda) per dyad; monotone in Lambda, so
/// ranking metrics may equivalently be computed from either.
std::vector<double> score_dyads(const ModelParameters& params,
                                const SingleEventNetwork& net,
                                std::span<const Dyad> dyads);

/// Normalized Mann-Whitney U with ties counted 1/2. Throws UndefinedMetric
/// when a class is missing.
double auc_roc(std::span<const double> scores, std::span<const int> labels);

/// Average precision over descending scores with tied scores grouped at one
/// threshold. Throws UndefinedMetric when no positive is present.
double auc_pr(std::span<const double> scores, std::span<const int> labels);

/// Scores the split's held-out positives and negatives and fills the report.
EvalReport evaluate(const SplitResult& split, const ModelParameters& params);

/// Spearman correlation between exp(alpha_i) and the planted citation count
/// over targets with kappa >= min_kappa, plus the mean L1 distance between
/// fitted and planted impact densities on a grid_points-point elapsed-time
/// grid. Throws InsufficientTruth below 10 qualifying targets.
RecoveryStats recovery_stats(const ModelParameters& params, const PlantedTruth& truth,
                             const SingleEventNetwork& net, long long min_kappa = 5,
                             int grid_points = 100);

/// Average ranks (ties averaged), the building block of the rank metrics.
std::vector<double> average_ranks(std::span<const double> values);
double spearman(std::span<const double> a, std::span<const double> b);

std::string report_to_json(const EvalReport& report, bool include_runtime = true);

/// Appends `model,dim,dataset,auc_pr,auc_roc` (with a header when the file
/// is new) for assembling result tables across runs.
void append_report_csv_row(const EvalReport& report, const std::string& dataset,
                           const std::string& path);

}  // namespace sen

#endif  // SEN_EVAL_HPP
