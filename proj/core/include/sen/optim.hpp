#ifndef SEN_OPTIM_HPP
#define SEN_OPTIM_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sen/model.hpp"

namespace sen {

struct TrainConfig {
  double learning_rate = 0.1;
  int iterations = 3000;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 0;
  std::optional<CaseControlConfig> case_control;  // empty -> exact likelihood
  int log_every = 100;
  int threads = 1;
};

struct TraceRow {
  int iteration = 0;       // 1-based step index
  double nll = 0.0;        // objective at the pre-step parameters
  double ms = 0.0;         // wall-clock since fit() start
};

struct TrainTrace {
  std::vector<TraceRow> rows;
};

/// CSV with header `iteration,nll_estimate,ms`.
void write_trace_csv(const TrainTrace& trace, const std::string& path);

/// Seeded parameter initialization: embeddings ~ Normal(0, 0.1^2), random
/// effects zero, impact warm-started from each target's elapsed citation
/// times (log moments for log-normal kinds, raw moments for truncated kinds,
/// sigma floored at 0.1; targets without events fall back to the pooled
/// moments). Mixture components spread over per-target elapsed-time
/// quantiles with zero logits. Fixed-impact variants instead pin the impact
/// block to fit_empirical values (floor 1e-3).
ModelParameters initialize(const SingleEventNetwork& net, const ModelSpec& spec,
                           std::uint64_t seed);

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
};

/// One Adam update with bias correction; iteration is 1-based. Slots with a
/// set frozen mask keep their value exactly.
void adam_step(ModelParameters& params, const std::vector<double>& grad,
               AdamState& state, const TrainConfig& config, int iteration);

struct FitResult {
  ModelParameters params;
  TrainTrace trace;
};

/// Called at every logged iteration and once at the end (and with the last
/// finite parameters when a numerical abort is underway).
using CheckpointFn = std::function<void(int iteration, const ModelParameters&)>;

/// Full-batch Adam on the negative log-likelihood (case-control estimate
/// when configured, resampled per iteration unless the config pins the
/// sample). On a non-finite objective the step is retried once with a halved
/// learning rate; a second failure aborts with NumericalError after handing
/// the last finite parameters to the checkpoint callback.
FitResult fit(const SingleEventNetwork& net, const ModelSpec& spec,
              const TrainConfig& config, const ExcludeSet* exclude = nullptr,
              const CheckpointFn& checkpoint = {});

}  // namespace sen

#endif  // SEN_OPTIM_HPP
