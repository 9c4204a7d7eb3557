#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "scorecal/diagnostics.hpp"
#include "scorecal/pipeline.hpp"

namespace scorecal {

/// Configuration of a replicated experiment as driven by the CLI. The
/// sections map holds per-model parameter overrides keyed by model name.
struct RunConfig {
  std::string model = "gaussian";
  int calibration_sets = 100;  // M
  int draws = 100;             // N
  double alpha = 1.0;
  double beta = 1.0;
  double inflate = 2.0;
  int replicates = 1;
  std::uint64_t seed = 1;
  int workers = 1;
  std::string out = ".";
  std::map<std::string, std::map<std::string, double>> sections;

  void validate() const;
};

/// A model instantiated from a RunConfig, together with the generating
/// parameters used to simulate observed datasets and the transform mode the
/// model defaults to.
struct BuiltModel {
  ModelSpec spec;
  ParamVector true_params;  // constrained space
  bool diagonal_transform = false;
  double penalty_lambda = 0.0;
};

/// Throws std::invalid_argument naming the offending field for unknown model
/// names or override keys.
BuiltModel build_model(const RunConfig& cfg);

struct MethodSummary {
  std::string method;  // "approx", "adjust(<alpha>)", "true"
  SummaryMetrics metrics;
};

/// Per-replicate artifact payload handed to the sink as soon as the
/// replicate finishes (possibly from a worker thread; sink calls are
/// serialized).
struct ReplicateOutcome {
  int index = 0;
  CalibrationResult result;
  DrawMatrix true_draws;  // constrained; empty when the model has no exact posterior
  CoverageCurve coverage;
};

struct ExperimentOutcome {
  std::vector<std::string> param_names;
  std::vector<MethodSummary> summary;
  CoverageCurve coverage;  // adjusted-posterior curve averaged over replicates
};

std::string method_label_adjust(double alpha);

/// Runs the replicated experiment: per replicate, simulate an observed
/// dataset at the generating parameters, run the calibration pipeline, and
/// (when available) sample the exact posterior for reference. Replicates run
/// on substreams of the master seed so results are independent of worker
/// scheduling. Failures carry the replicate index.
ExperimentOutcome run_experiment(
    const RunConfig& cfg,
    const std::function<void(const ReplicateOutcome&)>& sink = {});

}  // namespace scorecal
