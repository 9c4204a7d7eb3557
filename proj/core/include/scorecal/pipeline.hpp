#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "scorecal/calibration.hpp"
#include "scorecal/models.hpp"
#include "scorecal/optimize.hpp"

namespace scorecal {

/// Importance distribution: the approximate posterior at the observed data
/// with its scale inflated through theta' -> D*(theta' - center) + center
/// applied to the stored base draws.
struct ImportanceDistribution {
  DrawMatrix base;            // draws from the approximate posterior at y
  ParamVector center;         // estimated mean of those draws
  Eigen::VectorXd scale_diag; // positive diagonal of D

  void validate() const;
};

/// Draws `count` calibration parameters by inflating base draws. When count
/// does not exceed the number of base rows an evenly strided subset is used,
/// so the selection is deterministic; otherwise rows are resampled with
/// replacement and *resampled (when given) is set.
Eigen::MatrixXd sample_importance(const ImportanceDistribution& importance, int count,
                                  Rng& rng, bool* resampled = nullptr);

/// Full configuration of one calibration run.
struct CalibrationConfig {
  int calibration_sets = 100;   // M
  int draws_per_set = 100;      // N
  double alpha = 1.0;           // weight clipping level in [0,1]
  double beta = 1.0;            // energy score exponent in (0,2)
  double inflation = 2.0;       // importance scale, D = inflation * I
  bool diagonal_transform = false;
  std::vector<int> subset;      // indices of parameters to correct; empty = all
  /// With alpha = 1 the literal all-ones vector is used instead of the
  /// clipped-to-minimum raw weights; they are equivalent up to normalization.
  bool unit_weights_for_full_clip = true;
  Stabilizer stabilizer = Stabilizer::unit();
  OptimizerConfig optimizer;
  PenaltyConfig penalty;
  int workers = 1;
  std::uint64_t seed = 1;

  void validate() const;
};

struct OptimizerReport {
  int iterations = 0;
  int evaluations = 0;
  double objective = 0.0;
  double identity_objective = 0.0;
  bool improved = false;
};

/// Everything a calibration run produces. Draws and parameters are reported
/// in the constrained space; the transform itself acts on the unconstrained
/// space.
struct CalibrationResult {
  MomentTransform transform;                     // unconstrained space, full dimension
  DrawMatrix adjusted_draws;                     // constrained, observed data
  DrawMatrix approx_draws;                       // constrained, observed data
  Eigen::MatrixXd calibration_thetas;            // constrained, M x d
  std::vector<DrawMatrix> calibration_adjusted;  // constrained, M sets
  WeightVector weights;
  OptimizerReport optimizer;
  bool importance_resampled = false;
  std::vector<std::string> warnings;
};

/// Steps 1-4: importance sampling of calibration parameters, dataset
/// simulation, per-dataset approximate posterior sampling, center caching.
/// Per-dataset RNG substreams make the output independent of the worker
/// schedule. Failures abort with the dataset index and generating parameter.
CalibrationSet build_calibration_set(const ModelSpec& model,
                                     const ImportanceDistribution& importance,
                                     int calibration_sets, int draws_per_set,
                                     std::uint64_t seed, int workers = 1,
                                     bool* resampled = nullptr);

/// The full calibration pipeline for one observed dataset.
CalibrationResult calibrate(const ModelSpec& model, const Dataset& observed,
                            const CalibrationConfig& cfg);

}  // namespace scorecal
