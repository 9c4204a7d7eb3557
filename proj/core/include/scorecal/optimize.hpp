#pragma once

#include <functional>

#include "scorecal/calibration.hpp"
#include "scorecal/score.hpp"
#include "scorecal/transform.hpp"

namespace scorecal {

struct OptimizerConfig {
  int max_iterations = 10000;
  double tolerance = 1e-8;            // stop when the simplex objective spread falls below this
  double initial_simplex_scale = 0.1; // coordinate step used to build the start simplex
  int restarts = 2;                   // fresh simplexes started from the incumbent

  void validate() const;
};

/// One evaluation of the weighted calibration objective.
struct ObjectiveEvaluation {
  TransformParams params;
  double value = 0.0;                   // sum_m w_m * score_m - penalty
  Eigen::VectorXd per_dataset_scores;   // length M
  double penalty_value = 0.0;
};

/// Weighted Monte Carlo objective: for each calibration dataset, push the
/// approximate draws through the transform encoded by params (centered at the
/// cached posterior mean) and score them against the generating parameter.
ObjectiveEvaluation objective(const TransformParams& params,
                              const CalibrationSet& calib,
                              const WeightVector& weights,
                              const ScoreConfig& score_cfg,
                              const PenaltyConfig& penalty_cfg);

struct NelderMeadOptions {
  int max_iterations = 10000;
  double tolerance = 1e-8;
  double simplex_scale = 0.1;
};

struct NelderMeadResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
};

/// Derivative-free simplex maximization. Deterministic given the start point;
/// the returned value never falls below f(x0).
NelderMeadResult nelder_mead_maximize(const std::function<double(const Eigen::VectorXd&)>& f,
                                      const Eigen::VectorXd& x0,
                                      const NelderMeadOptions& options);

struct MaximizeResult {
  MomentTransform transform;
  TransformParams params;
  double objective_value = 0.0;
  double identity_objective = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool improved = false;   // false means the identity was returned with a warning
};

/// Maximizes the calibration objective over transform parameters, starting
/// from the identity transform with optional multi-restart. If no candidate
/// beats the identity the identity transform is returned and `improved` is
/// left false.
MaximizeResult maximize(const CalibrationSet& calib, const WeightVector& weights,
                        const ScoreConfig& score_cfg, const PenaltyConfig& penalty_cfg,
                        const OptimizerConfig& opt_cfg, bool diagonal_only);

}  // namespace scorecal
