#pragma once

#include <string>
#include <vector>

#include "scorecal/common.hpp"

namespace scorecal {

/// Symmetric tail-probability credible interval: the empirical quantiles at
/// (1-rho)/2 and 1-(1-rho)/2. Boundary equality counts as inclusion when
/// testing membership.
std::pair<double, double> credible_interval(const Eigen::VectorXd& draws, double rho);

/// Default nominal-level grid 0.05, 0.10, ..., 0.95.
std::vector<double> default_coverage_grid();

/// Estimated calibration coverage for one parameter: per nominal level, the
/// fraction of calibration pairs whose marginal interval contains the
/// generating parameter.
struct ParameterCoverage {
  std::string parameter;
  std::vector<double> levels;
  std::vector<double> coverage;
  int pair_count = 0;
  /// False when any grid point deviates from parity by more than the band.
  bool within_band(double band = 0.1) const;
};

struct CoverageCurve {
  std::vector<ParameterCoverage> parameters;
  bool low_pair_warning = false;  // fewer than 10 pairs
};

/// Marginal calibration-coverage diagnostic over M (theta, adjusted draws)
/// pairs. Warns (via low_pair_warning) below 10 pairs.
CoverageCurve coverage_curve(const Eigen::MatrixXd& thetas,
                             const std::vector<DrawMatrix>& adjusted,
                             const std::vector<std::string>& param_names,
                             const std::vector<double>& grid = default_coverage_grid());

/// Averages coverage curves with identical parameters and grids.
CoverageCurve average_coverage(const std::vector<CoverageCurve>& curves);

/// Per-parameter experiment metrics averaged over replicate runs.
struct ParameterSummary {
  std::string parameter;
  double mse = 0.0;          // mean over runs of (1/J) sum_j (draw_j - truth)^2
  double bias = 0.0;         // mean over runs of mean(draws) - truth
  double sd = 0.0;           // mean over runs of the sample SD of draws
  double coverage90 = 0.0;   // fraction of runs whose 90% interval covers truth
};

struct SummaryMetrics {
  std::vector<ParameterSummary> parameters;
  /// Mean over runs of the empirical correlation for each parameter pair
  /// (row-major upper triangle); empty for one-parameter models.
  std::vector<double> pair_correlations;
  std::vector<std::pair<int, int>> pair_indices;
};

SummaryMetrics summarize(const std::vector<DrawMatrix>& runs, const ParamVector& truth,
                         const std::vector<std::string>& param_names);

}  // namespace scorecal
