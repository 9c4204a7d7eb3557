#pragma once

#include <functional>
#include <vector>

#include "scorecal/common.hpp"

namespace scorecal {

/// Nonnegative, finite, not-all-zero importance weights, one per calibration
/// dataset.
using WeightVector = Eigen::VectorXd;

void validate_weights(const WeightVector& w);

/// Change-of-measure (stabilizing) function v applied to each simulated
/// dataset. The default is v == 1; a user-supplied function is the hook for
/// custom stabilizers.
struct Stabilizer {
  std::function<double(const Dataset&)> fn;  // empty means v == 1

  static Stabilizer unit() { return Stabilizer{}; }
  bool is_unit() const { return !static_cast<bool>(fn); }
  double operator()(const Dataset& data) const;
};

/// w_m = exp(log_prior(theta_m) - log_importance(theta_m)) * v(dataset_m).
///
/// Both log densities must be expressed in the same (unconstrained) parameter
/// space so that bijection Jacobians cancel in the ratio. A non-finite log
/// density raises an error naming the offending index.
WeightVector raw_weights(const std::function<double(const ParamVector&)>& log_prior,
                         const std::function<double(const ParamVector&)>& log_importance,
                         const Stabilizer& stabilizer,
                         const Eigen::MatrixXd& thetas,
                         const std::vector<Dataset>& datasets);

/// Clips each weight at the empirical (1-alpha)-quantile of the weights.
/// alpha = 0 leaves the vector unchanged; alpha = 1 clips everything to the
/// minimum, which is equivalent to unit weights after normalization.
WeightVector clip_weights(const WeightVector& w, double alpha);

WeightVector unit_weights(int m);

}  // namespace scorecal
