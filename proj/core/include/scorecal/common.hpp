#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace scorecal {

/// A point in d-dimensional parameter space.
using ParamVector = Eigen::VectorXd;

/// N posterior draws stored row-wise: one row per draw, one column per
/// parameter. Association with the dataset that produced the draws is kept
/// positionally by the calibration structures.
using DrawMatrix = Eigen::MatrixXd;

/// Observed or simulated data: one row per realization, one column per
/// observed component. The calibration pipeline never inspects the contents;
/// only model code interprets datasets.
using Dataset = Eigen::MatrixXd;

inline constexpr const char* kVersion = "0.1.0";

}  // namespace scorecal
