#pragma once

#include <vector>

#include "scorecal/common.hpp"
#include "scorecal/weights.hpp"

namespace scorecal {

/// The M calibration triples produced by the generation steps: generating
/// parameter, simulated dataset, approximate posterior draws. Parameters and
/// draws are stored in unconstrained space; per-dataset posterior means are
/// cached because the moment transform centers on them.
struct CalibrationSet {
  Eigen::MatrixXd thetas;            // M x d generating parameters
  std::vector<Dataset> datasets;     // M simulated datasets
  std::vector<DrawMatrix> draws;     // M posterior sample sets, each N x d
  Eigen::MatrixXd centers;           // M x d cached posterior means
  WeightVector weights;              // length M

  Eigen::Index size() const { return thetas.rows(); }
  Eigen::Index dim() const { return thetas.cols(); }
  Eigen::Index draws_per_set() const {
    return draws.empty() ? 0 : draws.front().rows();
  }

  void validate() const;
};

}  // namespace scorecal
