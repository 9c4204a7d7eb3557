#pragma once

#include <cstdint>
#include <vector>

#include "scorecal/common.hpp"
#include "scorecal/rng.hpp"

namespace scorecal {

/// Configuration for the sample-based energy score.
///
/// The permutation pairs each draw i with draw permutation[i] in the
/// within-sample distance term. It is drawn once per calibration run and held
/// fixed across optimizer iterations so the objective is deterministic.
/// Fixed points are permitted; a fixed point contributes zero to the pair
/// term, which matches the score definition.
struct ScoreConfig {
  double beta = 1.0;                       // exponent, must lie in (0, 2)
  std::vector<std::int32_t> permutation;   // 0-based bijection on {0..N-1}

  void validate(Eigen::Index n_samples) const;
};

/// Permutation-pairing estimate of the energy score of the empirical sample
/// against the point theta:
///
///   (1/N) sum_i ( 0.5*||u_i - u_{k_i}||^beta - ||u_i - theta||^beta )
///
/// Larger is better. Requires N >= 2 and finite inputs.
double energy_score_perm(const DrawMatrix& samples, const ParamVector& theta,
                         const ScoreConfig& cfg);

/// Full double-sum estimate used as the testing oracle:
///
///   0.5*(1/N^2) sum_i sum_j ||u_i - u_j||^beta - (1/N) sum_i ||u_i - theta||^beta
double energy_score_oracle(const DrawMatrix& samples, const ParamVector& theta,
                           double beta);

/// Uniform random permutation of {0..n-1} (Fisher-Yates).
std::vector<std::int32_t> random_permutation(int n, Rng& rng);

}  // namespace scorecal
