#include "scorecal/score.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace scorecal {

namespace {

void check_finite(const DrawMatrix& samples, const ParamVector& theta) {
  if (!samples.allFinite())
    throw std::invalid_argument("energy score: non-finite sample entry");
  if (!theta.allFinite())
    throw std::invalid_argument("energy score: non-finite theta entry");
}

// ||a - b||_2^beta for rows/vectors, with a cheap path for beta == 1.
inline double pow_norm(double squared_norm, double beta) {
  if (beta == 1.0) return std::sqrt(squared_norm);
  return std::pow(squared_norm, 0.5 * beta);
}

}  // namespace

void ScoreConfig::validate(Eigen::Index n_samples) const {
  if (!(beta > 0.0 && beta < 2.0))
    throw std::invalid_argument("ScoreConfig: beta must lie in (0, 2)");
  if (static_cast<Eigen::Index>(permutation.size()) != n_samples)
    throw std::invalid_argument("ScoreConfig: permutation length " +
                                std::to_string(permutation.size()) +
                                " does not match sample count " +
                                std::to_string(n_samples));
  std::vector<char> seen(permutation.size(), 0);
  for (const auto k : permutation) {
    if (k < 0 || static_cast<std::size_t>(k) >= permutation.size() || seen[static_cast<std::size_t>(k)])
      throw std::invalid_argument("ScoreConfig: permutation is not a bijection");
    seen[static_cast<std::size_t>(k)] = 1;
  }
}

double energy_score_perm(const DrawMatrix& samples, const ParamVector& theta,
                         const ScoreConfig& cfg) {
  const Eigen::Index n = samples.rows();
  const Eigen::Index d = samples.cols();
  if (n < 2)
    throw std::invalid_argument("energy_score_perm: need at least 2 samples");
  if (theta.size() != d)
    throw std::invalid_argument("energy_score_perm: dimension mismatch");
  cfg.validate(n);
  check_finite(samples, theta);

  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index k = cfg.permutation[static_cast<std::size_t>(i)];
    double ss_pair = 0.0;
    double ss_point = 0.0;
    for (Eigen::Index j = 0; j < d; ++j) {
      const double dp = samples(i, j) - samples(k, j);
      const double dt = samples(i, j) - theta(j);
      ss_pair += dp * dp;
      ss_point += dt * dt;
    }
    total += 0.5 * pow_norm(ss_pair, cfg.beta) - pow_norm(ss_point, cfg.beta);
  }
  return total / static_cast<double>(n);
}

double energy_score_oracle(const DrawMatrix& samples, const ParamVector& theta,
                           double beta) {
  const Eigen::Index n = samples.rows();
  const Eigen::Index d = samples.cols();
  if (n < 2)
    throw std::invalid_argument("energy_score_oracle: need at least 2 samples");
  if (theta.size() != d)
    throw std::invalid_argument("energy_score_oracle: dimension mismatch");
  if (!(beta > 0.0 && beta < 2.0))
    throw std::invalid_argument("energy_score_oracle: beta must lie in (0, 2)");
  check_finite(samples, theta);

  double pair_sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      pair_sum += pow_norm((samples.row(i) - samples.row(j)).squaredNorm(), beta);
    }
  }
  double point_sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    point_sum += pow_norm((samples.row(i).transpose() - theta).squaredNorm(), beta);
  }
  const double nn = static_cast<double>(n);
  return 0.5 * pair_sum / (nn * nn) - point_sum / nn;
}

std::vector<std::int32_t> random_permutation(int n, Rng& rng) {
  if (n < 1) throw std::invalid_argument("random_permutation: n must be positive");
  std::vector<std::int32_t> perm(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
  for (int i = n - 1; i > 0; --i) {
    const auto j = static_cast<int>(rng.next_index(static_cast<std::uint64_t>(i) + 1));
    std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
  }
  return perm;
}

}  // namespace scorecal
