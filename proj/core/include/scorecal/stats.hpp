#pragma once

#include <functional>
#include <vector>

#include "scorecal/common.hpp"

namespace scorecal {

/// Empirical quantile with linear interpolation between order statistics
/// (h = (n-1)p + 1 on the sorted sample). This is the single quantile
/// convention used project-wide, for weight clipping and credible intervals
/// alike, so results are bit-reproducible.
double quantile(std::vector<double> values, double p);

/// Quantile of an already ascending-sorted vector.
double quantile_sorted(const std::vector<double>& sorted, double p);

Eigen::VectorXd column_means(const DrawMatrix& draws);

/// Sample covariance with divisor N-1. Requires at least two rows.
Eigen::MatrixXd sample_covariance(const DrawMatrix& draws);

double sample_mean(const Eigen::VectorXd& values);
double sample_sd(const Eigen::VectorXd& values);

/// Pearson correlation between two columns of draws.
double pearson_correlation(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

/// Runs fn(i) for i in [0, count). With workers > 1 the items are distributed
/// over a small thread pool; every item must be independent and write only to
/// its own output slot. The first exception thrown by any item is rethrown
/// after all threads join.
void parallel_for(int count, int workers, const std::function<void(int)>& fn);

}  // namespace scorecal
