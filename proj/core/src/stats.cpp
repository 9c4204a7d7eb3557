#include "scorecal/stats.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace scorecal {

double quantile_sorted(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) throw std::invalid_argument("quantile: empty sample");
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("quantile: p outside [0,1]");
  const std::size_t n = sorted.size();
  if (n == 1) return sorted[0];
  const double h = (static_cast<double>(n) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, n - 1);
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double quantile(std::vector<double> values, double p) {
  std::sort(values.begin(), values.end());
  return quantile_sorted(values, p);
}

Eigen::VectorXd column_means(const DrawMatrix& draws) {
  if (draws.rows() == 0) throw std::invalid_argument("column_means: no rows");
  return draws.colwise().mean();
}

Eigen::MatrixXd sample_covariance(const DrawMatrix& draws) {
  const auto n = draws.rows();
  if (n < 2) throw std::invalid_argument("sample_covariance: need at least 2 rows");
  const Eigen::MatrixXd centered = draws.rowwise() - draws.colwise().mean();
  return (centered.adjoint() * centered) / static_cast<double>(n - 1);
}

double sample_mean(const Eigen::VectorXd& values) {
  if (values.size() == 0) throw std::invalid_argument("sample_mean: empty");
  return values.mean();
}

double sample_sd(const Eigen::VectorXd& values) {
  const auto n = values.size();
  if (n < 2) throw std::invalid_argument("sample_sd: need at least 2 values");
  const double m = values.mean();
  const double ss = (values.array() - m).square().sum();
  return std::sqrt(ss / static_cast<double>(n - 1));
}

double pearson_correlation(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("pearson_correlation: size mismatch or too short");
  const double mx = x.mean();
  const double my = y.mean();
  const Eigen::ArrayXd dx = x.array() - mx;
  const Eigen::ArrayXd dy = y.array() - my;
  const double sxx = (dx * dx).sum();
  const double syy = (dy * dy).sum();
  if (sxx <= 0.0 || syy <= 0.0)
    throw std::invalid_argument("pearson_correlation: degenerate column");
  return (dx * dy).sum() / std::sqrt(sxx * syy);
}

void parallel_for(int count, int workers, const std::function<void(int)>& fn) {
  if (count <= 0) return;
  if (workers <= 1 || count == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  const int n_threads = std::min(workers, count);
  std::atomic<int> next{0};
  std::mutex err_mutex;
  std::exception_ptr first_error;

  auto worker = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };

  std::vector<std::thread> threads;
  threads.reserve(static_cast<std::size_t>(n_threads));
  for (int t = 0; t < n_threads; ++t) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace scorecal
