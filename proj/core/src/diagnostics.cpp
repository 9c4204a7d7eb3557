#include "scorecal/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "scorecal/stats.hpp"

namespace scorecal {

std::pair<double, double> credible_interval(const Eigen::VectorXd& draws, double rho) {
  if (draws.size() < 2)
    throw std::invalid_argument("credible_interval: need at least 2 draws");
  if (!(rho > 0.0 && rho < 1.0))
    throw std::invalid_argument("credible_interval: rho outside (0,1)");
  std::vector<double> sorted(draws.data(), draws.data() + draws.size());
  std::sort(sorted.begin(), sorted.end());
  const double tail = 0.5 * (1.0 - rho);
  return {quantile_sorted(sorted, tail), quantile_sorted(sorted, 1.0 - tail)};
}

std::vector<double> default_coverage_grid() {
  std::vector<double> grid;
  for (int i = 1; i <= 19; ++i) grid.push_back(0.05 * i);
  return grid;
}

bool ParameterCoverage::within_band(double band) const {
  // The slack absorbs floating error so an exact-boundary deviation (say
  // coverage 0.65 at level 0.55) counts as inside the band.
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (std::abs(coverage[i] - levels[i]) > band + 1e-12) return false;
  }
  return true;
}

CoverageCurve coverage_curve(const Eigen::MatrixXd& thetas,
                             const std::vector<DrawMatrix>& adjusted,
                             const std::vector<std::string>& param_names,
                             const std::vector<double>& grid) {
  const Eigen::Index m = thetas.rows();
  const Eigen::Index d = thetas.cols();
  if (m == 0 || adjusted.empty())
    throw std::invalid_argument("coverage_curve: no calibration pairs");
  if (static_cast<Eigen::Index>(adjusted.size()) != m)
    throw std::invalid_argument("coverage_curve: theta/draws count mismatch");
  if (static_cast<Eigen::Index>(param_names.size()) != d)
    throw std::invalid_argument("coverage_curve: parameter name count mismatch");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1]))
      throw std::invalid_argument("coverage_curve: grid must be strictly increasing");
  }
  if (grid.empty() || !(grid.front() > 0.0 && grid.back() < 1.0))
    throw std::invalid_argument("coverage_curve: grid must lie inside (0,1)");

  CoverageCurve curve;
  curve.low_pair_warning = m < 10;
  curve.parameters.resize(static_cast<std::size_t>(d));
  for (Eigen::Index j = 0; j < d; ++j) {
    auto& pc = curve.parameters[static_cast<std::size_t>(j)];
    pc.parameter = param_names[static_cast<std::size_t>(j)];
    pc.levels = grid;
    pc.coverage.assign(grid.size(), 0.0);
    pc.pair_count = static_cast<int>(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      const Eigen::VectorXd column = adjusted[static_cast<std::size_t>(i)].col(j);
      std::vector<double> sorted(column.data(), column.data() + column.size());
      std::sort(sorted.begin(), sorted.end());
      const double target = thetas(i, j);
      for (std::size_t g = 0; g < grid.size(); ++g) {
        const double tail = 0.5 * (1.0 - grid[g]);
        const double lo = quantile_sorted(sorted, tail);
        const double hi = quantile_sorted(sorted, 1.0 - tail);
        if (lo <= target && target <= hi) pc.coverage[g] += 1.0;
      }
    }
    for (auto& c : pc.coverage) c /= static_cast<double>(m);
  }
  return curve;
}

CoverageCurve average_coverage(const std::vector<CoverageCurve>& curves) {
  if (curves.empty()) throw std::invalid_argument("average_coverage: no curves");
  CoverageCurve avg = curves.front();
  for (std::size_t c = 1; c < curves.size(); ++c) {
    const auto& cur = curves[c];
    if (cur.parameters.size() != avg.parameters.size())
      throw std::invalid_argument("average_coverage: parameter count mismatch");
    for (std::size_t p = 0; p < avg.parameters.size(); ++p) {
      auto& ap = avg.parameters[p];
      const auto& cp = cur.parameters[p];
      if (cp.coverage.size() != ap.coverage.size())
        throw std::invalid_argument("average_coverage: grid mismatch");
      for (std::size_t g = 0; g < ap.coverage.size(); ++g)
        ap.coverage[g] += cp.coverage[g];
    }
    avg.low_pair_warning = avg.low_pair_warning || cur.low_pair_warning;
  }
  const double k = static_cast<double>(curves.size());
  for (auto& p : avg.parameters)
    for (auto& c : p.coverage) c /= k;
  return avg;
}

SummaryMetrics summarize(const std::vector<DrawMatrix>& runs, const ParamVector& truth,
                         const std::vector<std::string>& param_names) {
  if (runs.empty()) throw std::invalid_argument("summarize: no runs");
  const Eigen::Index d = truth.size();
  if (static_cast<Eigen::Index>(param_names.size()) != d)
    throw std::invalid_argument("summarize: parameter name count mismatch");
  for (const auto& run : runs) {
    if (run.cols() != d) throw std::invalid_argument("summarize: run dimension mismatch");
    if (run.rows() < 2) throw std::invalid_argument("summarize: runs need at least 2 draws");
  }

  SummaryMetrics metrics;
  metrics.parameters.resize(static_cast<std::size_t>(d));
  const double n_runs = static_cast<double>(runs.size());

  for (Eigen::Index j = 0; j < d; ++j) {
    auto& ps = metrics.parameters[static_cast<std::size_t>(j)];
    ps.parameter = param_names[static_cast<std::size_t>(j)];
    for (const auto& run : runs) {
      const Eigen::VectorXd column = run.col(j);
      ps.mse += (column.array() - truth(j)).square().mean();
      ps.bias += column.mean() - truth(j);
      ps.sd += sample_sd(column);
      const auto [lo, hi] = credible_interval(column, 0.9);
      if (lo <= truth(j) && truth(j) <= hi) ps.coverage90 += 1.0;
    }
    ps.mse /= n_runs;
    ps.bias /= n_runs;
    ps.sd /= n_runs;
    ps.coverage90 /= n_runs;
  }

  for (Eigen::Index a = 0; a < d; ++a) {
    for (Eigen::Index b = a + 1; b < d; ++b) {
      double corr = 0.0;
      for (const auto& run : runs) corr += pearson_correlation(run.col(a), run.col(b));
      metrics.pair_correlations.push_back(corr / n_runs);
      metrics.pair_indices.emplace_back(static_cast<int>(a), static_cast<int>(b));
    }
  }
  return metrics;
}

}  // namespace scorecal
