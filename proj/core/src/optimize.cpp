#include "scorecal/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace scorecal {

void CalibrationSet::validate() const {
  const auto m = size();
  if (m < 1) throw std::invalid_argument("CalibrationSet: empty");
  if (static_cast<Eigen::Index>(datasets.size()) != m ||
      static_cast<Eigen::Index>(draws.size()) != m || centers.rows() != m)
    throw std::invalid_argument("CalibrationSet: component count mismatch");
  const auto d = dim();
  const auto n = draws_per_set();
  if (n < 2) throw std::invalid_argument("CalibrationSet: need at least 2 draws per set");
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto& dm = draws[static_cast<std::size_t>(i)];
    if (dm.cols() != d || dm.rows() != n)
      throw std::invalid_argument("CalibrationSet: draw matrix " + std::to_string(i) +
                                  " has inconsistent shape");
  }
  if (centers.cols() != d)
    throw std::invalid_argument("CalibrationSet: center dimension mismatch");
  if (weights.size() != 0 && weights.size() != m)
    throw std::invalid_argument("CalibrationSet: weight length mismatch");
}

void OptimizerConfig::validate() const {
  if (max_iterations < 1)
    throw std::invalid_argument("OptimizerConfig: max_iterations must be at least 1");
  if (!(tolerance > 0.0))
    throw std::invalid_argument("OptimizerConfig: tolerance must be positive");
  if (!(initial_simplex_scale > 0.0))
    throw std::invalid_argument("OptimizerConfig: initial_simplex_scale must be positive");
  if (restarts < 0)
    throw std::invalid_argument("OptimizerConfig: restarts must be nonnegative");
}

ObjectiveEvaluation objective(const TransformParams& params,
                              const CalibrationSet& calib,
                              const WeightVector& weights,
                              const ScoreConfig& score_cfg,
                              const PenaltyConfig& penalty_cfg) {
  calib.validate();
  validate_weights(weights);
  const auto m = calib.size();
  if (weights.size() != m)
    throw std::invalid_argument("objective: weight length does not match calibration size");
  if (params.dim != calib.dim())
    throw std::invalid_argument("objective: parameter dimension mismatch");

  const MomentTransform transform = unpack(params);

  ObjectiveEvaluation eval;
  eval.params = params;
  eval.per_dataset_scores.resize(m);
  double total = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    try {
      const DrawMatrix pushed = pushforward_with_center(
          transform, calib.draws[static_cast<std::size_t>(i)], calib.centers.row(i));
      const double s = energy_score_perm(pushed, calib.thetas.row(i), score_cfg);
      eval.per_dataset_scores(i) = s;
      total += weights(i) * s;
    } catch (const std::exception& e) {
      throw std::runtime_error("objective: dataset " + std::to_string(i) + ": " + e.what());
    }
  }
  eval.penalty_value = penalty(params, penalty_cfg);
  eval.value = total - eval.penalty_value;
  return eval;
}

NelderMeadResult nelder_mead_maximize(const std::function<double(const Eigen::VectorXd&)>& f,
                                      const Eigen::VectorXd& x0,
                                      const NelderMeadOptions& options) {
  const int n = static_cast<int>(x0.size());
  if (n < 1) throw std::invalid_argument("nelder_mead: empty start point");

  int evaluations = 0;
  // Minimize the negated objective with the standard reflect/expand/contract
  // coefficients (1, 2, 0.5, 0.5).
  auto neg = [&](const Eigen::VectorXd& x) {
    ++evaluations;
    return -f(x);
  };

  std::vector<Eigen::VectorXd> simplex;
  std::vector<double> values;
  simplex.reserve(static_cast<std::size_t>(n) + 1);
  simplex.push_back(x0);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd v = x0;
    v(i) += options.simplex_scale;
    simplex.push_back(std::move(v));
  }
  values.resize(simplex.size());
  for (std::size_t i = 0; i < simplex.size(); ++i) values[i] = neg(simplex[i]);

  std::vector<std::size_t> order(simplex.size());
  auto sort_order = [&]() {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  };

  NelderMeadResult result;
  int iter = 0;
  for (; iter < options.max_iterations; ++iter) {
    sort_order();
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second_worst = order[order.size() - 2];

    if (values[worst] - values[best] <= options.tolerance) {
      result.converged = true;
      break;
    }

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (std::size_t i = 0; i < order.size(); ++i) {
      if (order[i] != worst) centroid += simplex[order[i]];
    }
    centroid /= static_cast<double>(n);

    const Eigen::VectorXd reflected = centroid + (centroid - simplex[worst]);
    const double f_reflected = neg(reflected);

    if (f_reflected < values[best]) {
      const Eigen::VectorXd expanded = centroid + 2.0 * (centroid - simplex[worst]);
      const double f_expanded = neg(expanded);
      if (f_expanded < f_reflected) {
        simplex[worst] = expanded;
        values[worst] = f_expanded;
      } else {
        simplex[worst] = reflected;
        values[worst] = f_reflected;
      }
    } else if (f_reflected < values[second_worst]) {
      simplex[worst] = reflected;
      values[worst] = f_reflected;
    } else {
      const bool outside = f_reflected < values[worst];
      const Eigen::VectorXd base = outside ? reflected : simplex[worst];
      const Eigen::VectorXd contracted = centroid + 0.5 * (base - centroid);
      const double f_contracted = neg(contracted);
      if (f_contracted < std::min(f_reflected, values[worst])) {
        simplex[worst] = contracted;
        values[worst] = f_contracted;
      } else {
        // Shrink toward the best vertex.
        for (std::size_t i = 0; i < simplex.size(); ++i) {
          if (i == best) continue;
          simplex[i] = simplex[best] + 0.5 * (simplex[i] - simplex[best]);
          values[i] = neg(simplex[i]);
        }
      }
    }
  }

  sort_order();
  result.x = simplex[order.front()];
  result.value = -values[order.front()];
  result.iterations = iter;
  result.evaluations = evaluations;
  return result;
}

MaximizeResult maximize(const CalibrationSet& calib, const WeightVector& weights,
                        const ScoreConfig& score_cfg, const PenaltyConfig& penalty_cfg,
                        const OptimizerConfig& opt_cfg, bool diagonal_only) {
  opt_cfg.validate();
  const auto d = calib.dim();
  const TransformParams id_params = identity_params(d, diagonal_only);

  auto eval_values = [&](const Eigen::VectorXd& values) {
    TransformParams p = id_params;
    p.values = values;
    return objective(p, calib, weights, score_cfg, penalty_cfg).value;
  };

  NelderMeadOptions nm;
  nm.max_iterations = opt_cfg.max_iterations;
  nm.tolerance = opt_cfg.tolerance;
  nm.simplex_scale = opt_cfg.initial_simplex_scale;

  MaximizeResult result;
  result.identity_objective = eval_values(id_params.values);

  Eigen::VectorXd best_x = id_params.values;
  double best_value = result.identity_objective;

  for (int round = 0; round <= opt_cfg.restarts; ++round) {
    const NelderMeadResult run = nelder_mead_maximize(eval_values, best_x, nm);
    result.iterations += run.iterations;
    result.evaluations += run.evaluations;
    if (run.value > best_value) {
      best_value = run.value;
      best_x = run.x;
    }
    // Later rounds probe the incumbent with a tighter simplex.
    nm.simplex_scale *= 0.5;
  }

  result.improved = best_value > result.identity_objective;
  TransformParams best = id_params;
  best.values = result.improved ? best_x : id_params.values;
  result.params = best;
  result.objective_value = result.improved ? best_value : result.identity_objective;
  result.transform = unpack(best);
  return result;
}

}  // namespace scorecal
