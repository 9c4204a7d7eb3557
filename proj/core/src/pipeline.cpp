#include "scorecal/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "scorecal/stats.hpp"

namespace scorecal {

namespace {

// Substream tags within one calibration run. Calibration dataset m uses
// substream_seed(dataset_root, m).
constexpr std::uint64_t kObservedFitStream = 0xA11CE;
constexpr std::uint64_t kPermutationStream = 0xB0B;
constexpr std::uint64_t kResampleStream = 0xCA51;
constexpr std::uint64_t kDatasetRootStream = 0xDA7A;

std::vector<int> resolve_subset(const std::vector<int>& subset, Eigen::Index dim) {
  std::vector<int> cols;
  if (subset.empty()) {
    cols.resize(static_cast<std::size_t>(dim));
    for (Eigen::Index i = 0; i < dim; ++i) cols[static_cast<std::size_t>(i)] = static_cast<int>(i);
    return cols;
  }
  cols = subset;
  std::sort(cols.begin(), cols.end());
  if (std::adjacent_find(cols.begin(), cols.end()) != cols.end())
    throw std::invalid_argument("CalibrationConfig: subset has duplicate indices");
  for (const int c : cols) {
    if (c < 0 || c >= dim)
      throw std::invalid_argument("CalibrationConfig: subset index out of range");
  }
  return cols;
}

Eigen::MatrixXd take_columns(const Eigen::MatrixXd& m, const std::vector<int>& cols) {
  Eigen::MatrixXd out(m.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = m.col(cols[j]);
  return out;
}

// Embeds a transform learned on a parameter subset into the full dimension;
// untouched coordinates pass through exactly.
MomentTransform embed_transform(const MomentTransform& sub, const std::vector<int>& cols,
                                Eigen::Index dim) {
  MomentTransform full = MomentTransform::identity(dim);
  for (std::size_t i = 0; i < cols.size(); ++i) {
    full.shift(cols[i]) = sub.shift(static_cast<Eigen::Index>(i));
    for (std::size_t j = 0; j <= i; ++j)
      full.scale(cols[i], cols[j]) = sub.scale(static_cast<Eigen::Index>(i),
                                               static_cast<Eigen::Index>(j));
  }
  return full;
}

}  // namespace

void ImportanceDistribution::validate() const {
  if (base.rows() < 2) throw std::invalid_argument("ImportanceDistribution: need base draws");
  if (center.size() != base.cols() || scale_diag.size() != base.cols())
    throw std::invalid_argument("ImportanceDistribution: dimension mismatch");
  for (Eigen::Index i = 0; i < scale_diag.size(); ++i) {
    if (!(scale_diag(i) > 0.0))
      throw std::invalid_argument("ImportanceDistribution: scale diagonal must be positive");
  }
}

Eigen::MatrixXd sample_importance(const ImportanceDistribution& importance, int count,
                                  Rng& rng, bool* resampled) {
  importance.validate();
  if (count < 1) throw std::invalid_argument("sample_importance: count must be positive");
  const Eigen::Index rows = importance.base.rows();
  const Eigen::Index d = importance.base.cols();

  Eigen::MatrixXd out(count, d);
  const bool need_resample = count > rows;
  if (resampled) *resampled = need_resample;
  for (int i = 0; i < count; ++i) {
    Eigen::Index idx;
    if (need_resample) {
      idx = static_cast<Eigen::Index>(rng.next_index(static_cast<std::uint64_t>(rows)));
    } else {
      idx = static_cast<Eigen::Index>((static_cast<std::int64_t>(i) * rows) / count);
    }
    // row + (D - 1)*(row - center): algebraically D*(row - center) + center,
    // written so that D = I reproduces the base rows bit-exactly.
    out.row(i) = importance.base.row(idx).array() +
                 (importance.scale_diag.transpose().array() - 1.0) *
                     (importance.base.row(idx) - importance.center.transpose()).array();
  }
  return out;
}

void CalibrationConfig::validate() const {
  if (calibration_sets < 2)
    throw std::invalid_argument("CalibrationConfig: need at least 2 calibration sets");
  if (draws_per_set < 2)
    throw std::invalid_argument("CalibrationConfig: need at least 2 draws per set");
  if (alpha < 0.0 || alpha > 1.0)
    throw std::invalid_argument("CalibrationConfig: alpha outside [0,1]");
  if (!(beta > 0.0 && beta < 2.0))
    throw std::invalid_argument("CalibrationConfig: beta outside (0,2)");
  if (!(inflation > 0.0))
    throw std::invalid_argument("CalibrationConfig: inflation must be positive");
  if (workers < 1) throw std::invalid_argument("CalibrationConfig: workers must be >= 1");
  optimizer.validate();
  penalty.validate();
}

CalibrationSet build_calibration_set(const ModelSpec& model,
                                     const ImportanceDistribution& importance,
                                     int calibration_sets, int draws_per_set,
                                     std::uint64_t seed, int workers, bool* resampled) {
  if (calibration_sets < 2)
    throw std::invalid_argument("build_calibration_set: need at least 2 calibration sets");
  if (draws_per_set < 2)
    throw std::invalid_argument("build_calibration_set: need at least 2 draws per set");

  const Eigen::Index d = model.dim;
  CalibrationSet calib;

  Rng resample_rng(substream_seed(seed, kResampleStream));
  calib.thetas = sample_importance(importance, calibration_sets, resample_rng, resampled);

  calib.datasets.resize(static_cast<std::size_t>(calibration_sets));
  calib.draws.resize(static_cast<std::size_t>(calibration_sets));
  calib.centers.resize(calibration_sets, d);

  const std::uint64_t dataset_root = substream_seed(seed, kDatasetRootStream);
  parallel_for(calibration_sets, workers, [&](int m) {
    Rng rng(substream_seed(dataset_root, static_cast<std::uint64_t>(m)));
    const ParamVector theta_u = calib.thetas.row(m);
    try {
      const ParamVector theta_c = model.bijections.to_constrained(theta_u);
      Dataset data = model.simulate(theta_c, rng);
      FittedPosterior post = model.fit_approx(data, rng);
      DrawMatrix draws = post.sample(draws_per_set, rng);
      if (!draws.allFinite())
        throw std::runtime_error("approximate posterior produced non-finite draws");
      calib.centers.row(m) = draws.colwise().mean();
      calib.draws[static_cast<std::size_t>(m)] = std::move(draws);
      calib.datasets[static_cast<std::size_t>(m)] = std::move(data);
    } catch (const std::exception& e) {
      std::string theta_str = "(";
      for (Eigen::Index i = 0; i < theta_u.size(); ++i)
        theta_str += (i ? ", " : "") + std::to_string(theta_u(i));
      theta_str += ")";
      throw std::runtime_error("calibration dataset " + std::to_string(m) +
                               " with parameter " + theta_str + ": " + e.what());
    }
  });

  calib.weights = unit_weights(calibration_sets);
  calib.validate();
  return calib;
}

CalibrationResult calibrate(const ModelSpec& model, const Dataset& observed,
                            const CalibrationConfig& cfg) {
  cfg.validate();
  const Eigen::Index d = model.dim;
  CalibrationResult result;

  // Approximate posterior at the observed data; its draws seed both the
  // importance distribution and the final pushforward.
  Rng observed_rng(substream_seed(cfg.seed, kObservedFitStream));
  FittedPosterior approx_y = model.fit_approx(observed, observed_rng);
  const DrawMatrix base = approx_y.sample(cfg.draws_per_set, observed_rng);
  if (!base.allFinite())
    throw std::runtime_error("calibrate: approximate posterior draws are not finite");

  ImportanceDistribution importance;
  importance.base = base;
  importance.center = base.colwise().mean();
  importance.scale_diag = Eigen::VectorXd::Constant(d, cfg.inflation);

  CalibrationSet calib =
      build_calibration_set(model, importance, cfg.calibration_sets, cfg.draws_per_set,
                            cfg.seed, cfg.workers, &result.importance_resampled);
  if (result.importance_resampled)
    result.warnings.push_back("importance draws resampled with replacement: requested " +
                              std::to_string(cfg.calibration_sets) + " from " +
                              std::to_string(base.rows()) + " base draws");

  // Step 3: weights.
  if (cfg.alpha == 1.0 && cfg.unit_weights_for_full_clip) {
    calib.weights = unit_weights(cfg.calibration_sets);
  } else {
    if (!approx_y.logpdf_unnorm)
      throw std::invalid_argument(
          "calibrate: alpha < 1 requires an approximate posterior log-density, which "
          "this model does not provide");
    const ParamVector center = importance.center;
    const Eigen::VectorXd inv_scale = importance.scale_diag.cwiseInverse();
    auto log_importance = [&approx_y, center, inv_scale](const ParamVector& u) {
      // Density of the inflated approximate posterior, up to the constant
      // -log det D which cancels after weight normalization.
      const ParamVector pre = center.array() + inv_scale.array() * (u - center).array();
      return approx_y.logpdf_unnorm(pre);
    };
    WeightVector raw = raw_weights(model.log_prior, log_importance, cfg.stabilizer,
                                   calib.thetas, calib.datasets);
    WeightVector clipped = clip_weights(raw, cfg.alpha);
    // Normalize to mean one; the optimizer's argmax is invariant to positive
    // rescaling and this keeps objective magnitudes comparable across alpha.
    calib.weights = clipped * (static_cast<double>(clipped.size()) / clipped.sum());
  }
  result.weights = calib.weights;

  // Step 5: optimize the transform, on the requested parameter subset.
  const std::vector<int> cols = resolve_subset(cfg.subset, d);
  const bool restricted = static_cast<Eigen::Index>(cols.size()) != d;

  ScoreConfig score_cfg;
  score_cfg.beta = cfg.beta;
  Rng perm_rng(substream_seed(cfg.seed, kPermutationStream));
  score_cfg.permutation = random_permutation(cfg.draws_per_set, perm_rng);

  MaximizeResult opt;
  if (restricted) {
    CalibrationSet sub;
    sub.thetas = take_columns(calib.thetas, cols);
    sub.centers = take_columns(calib.centers, cols);
    sub.datasets = calib.datasets;
    sub.draws.reserve(calib.draws.size());
    for (const auto& dm : calib.draws) sub.draws.push_back(take_columns(dm, cols));
    sub.weights = calib.weights;
    opt = maximize(sub, sub.weights, score_cfg, cfg.penalty, cfg.optimizer,
                   cfg.diagonal_transform);
    result.transform = embed_transform(opt.transform, cols, d);
  } else {
    opt = maximize(calib, calib.weights, score_cfg, cfg.penalty, cfg.optimizer,
                   cfg.diagonal_transform);
    result.transform = opt.transform;
  }
  result.optimizer = {opt.iterations, opt.evaluations, opt.objective_value,
                      opt.identity_objective, opt.improved};
  if (!opt.improved)
    result.warnings.push_back(
        "optimizer did not improve on the identity transform; returning identity");

  // Step 6: pushforward for the observed data and the diagnostic pairs,
  // mapped back to the constrained space.
  result.approx_draws = model.bijections.rows_to_constrained(base);
  result.adjusted_draws =
      model.bijections.rows_to_constrained(pushforward(result.transform, base));
  result.calibration_thetas = Eigen::MatrixXd(calib.thetas.rows(), d);
  for (Eigen::Index m = 0; m < calib.thetas.rows(); ++m)
    result.calibration_thetas.row(m) =
        model.bijections.to_constrained(calib.thetas.row(m));
  result.calibration_adjusted.reserve(static_cast<std::size_t>(calib.size()));
  for (Eigen::Index m = 0; m < calib.size(); ++m) {
    const DrawMatrix pushed = pushforward_with_center(
        result.transform, calib.draws[static_cast<std::size_t>(m)], calib.centers.row(m));
    result.calibration_adjusted.push_back(model.bijections.rows_to_constrained(pushed));
  }
  return result;
}

}  // namespace scorecal
