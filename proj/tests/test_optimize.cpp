#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "scorecal/optimize.hpp"
#include "scorecal/rng.hpp"
#include "scorecal/stats.hpp"

using namespace scorecal;

namespace {

ScoreConfig fixed_score(int n, double beta = 1.0) {
  ScoreConfig cfg;
  cfg.beta = beta;
  Rng rng(999);
  cfg.permutation = random_permutation(n, rng);
  return cfg;
}

// Conjugate synthetic setup: theta_m ~ N(prior_mean, 1) per coordinate, one
// observation y ~ N(theta_m, 2), so the exact posterior is
// N((y + 2 prior_mean)/3, 2/3). Draws come from that posterior, optionally
// distorted as (draw - shift)/scale. With shift = 0 and scale = 1 the draws
// are genuine posterior samples and the identity transform is optimal.
struct ConjugateSet {
  CalibrationSet calib;
  Eigen::MatrixXd post_means;                   // target posterior means
  double post_sd = std::sqrt(2.0 / 3.0);        // target posterior SD
};

ConjugateSet synthetic_set(int m_sets, int n_draws, int dim, double shift,
                           double scale, Rng& rng, double prior_mean = 0.0) {
  ConjugateSet out;
  CalibrationSet& calib = out.calib;
  calib.thetas.resize(m_sets, dim);
  calib.centers.resize(m_sets, dim);
  calib.datasets.resize(static_cast<std::size_t>(m_sets), Dataset::Zero(1, 1));
  out.post_means.resize(m_sets, dim);
  for (int m = 0; m < m_sets; ++m) {
    for (int j = 0; j < dim; ++j) {
      calib.thetas(m, j) = rng.normal(prior_mean, 1.0);
      const double y = rng.normal(calib.thetas(m, j), std::sqrt(2.0));
      out.post_means(m, j) = (y + 2.0 * prior_mean) / 3.0;
    }
    DrawMatrix draws(n_draws, dim);
    for (int i = 0; i < n_draws; ++i)
      for (int j = 0; j < dim; ++j)
        draws(i, j) = (rng.normal(out.post_means(m, j), out.post_sd) - shift) / scale;
    calib.centers.row(m) = draws.colwise().mean();
    calib.draws.push_back(std::move(draws));
  }
  calib.weights = unit_weights(m_sets);
  return out;
}

}  // namespace

TEST_SUITE("optimize") {

TEST_CASE("objective hand values") {
  SUBCASE("point masses at their targets score zero under the identity") {
    CalibrationSet calib;
    const int m_sets = 3, n_draws = 4, dim = 2;
    calib.thetas.resize(m_sets, dim);
    calib.centers.resize(m_sets, dim);
    calib.datasets.resize(m_sets, Dataset::Zero(1, 1));
    for (int m = 0; m < m_sets; ++m) {
      for (int j = 0; j < dim; ++j) calib.thetas(m, j) = 0.5 * m + j;
      DrawMatrix draws(n_draws, dim);
      for (int i = 0; i < n_draws; ++i) draws.row(i) = calib.thetas.row(m);
      calib.centers.row(m) = draws.colwise().mean();
      calib.draws.push_back(draws);
    }
    calib.weights = unit_weights(m_sets);
    const auto eval = objective(identity_params(dim, false), calib, calib.weights,
                                fixed_score(n_draws), PenaltyConfig{});
    CHECK(eval.value == doctest::Approx(0.0));
    for (Eigen::Index m = 0; m < m_sets; ++m)
      CHECK(eval.per_dataset_scores(m) == doctest::Approx(0.0));
  }

  SUBCASE("single dataset {0,2} vs theta 1 scores zero with swap permutation") {
    CalibrationSet calib;
    calib.thetas = Eigen::MatrixXd::Constant(1, 1, 1.0);
    DrawMatrix draws(2, 1);
    draws << 0.0, 2.0;
    calib.centers = Eigen::MatrixXd::Constant(1, 1, 1.0);
    calib.draws.push_back(draws);
    calib.datasets.resize(1, Dataset::Zero(1, 1));
    calib.weights = unit_weights(1);
    ScoreConfig cfg;
    cfg.beta = 1.0;
    cfg.permutation = {1, 0};
    const auto eval =
        objective(identity_params(1, false), calib, calib.weights, cfg, PenaltyConfig{});
    CHECK(eval.value == doctest::Approx(0.0));
  }

  SUBCASE("doubling the weights doubles the value at zero penalty") {
    Rng rng(12);
    auto calib = synthetic_set(5, 20, 2, 0.0, 1.0, rng).calib;
    const auto cfg = fixed_score(20);
    TransformParams p = identity_params(2, false);
    p.values(0) = 0.3;
    const auto once = objective(p, calib, calib.weights, cfg, PenaltyConfig{});
    const WeightVector doubled = 2.0 * calib.weights;
    const auto twice = objective(p, calib, doubled, cfg, PenaltyConfig{});
    CHECK(twice.value == doctest::Approx(2.0 * once.value).epsilon(1e-12));
  }

  SUBCASE("value decomposes as weighted scores minus penalty") {
    Rng rng(19);
    auto calib = synthetic_set(4, 15, 2, 0.2, 1.1, rng).calib;
    WeightVector w(4);
    w << 0.5, 1.5, 2.0, 0.25;
    PenaltyConfig pen;
    pen.lambda = 0.05;
    TransformParams p = identity_params(2, false);
    for (Eigen::Index i = 0; i < p.values.size(); ++i) p.values(i) = 0.1 * rng.normal();
    const auto eval = objective(p, calib, w, fixed_score(15), pen);
    double recomputed = -penalty(p, pen);
    for (Eigen::Index m = 0; m < 4; ++m) recomputed += w(m) * eval.per_dataset_scores(m);
    CHECK(eval.value == doctest::Approx(recomputed).epsilon(1e-12));
  }
}

TEST_CASE("objective is invariant to permuting datasets with their weights") {
  Rng rng(31);
  auto calib = synthetic_set(6, 12, 2, 0.3, 1.2, rng).calib;
  WeightVector w(6);
  for (Eigen::Index i = 0; i < 6; ++i) w(i) = 0.5 + static_cast<double>(i);
  const auto cfg = fixed_score(12);
  TransformParams p = identity_params(2, false);
  p.values(1) = -0.2;
  const double base = objective(p, calib, w, cfg, PenaltyConfig{}).value;

  const std::vector<int> order{3, 0, 5, 1, 4, 2};
  CalibrationSet shuffled = calib;
  WeightVector w_shuffled(6);
  for (int i = 0; i < 6; ++i) {
    shuffled.thetas.row(i) = calib.thetas.row(order[static_cast<std::size_t>(i)]);
    shuffled.centers.row(i) = calib.centers.row(order[static_cast<std::size_t>(i)]);
    shuffled.draws[static_cast<std::size_t>(i)] =
        calib.draws[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
    w_shuffled(i) = w(order[static_cast<std::size_t>(i)]);
  }
  const double permuted = objective(p, shuffled, w_shuffled, cfg, PenaltyConfig{}).value;
  CHECK(permuted == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("nelder-mead maximizes a smooth concave function") {
  auto f = [](const Eigen::VectorXd& x) {
    const double a = x(0) - 1.5;
    const double b = x(1) + 0.75;
    return -(a * a + 2.0 * b * b);
  };
  NelderMeadOptions opts;
  opts.tolerance = 1e-12;
  const auto result = nelder_mead_maximize(f, Eigen::VectorXd::Zero(2), opts);
  CHECK(result.converged);
  CHECK(result.x(0) == doctest::Approx(1.5).epsilon(1e-4));
  CHECK(result.x(1) == doctest::Approx(-0.75).epsilon(1e-4));
  CHECK(result.value == doctest::Approx(0.0).epsilon(1e-8));
}

TEST_CASE("nelder-mead best value is monotone in the iteration budget") {
  auto f = [](const Eigen::VectorXd& x) {
    return -(x(0) * x(0) + std::abs(x(1) - 2.0) + 0.5 * x(2) * x(2));
  };
  Eigen::VectorXd x0(3);
  x0 << 3.0, -1.0, 2.0;
  double previous = -std::numeric_limits<double>::infinity();
  for (const int budget : {1, 3, 10, 30, 100, 300}) {
    NelderMeadOptions opts;
    opts.max_iterations = budget;
    const double value = nelder_mead_maximize(f, x0, opts).value;
    CHECK(value >= previous - 1e-15);
    previous = value;
  }
}

TEST_CASE("maximize on the null case recovers a near-identity transform") {
  Rng rng(101);
  const auto set = synthetic_set(400, 100, 2, 0.0, 1.0, rng);
  const auto result = maximize(set.calib, set.calib.weights, fixed_score(100),
                               PenaltyConfig{}, OptimizerConfig{}, false);
  CHECK(result.objective_value >= result.identity_objective);
  CHECK(result.transform.shift.lpNorm<Eigen::Infinity>() < 0.1 * set.post_sd);
  CHECK((result.transform.scale - Eigen::MatrixXd::Identity(2, 2))
            .lpNorm<Eigen::Infinity>() < 0.15);
}

TEST_CASE("maximize undoes a known location-scale distortion") {
  // Draws are (posterior draw - 0.5) / 1.5; the pushforward should restore
  // the posterior location and scale within 10%.
  Rng rng(202);
  const double shift = 0.5, scale = 1.5;
  const auto set = synthetic_set(300, 100, 1, shift, scale, rng, 4.0);
  const auto result = maximize(set.calib, set.calib.weights, fixed_score(100),
                               PenaltyConfig{}, OptimizerConfig{}, false);
  CHECK(result.improved);

  double mean_rel_err = 0.0, sd_rel_err = 0.0;
  for (Eigen::Index m = 0; m < set.calib.size(); ++m) {
    const DrawMatrix pushed =
        pushforward_with_center(result.transform,
                                set.calib.draws[static_cast<std::size_t>(m)],
                                set.calib.centers.row(m));
    mean_rel_err += std::abs(pushed.col(0).mean() - set.post_means(m, 0)) /
                    std::abs(set.post_means(m, 0));
    sd_rel_err += std::abs(sample_sd(pushed.col(0)) - set.post_sd) / set.post_sd;
  }
  mean_rel_err /= static_cast<double>(set.calib.size());
  sd_rel_err /= static_cast<double>(set.calib.size());
  CHECK(mean_rel_err < 0.10);
  CHECK(sd_rel_err < 0.10);
}

TEST_CASE("maximize is deterministic") {
  Rng rng1(55), rng2(55);
  auto calib1 = synthetic_set(10, 30, 2, 0.2, 1.3, rng1).calib;
  auto calib2 = synthetic_set(10, 30, 2, 0.2, 1.3, rng2).calib;
  const auto r1 = maximize(calib1, calib1.weights, fixed_score(30), PenaltyConfig{},
                           OptimizerConfig{}, false);
  const auto r2 = maximize(calib2, calib2.weights, fixed_score(30), PenaltyConfig{},
                           OptimizerConfig{}, false);
  CHECK(r1.objective_value == r2.objective_value);
  CHECK((r1.params.values - r2.params.values).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK(r1.iterations == r2.iterations);
}

TEST_CASE("argmax is invariant to positive weight rescaling") {
  Rng rng(66);
  auto calib = synthetic_set(8, 25, 1, 0.3, 1.2, rng).calib;
  const auto cfg = fixed_score(25);
  const auto base = maximize(calib, calib.weights, cfg, PenaltyConfig{},
                             OptimizerConfig{}, false);
  const WeightVector scaled = 7.0 * calib.weights;
  const auto rescaled = maximize(calib, scaled, cfg, PenaltyConfig{},
                                 OptimizerConfig{}, false);
  // The search trajectory is scale-equivariant; only the absolute stopping
  // rule shifts the termination point, so the argmax agrees to tight
  // tolerance rather than bit-exactly.
  CHECK((base.params.values - rescaled.params.values).lpNorm<Eigen::Infinity>() < 1e-4);
  CHECK(rescaled.objective_value ==
        doctest::Approx(7.0 * base.objective_value).epsilon(1e-6));
}

TEST_CASE("zero weights outside one dataset reduce to that dataset's objective") {
  Rng rng(88);
  auto calib = synthetic_set(5, 30, 1, 0.4, 1.5, rng).calib;
  WeightVector w = WeightVector::Zero(5);
  w(2) = 1.0;
  const auto cfg = fixed_score(30);
  TransformParams p = identity_params(1, false);
  p.values(0) = 0.25;
  const auto full = objective(p, calib, w, cfg, PenaltyConfig{});

  CalibrationSet single;
  single.thetas = calib.thetas.row(2);
  single.centers = calib.centers.row(2);
  single.draws.push_back(calib.draws[2]);
  single.datasets.push_back(calib.datasets[2]);
  single.weights = unit_weights(1);
  const auto one = objective(p, single, single.weights, cfg, PenaltyConfig{});
  CHECK(full.value == doctest::Approx(one.value).epsilon(1e-12));
}

TEST_CASE("maximize returns the identity with a warning when nothing improves") {
  // Point masses exactly on their targets: the identity already scores the
  // maximum possible value of zero, so no candidate can improve on it.
  CalibrationSet calib;
  const int m_sets = 2, n_draws = 3;
  calib.thetas.resize(m_sets, 1);
  calib.thetas << 1.0, 2.0;
  calib.centers.resize(m_sets, 1);
  for (int m = 0; m < m_sets; ++m) {
    DrawMatrix draws = DrawMatrix::Constant(n_draws, 1, calib.thetas(m, 0));
    calib.centers(m, 0) = calib.thetas(m, 0);
    calib.draws.push_back(draws);
  }
  calib.datasets.resize(m_sets, Dataset::Zero(1, 1));
  calib.weights = unit_weights(m_sets);

  OptimizerConfig cfg;
  cfg.restarts = 1;
  const auto result =
      maximize(calib, calib.weights, fixed_score(n_draws), PenaltyConfig{}, cfg, false);
  CHECK_FALSE(result.improved);
  CHECK(result.objective_value == doctest::Approx(result.identity_objective));
  CHECK(result.transform.shift.lpNorm<Eigen::Infinity>() == 0.0);
  CHECK((result.transform.scale - Eigen::MatrixXd::Identity(1, 1))
            .lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("config validation") {
  OptimizerConfig bad;
  bad.tolerance = 0.0;
  CHECK_THROWS(bad.validate());
  bad = OptimizerConfig{};
  bad.max_iterations = 0;
  CHECK_THROWS(bad.validate());
}

}  // TEST_SUITE
