#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "scorecal/rng.hpp"
#include "scorecal/weights.hpp"

using namespace scorecal;

namespace {

double normal_logpdf(double x, double mean, double sd) {
  const double z = (x - mean) / sd;
  return -0.918938533204672741780329736406 - std::log(sd) - 0.5 * z * z;
}

WeightVector vec(std::initializer_list<double> values) {
  WeightVector w(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (const double v : values) w(i++) = v;
  return w;
}

}  // namespace

TEST_SUITE("weights") {

TEST_CASE("raw weights from density ratios") {
  Eigen::MatrixXd thetas(3, 1);
  thetas << -1.0, 0.0, 2.0;
  std::vector<Dataset> datasets(3, Dataset::Zero(1, 1));

  SUBCASE("identical densities give unit weights") {
    auto lp = [](const ParamVector& u) { return normal_logpdf(u(0), 0.0, 1.0); };
    const auto w = raw_weights(lp, lp, Stabilizer::unit(), thetas, datasets);
    for (Eigen::Index i = 0; i < 3; ++i) CHECK(w(i) == doctest::Approx(1.0));
  }
  SUBCASE("constant log ratio of log 2 gives weight 2 everywhere") {
    auto lp = [](const ParamVector& u) { return normal_logpdf(u(0), 0.0, 1.0); };
    auto li = [&](const ParamVector& u) {
      return normal_logpdf(u(0), 0.0, 1.0) - std::log(2.0);
    };
    const auto w = raw_weights(lp, li, Stabilizer::unit(), thetas, datasets);
    for (Eigen::Index i = 0; i < 3; ++i) CHECK(w(i) == doctest::Approx(2.0));
  }
  SUBCASE("N(0,1) over N(0,4) at the origin is 2") {
    Eigen::MatrixXd origin(1, 1);
    origin << 0.0;
    std::vector<Dataset> one(1, Dataset::Zero(1, 1));
    auto lp = [](const ParamVector& u) { return normal_logpdf(u(0), 0.0, 1.0); };
    auto li = [](const ParamVector& u) { return normal_logpdf(u(0), 0.0, 2.0); };
    const auto w = raw_weights(lp, li, Stabilizer::unit(), origin, one);
    CHECK(w(0) == doctest::Approx(2.0));
  }
  SUBCASE("non-finite log density names the offending index") {
    auto lp = [](const ParamVector& u) {
      return u(0) == 2.0 ? std::numeric_limits<double>::infinity()
                         : normal_logpdf(u(0), 0.0, 1.0);
    };
    auto li = [](const ParamVector& u) { return normal_logpdf(u(0), 0.0, 1.0); };
    CHECK_THROWS_WITH_AS(raw_weights(lp, li, Stabilizer::unit(), thetas, datasets),
                         "raw_weights: non-finite prior log-density at index 2",
                         std::runtime_error);
  }
  SUBCASE("stabilizer multiplies the ratio") {
    auto lp = [](const ParamVector& u) { return normal_logpdf(u(0), 0.0, 1.0); };
    Stabilizer stab;
    stab.fn = [](const Dataset& d) { return 3.0 + d(0, 0); };
    const auto w = raw_weights(lp, lp, stab, thetas, datasets);
    for (Eigen::Index i = 0; i < 3; ++i) CHECK(w(i) == doctest::Approx(3.0));
  }
}

TEST_CASE("clipping") {
  const auto w = vec({1, 2, 3, 4});
  SUBCASE("alpha 0 keeps the weights") {
    const auto out = clip_weights(w, 0.0);
    CHECK((out - w).lpNorm<Eigen::Infinity>() == 0.0);
  }
  SUBCASE("alpha 1 clips everything to the minimum") {
    const auto out = clip_weights(w, 1.0);
    for (Eigen::Index i = 0; i < 4; ++i) CHECK(out(i) == doctest::Approx(1.0));
  }
  SUBCASE("alpha 0.5 clips at the interpolated median 2.5") {
    const auto out = clip_weights(w, 0.5);
    CHECK(out(0) == doctest::Approx(1.0));
    CHECK(out(1) == doctest::Approx(2.0));
    CHECK(out(2) == doctest::Approx(2.5));
    CHECK(out(3) == doctest::Approx(2.5));
  }
  SUBCASE("alpha outside [0,1] is rejected") {
    CHECK_THROWS(clip_weights(w, -0.01));
    CHECK_THROWS(clip_weights(w, 1.01));
  }
  SUBCASE("clip never increases a weight and preserves order among survivors") {
    Rng rng(6);
    WeightVector random(31);
    for (Eigen::Index i = 0; i < random.size(); ++i)
      random(i) = std::exp(rng.normal());
    for (const double alpha : {0.0, 0.1, 0.37, 0.8, 1.0}) {
      const auto out = clip_weights(random, alpha);
      for (Eigen::Index i = 0; i < random.size(); ++i) {
        CHECK(out(i) <= random(i) + 1e-15);
        for (Eigen::Index j = 0; j < random.size(); ++j) {
          if (random(i) < random(j)) CHECK(out(i) <= out(j) + 1e-15);
        }
      }
    }
  }
}

TEST_CASE("unit weights") {
  const auto w = unit_weights(3);
  CHECK(w.size() == 3);
  CHECK(w.minCoeff() == 1.0);
  CHECK(w.maxCoeff() == 1.0);
  CHECK(unit_weights(1).size() == 1);
  CHECK_THROWS(unit_weights(0));

  // Normalized full clipping is exactly normalized unit weights.
  const auto clipped = clip_weights(vec({5, 1, 7, 3}), 1.0);
  const WeightVector normalized = clipped / clipped.sum();
  const WeightVector units = unit_weights(4) / 4.0;
  CHECK((normalized - units).lpNorm<Eigen::Infinity>() < 1e-15);
}

TEST_CASE("weight validation") {
  CHECK_THROWS(validate_weights(vec({0, 0, 0})));
  CHECK_THROWS(validate_weights(vec({1, -0.5})));
  WeightVector bad(2);
  bad << 1.0, std::numeric_limits<double>::infinity();
  CHECK_THROWS(validate_weights(bad));
  CHECK_NOTHROW(validate_weights(vec({0, 2, 0})));
}

TEST_CASE("unit-weight error shrinks with sample size (stabilized ratio)") {
  // Conjugate Gaussian setup: prior N(0, 16), importance N(1, 4),
  // v = g(theta*_n) with g = importance/prior and theta*_n the
  // posterior-mean estimator. |1 - w| should fall as n grows.
  const double sigma0 = 4.0, import_mean = 1.0, import_sd = 2.0;
  auto log_prior = [&](double x) { return normal_logpdf(x, 0.0, sigma0); };
  auto log_import = [&](double x) { return normal_logpdf(x, import_mean, import_sd); };

  Rng rng(77);
  const int pairs = 200;
  const std::vector<int> sizes{10, 100, 1000};
  std::vector<double> mean_abs_err(sizes.size(), 0.0);

  for (int p = 0; p < pairs; ++p) {
    const double theta = rng.normal(import_mean, import_sd);
    std::vector<double> data(1000);
    double running_sum = 0.0;
    for (int i = 0; i < 1000; ++i) data[static_cast<std::size_t>(i)] = rng.normal(theta, 1.0);
    for (std::size_t s = 0; s < sizes.size(); ++s) {
      const int n = sizes[s];
      running_sum = 0.0;
      for (int i = 0; i < n; ++i) running_sum += data[static_cast<std::size_t>(i)];
      const double theta_star =
          running_sum / (1.0 / (sigma0 * sigma0) + static_cast<double>(n));
      const double log_w = log_prior(theta) - log_import(theta) +
                           log_import(theta_star) - log_prior(theta_star);
      mean_abs_err[s] += std::abs(1.0 - std::exp(log_w));
    }
  }
  for (auto& e : mean_abs_err) e /= pairs;
  CHECK(mean_abs_err[0] > mean_abs_err[1]);
  CHECK(mean_abs_err[1] > mean_abs_err[2]);
}

}  // TEST_SUITE
