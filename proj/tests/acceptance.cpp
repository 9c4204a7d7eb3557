// Acceptance suite: end-to-end checks of the calibration pipeline against the
// pinned experiment targets. Each criterion prints one PASS/FAIL line per
// sub-check and a summary line; the process exits nonzero if anything failed.
//
// Usage: acceptance_tests [criterion]   (no argument runs all six)

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "scorecal/experiment.hpp"
#include "scorecal/io.hpp"
#include "scorecal/stats.hpp"

using namespace scorecal;
namespace fs = std::filesystem;

namespace {

struct Checker {
  int failures = 0;
  int checks = 0;

  void require(const std::string& name, bool pass, const std::string& detail) {
    ++checks;
    if (!pass) ++failures;
    std::printf("[%s] %s: %s\n", pass ? "PASS" : "FAIL", name.c_str(), detail.c_str());
    std::fflush(stdout);
  }

  void in_range(const std::string& name, double value, double lo, double hi) {
    char detail[160];
    std::snprintf(detail, sizeof(detail), "%.4f in [%.4f, %.4f]", value, lo, hi);
    require(name, value >= lo && value <= hi, detail);
  }

  void at_most(const std::string& name, double value, double bound) {
    char detail[160];
    std::snprintf(detail, sizeof(detail), "%.4f <= %.4f", value, bound);
    require(name, value <= bound, detail);
  }

  void at_least(const std::string& name, double value, double bound) {
    char detail[160];
    std::snprintf(detail, sizeof(detail), "%.4f >= %.4f", value, bound);
    require(name, value >= bound, detail);
  }
};

const SummaryMetrics& find_method(const ExperimentOutcome& outcome,
                                  const std::string& method) {
  for (const auto& entry : outcome.summary) {
    if (entry.method == method) return entry.metrics;
  }
  throw std::runtime_error("method row missing: " + method);
}

double pair_correlation(const SummaryMetrics& metrics, int a, int b) {
  for (std::size_t k = 0; k < metrics.pair_indices.size(); ++k) {
    if (metrics.pair_indices[k] == std::pair<int, int>{a, b})
      return metrics.pair_correlations[k];
  }
  throw std::runtime_error("parameter pair missing");
}

// --- criterion 1: conjugate Gaussian table reproduction -------------------

void criterion_gaussian(Checker& c) {
  RunConfig cfg;
  cfg.model = "gaussian";
  cfg.calibration_sets = 100;
  cfg.draws = 100;
  cfg.alpha = 1.0;
  cfg.replicates = 100;
  cfg.seed = 101;
  const auto outcome = run_experiment(cfg);

  const auto& approx = find_method(outcome, "approx").parameters[0];
  const auto& adjust = find_method(outcome, "adjust(1)").parameters[0];
  const auto& truth = find_method(outcome, "true").parameters[0];

  c.in_range("1 gaussian approx bias", approx.bias, -0.74, -0.54);
  c.at_most("1 gaussian approx coverage", approx.coverage90, 0.35);
  c.in_range("1 gaussian adjust(1) mse", adjust.mse, 0.08, 0.20);
  c.in_range("1 gaussian adjust(1) bias", adjust.bias, -0.26, -0.10);
  // Known red: under this design (unit weights, inflation 2, one global
  // location-scale correction) the exact optimum of the objective yields
  // adjusted coverage near 0.74, which closed-form analysis confirms; the
  // pinned floor of 0.90 is not reachable. The check is kept as stated for
  // visibility rather than loosened.
  c.at_least("1 gaussian adjust(1) coverage", adjust.coverage90, 0.90);
  c.in_range("1 gaussian true mse", truth.mse, 0.10, 0.22);
}

// --- criterion 2: univariate OU ---------------------------------------------

void criterion_ou1d(Checker& c) {
  RunConfig cfg;
  cfg.model = "ou1d";
  cfg.calibration_sets = 100;
  cfg.draws = 100;
  cfg.alpha = 1.0;
  cfg.replicates = 100;
  cfg.seed = 202;
  const auto outcome = run_experiment(cfg);

  const auto& approx_mu = find_method(outcome, "approx").parameters[0];
  const auto& adjust_mu = find_method(outcome, "adjust(1)").parameters[0];
  const auto& approx_d = find_method(outcome, "approx").parameters[1];
  const auto& adjust_d = find_method(outcome, "adjust(1)").parameters[1];

  c.at_most("2 ou1d approx mu coverage", approx_mu.coverage90, 0.10);
  c.in_range("2 ou1d approx mu bias", approx_mu.bias, 1.01, 1.41);
  c.at_most("2 ou1d adjust(1) |mu bias|", std::abs(adjust_mu.bias), 0.30);
  c.at_least("2 ou1d adjust(1) mu coverage", adjust_mu.coverage90, 0.60);

  // The D adjustment is expected to be minor; compare the scale-stable
  // metrics (mse, sd, coverage) in relative terms. Bias is excluded: both
  // values sit near zero where a relative comparison is ill-posed.
  auto rel_diff = [](double a, double b) {
    return std::abs(a - b) / std::max(std::abs(a), std::abs(b));
  };
  c.at_most("2 ou1d D mse relative change", rel_diff(approx_d.mse, adjust_d.mse), 0.25);
  c.at_most("2 ou1d D sd relative change", rel_diff(approx_d.sd, adjust_d.sd), 0.25);
  c.at_most("2 ou1d D coverage relative change",
            rel_diff(approx_d.coverage90, adjust_d.coverage90), 0.25);
}

// --- criterion 3: bivariate OU correlation recovery -------------------------

void criterion_ou2d(Checker& c) {
  RunConfig cfg;
  cfg.model = "ou2d";
  cfg.calibration_sets = 100;
  cfg.draws = 100;
  cfg.alpha = 1.0;
  cfg.replicates = 100;
  cfg.seed = 303;
  const auto outcome = run_experiment(cfg);

  // corr(D, rho): parameters are ordered (mu, D, rho).
  const double approx_corr = pair_correlation(find_method(outcome, "approx"), 1, 2);
  const double adjust_corr = pair_correlation(find_method(outcome, "adjust(1)"), 1, 2);
  const double true_corr = pair_correlation(find_method(outcome, "true"), 1, 2);

  c.in_range("3 ou2d mean-field corr(D,rho)", approx_corr, -0.05, 0.05);
  c.at_least("3 ou2d adjust(1) corr(D,rho)", adjust_corr, 0.20);
  c.at_least("3 ou2d true corr at least adjusted", true_corr - adjust_corr, 0.0);
}

// --- criterion 4: diagnostic parity in the null case -------------------------

void criterion_null_parity(Checker& c) {
  RunConfig cfg;
  cfg.model = "gaussian";
  cfg.calibration_sets = 200;
  cfg.draws = 100;
  cfg.alpha = 1.0;
  cfg.replicates = 1;
  cfg.seed = 404;
  cfg.sections["gaussian"]["perturb"] = 0.0;  // approximate sampler == true posterior

  CalibrationResult captured;
  bool got = false;
  run_experiment(cfg, [&](const ReplicateOutcome& outcome) {
    captured = outcome.result;
    got = true;
  });
  c.require("4 null case executed", got, "one replicate with M = 200");

  std::vector<double> grid;
  for (int i = 2; i <= 19; ++i) grid.push_back(0.05 * i);  // 0.10..0.95
  const auto curve = coverage_curve(captured.calibration_thetas,
                                    captured.calibration_adjusted, {"mu"}, grid);
  double worst = 0.0;
  for (std::size_t g = 0; g < grid.size(); ++g)
    worst = std::max(worst,
                     std::abs(curve.parameters[0].coverage[g] - grid[g]));
  c.at_most("4 null-case max |CC(rho) - rho| over grid", worst, 0.10);
}

// --- criterion 5: property suite ---------------------------------------------

void criterion_properties(Checker& c) {
  // (a) permutation estimator equals hand-enumerated values; the average over
  // all permutations matches the double-sum oracle.
  {
    DrawMatrix two(2, 1);
    two << 0.0, 2.0;
    ScoreConfig swap_cfg;
    swap_cfg.beta = 1.0;
    swap_cfg.permutation = {1, 0};
    const double v2 = energy_score_perm(two, ParamVector::Constant(1, 1.0), swap_cfg);
    c.require("5a two-sample hand value", std::abs(v2 - 0.0) < 1e-15,
              "score(0,2 | theta=1) = " + format_number(v2));

    DrawMatrix mass = DrawMatrix::Zero(3, 1);
    ScoreConfig rot_cfg;
    rot_cfg.beta = 1.0;
    rot_cfg.permutation = {2, 0, 1};
    const double v3 = energy_score_perm(mass, ParamVector::Constant(1, -2.5), rot_cfg);
    c.require("5a three-sample hand value", std::abs(v3 + 2.5) < 1e-15,
              "score(0,0,0 | theta=-2.5) = " + format_number(v3));

    DrawMatrix three(3, 2);
    three << 0.3, -1.2, 2.0, 0.4, -0.7, 1.1;
    ParamVector theta(2);
    theta << 0.5, -0.25;
    std::vector<std::int32_t> perm{0, 1, 2};
    double sum = 0.0;
    int count = 0;
    do {
      ScoreConfig cfg;
      cfg.beta = 1.0;
      cfg.permutation = perm;
      sum += energy_score_perm(three, theta, cfg);
      ++count;
    } while (std::next_permutation(perm.begin(), perm.end()));
    const double oracle = energy_score_oracle(three, theta, 1.0);
    c.require("5a all-permutation average equals oracle",
              std::abs(sum / count - oracle) < 1e-12,
              format_number(sum / count) + " vs " + format_number(oracle));
  }

  // (b) pushforward moment identities.
  {
    Rng rng(515);
    DrawMatrix draws(50, 3);
    for (Eigen::Index i = 0; i < draws.size(); ++i) draws(i) = rng.normal();
    MomentTransform t = MomentTransform::identity(3);
    for (Eigen::Index i = 0; i < 3; ++i) {
      t.shift(i) = rng.normal();
      t.scale(i, i) = std::exp(0.4 * rng.normal());
      for (Eigen::Index j = 0; j < i; ++j) t.scale(i, j) = rng.normal();
    }
    const Eigen::VectorXd center = draws.colwise().mean();
    const DrawMatrix out = pushforward(t, draws);
    const double mean_err =
        ((out.colwise().mean().transpose()) - (center + t.shift)).lpNorm<Eigen::Infinity>();
    const double cov_err = (sample_covariance(out) -
                            t.scale * sample_covariance(draws) * t.scale.transpose())
                               .lpNorm<Eigen::Infinity>();
    c.require("5b pushforward mean identity", mean_err < 1e-10, format_number(mean_err));
    c.require("5b pushforward covariance identity", cov_err < 1e-10,
              format_number(cov_err));
  }

  // (c) clipping properties.
  {
    WeightVector w(5);
    w << 2.0, 0.5, 3.5, 1.0, 2.5;
    const auto keep = clip_weights(w, 0.0);
    const auto full = clip_weights(w, 1.0);
    const bool unchanged = (keep - w).lpNorm<Eigen::Infinity>() == 0.0;
    const bool constant = full.maxCoeff() == full.minCoeff();
    const WeightVector lhs = full / full.sum();
    const WeightVector rhs = unit_weights(5) / 5.0;
    c.require("5c clip(w,0) = w", unchanged, "exact");
    c.require("5c clip(w,1) constant", constant, format_number(full.maxCoeff()));
    c.require("5c normalized clip(w,1) = normalized units",
              (lhs - rhs).lpNorm<Eigen::Infinity>() < 1e-15, "exact");
  }

  // (d) optimizer null case and synthetic distortion recovery. Conjugate
  // construction: theta ~ N(prior_mean, 1), one observation y ~ N(theta, 2),
  // posterior N((y + 2 prior_mean)/3, 2/3); draws from that posterior are
  // optionally distorted by (draw - shift)/scale.
  {
    Rng rng(525);
    const double post_sd = std::sqrt(2.0 / 3.0);
    struct SynthSet {
      CalibrationSet calib;
      Eigen::MatrixXd post_means;
    };
    auto make_set = [&](int m_sets, int n_draws, int dim, double shift, double scale,
                        double prior_mean) {
      SynthSet set;
      set.calib.thetas.resize(m_sets, dim);
      set.calib.centers.resize(m_sets, dim);
      set.calib.datasets.resize(static_cast<std::size_t>(m_sets), Dataset::Zero(1, 1));
      set.post_means.resize(m_sets, dim);
      for (int m = 0; m < m_sets; ++m) {
        for (int j = 0; j < dim; ++j) {
          set.calib.thetas(m, j) = rng.normal(prior_mean, 1.0);
          const double y = rng.normal(set.calib.thetas(m, j), std::sqrt(2.0));
          set.post_means(m, j) = (y + 2.0 * prior_mean) / 3.0;
        }
        DrawMatrix draws(n_draws, dim);
        for (int i = 0; i < n_draws; ++i)
          for (int j = 0; j < dim; ++j)
            draws(i, j) = (rng.normal(set.post_means(m, j), post_sd) - shift) / scale;
        set.calib.centers.row(m) = draws.colwise().mean();
        set.calib.draws.push_back(std::move(draws));
      }
      set.calib.weights = unit_weights(m_sets);
      return set;
    };
    ScoreConfig score_cfg;
    score_cfg.beta = 1.0;
    score_cfg.permutation = random_permutation(100, rng);

    const auto null_set = make_set(400, 100, 2, 0.0, 1.0, 0.0);
    const auto null_result = maximize(null_set.calib, null_set.calib.weights, score_cfg,
                                      PenaltyConfig{}, OptimizerConfig{}, false);
    c.at_most("5d null-case |b|_inf vs 0.1 * posterior sd",
              null_result.transform.shift.lpNorm<Eigen::Infinity>(), 0.10 * post_sd);
    c.at_most("5d null-case |L - I|_inf",
              (null_result.transform.scale - Eigen::MatrixXd::Identity(2, 2))
                  .lpNorm<Eigen::Infinity>(),
              0.15);

    const auto skew_set = make_set(300, 100, 1, 0.5, 1.5, 4.0);
    const auto skew_result = maximize(skew_set.calib, skew_set.calib.weights, score_cfg,
                                      PenaltyConfig{}, OptimizerConfig{}, false);
    double mean_rel = 0.0, sd_rel = 0.0;
    for (Eigen::Index m = 0; m < skew_set.calib.size(); ++m) {
      const DrawMatrix pushed =
          pushforward_with_center(skew_result.transform,
                                  skew_set.calib.draws[static_cast<std::size_t>(m)],
                                  skew_set.calib.centers.row(m));
      mean_rel += std::abs(pushed.col(0).mean() - skew_set.post_means(m, 0)) /
                  std::abs(skew_set.post_means(m, 0));
      sd_rel += std::abs(sample_sd(pushed.col(0)) - post_sd) / post_sd;
    }
    mean_rel /= static_cast<double>(skew_set.calib.size());
    sd_rel /= static_cast<double>(skew_set.calib.size());
    c.at_most("5d distortion recovery mean relative error", mean_rel, 0.10);
    c.at_most("5d distortion recovery sd relative error", sd_rel, 0.10);
  }

  // (e) full-pipeline determinism through the CLI, across worker counts.
  {
    const fs::path dir1 = fs::temp_directory_path() / "scorecal_acc_det1";
    const fs::path dir2 = fs::temp_directory_path() / "scorecal_acc_det2";
    fs::remove_all(dir1);
    fs::remove_all(dir2);
    const std::string base = std::string(CALIBRATE_BIN) +
                             " run --model gaussian --replicates 4 --m 30 --n 40"
                             " --seed 77 ";
    const int rc1 =
        std::system((base + "--workers 1 --out " + dir1.string() + " 2>/dev/null").c_str());
    const int rc2 =
        std::system((base + "--workers 2 --out " + dir2.string() + " 2>/dev/null").c_str());
    c.require("5e CLI runs succeed", rc1 == 0 && rc2 == 0,
              "exit codes " + std::to_string(rc1) + ", " + std::to_string(rc2));

    bool identical = true;
    std::string first_diff = "none";
    for (const auto& entry : fs::directory_iterator(dir1)) {
      const auto name = entry.path().filename();
      std::ifstream a(entry.path(), std::ios::binary);
      std::ifstream b(dir2 / name, std::ios::binary);
      std::ostringstream sa, sb;
      sa << a.rdbuf();
      sb << b.rdbuf();
      if (sa.str() != sb.str()) {
        identical = false;
        first_diff = name.string();
        break;
      }
    }
    c.require("5e artifacts byte-identical across worker counts", identical,
              identical ? "all files match" : "first difference: " + first_diff);
  }
}

// --- criterion 6: unit-weight error direction -------------------------------

void criterion_weight_direction(Checker& c) {
  // Conjugate Gaussian: prior N(0, 16); importance N(1, 4); stabilizer
  // v = g(theta*_n) with g = importance density / prior density and theta*_n
  // the posterior-mean estimator. The mean absolute unit-weight error must
  // fall monotonically over n in {10, 100, 1000}.
  const double sigma0 = 4.0, import_mean = 1.0, import_sd = 2.0;
  auto log_normal_pdf = [](double x, double m, double s) {
    const double z = (x - m) / s;
    return -0.918938533204672741780329736406 - std::log(s) - 0.5 * z * z;
  };

  Rng rng(606);
  const int pairs = 500;
  const std::vector<int> sizes{10, 100, 1000};
  std::vector<double> mean_abs(sizes.size(), 0.0);

  for (int p = 0; p < pairs; ++p) {
    const double theta = rng.normal(import_mean, import_sd);
    std::vector<double> data(1000);
    for (int i = 0; i < 1000; ++i)
      data[static_cast<std::size_t>(i)] = rng.normal(theta, 1.0);
    for (std::size_t s = 0; s < sizes.size(); ++s) {
      const int n = sizes[s];
      double sum = 0.0;
      for (int i = 0; i < n; ++i) sum += data[static_cast<std::size_t>(i)];
      const double theta_star = sum / (1.0 / (sigma0 * sigma0) + static_cast<double>(n));
      const double log_w = log_normal_pdf(theta, 0.0, sigma0) -
                           log_normal_pdf(theta, import_mean, import_sd) +
                           log_normal_pdf(theta_star, import_mean, import_sd) -
                           log_normal_pdf(theta_star, 0.0, sigma0);
      mean_abs[s] += std::abs(1.0 - std::exp(log_w));
    }
  }
  for (auto& v : mean_abs) v /= pairs;

  char detail[200];
  std::snprintf(detail, sizeof(detail), "mean |1-w| = %.4f (n=10), %.4f (n=100), %.4f (n=1000)",
                mean_abs[0], mean_abs[1], mean_abs[2]);
  c.require("6 unit-weight error decreases monotonically",
            mean_abs[0] > mean_abs[1] && mean_abs[1] > mean_abs[2], detail);
}

}  // namespace

int main(int argc, char** argv) {
  const int which = argc > 1 ? std::atoi(argv[1]) : 0;
  Checker c;

  struct Entry {
    int id;
    const char* name;
    void (*fn)(Checker&);
  };
  const Entry entries[] = {
      {1, "conjugate gaussian table reproduction", criterion_gaussian},
      {2, "univariate OU adjustment", criterion_ou1d},
      {3, "bivariate OU correlation recovery", criterion_ou2d},
      {4, "null-case diagnostic parity", criterion_null_parity},
      {5, "property suite", criterion_properties},
      {6, "unit-weight error direction", criterion_weight_direction},
  };

  for (const auto& entry : entries) {
    if (which != 0 && which != entry.id) continue;
    const int before = c.failures;
    entry.fn(c);
    std::printf("[%s] criterion %d: %s\n", c.failures == before ? "PASS" : "FAIL",
                entry.id, entry.name);
    std::fflush(stdout);
  }
  std::printf("%d/%d checks passed\n", c.checks - c.failures, c.checks);
  return c.failures == 0 ? 0 : 1;
}
