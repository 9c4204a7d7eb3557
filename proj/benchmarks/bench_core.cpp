#include <benchmark/benchmark.h>

#include "scorecal/models.hpp"
#include "scorecal/optimize.hpp"
#include "scorecal/pipeline.hpp"

using namespace scorecal;

namespace {

DrawMatrix gaussian_draws(int n, int d, Rng& rng) {
  DrawMatrix out(n, d);
  for (Eigen::Index i = 0; i < out.size(); ++i) out(i) = rng.normal();
  return out;
}

CalibrationSet synthetic_calibration(int m_sets, int n_draws, int dim) {
  Rng rng(1234);
  CalibrationSet calib;
  calib.thetas.resize(m_sets, dim);
  calib.centers.resize(m_sets, dim);
  calib.datasets.resize(static_cast<std::size_t>(m_sets), Dataset::Zero(1, 1));
  for (int m = 0; m < m_sets; ++m) {
    for (int j = 0; j < dim; ++j) calib.thetas(m, j) = rng.normal();
    DrawMatrix draws(n_draws, dim);
    for (int i = 0; i < n_draws; ++i)
      for (int j = 0; j < dim; ++j) draws(i, j) = rng.normal(calib.thetas(m, j), 1.0);
    calib.centers.row(m) = draws.colwise().mean();
    calib.draws.push_back(std::move(draws));
  }
  calib.weights = unit_weights(m_sets);
  return calib;
}

void BM_EnergyScorePerm(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng(7);
  const DrawMatrix samples = gaussian_draws(n, 3, rng);
  const ParamVector theta = ParamVector::Zero(3);
  ScoreConfig cfg;
  cfg.permutation = random_permutation(n, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(energy_score_perm(samples, theta, cfg));
  }
}
BENCHMARK(BM_EnergyScorePerm)->Arg(100)->Arg(1000);

void BM_EnergyScoreOracle(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng(7);
  const DrawMatrix samples = gaussian_draws(n, 3, rng);
  const ParamVector theta = ParamVector::Zero(3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(energy_score_oracle(samples, theta, 1.0));
  }
}
BENCHMARK(BM_EnergyScoreOracle)->Arg(100)->Arg(400);

void BM_Pushforward(benchmark::State& state) {
  Rng rng(9);
  const DrawMatrix draws = gaussian_draws(static_cast<int>(state.range(0)), 3, rng);
  MomentTransform t = MomentTransform::identity(3);
  t.shift << 0.1, -0.2, 0.3;
  t.scale(1, 0) = 0.5;
  t.scale(2, 2) = 1.4;
  for (auto _ : state) {
    benchmark::DoNotOptimize(pushforward(t, draws));
  }
}
BENCHMARK(BM_Pushforward)->Arg(100)->Arg(1000);

void BM_Objective(benchmark::State& state) {
  const auto calib = synthetic_calibration(100, 100, 3);
  Rng rng(11);
  ScoreConfig cfg;
  cfg.permutation = random_permutation(100, rng);
  const auto params = identity_params(3, false);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        objective(params, calib, calib.weights, cfg, PenaltyConfig{}).value);
  }
}
BENCHMARK(BM_Objective);

void BM_Maximize(benchmark::State& state) {
  const auto calib = synthetic_calibration(40, 60, 2);
  Rng rng(13);
  ScoreConfig cfg;
  cfg.permutation = random_permutation(60, rng);
  OptimizerConfig opt;
  opt.restarts = 0;
  opt.max_iterations = 400;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        maximize(calib, calib.weights, cfg, PenaltyConfig{}, opt, false).objective_value);
  }
}
BENCHMARK(BM_Maximize);

void BM_RwmGaussianPosterior(benchmark::State& state) {
  GaussianModelConfig cfg;
  Rng data_rng(15);
  const auto model = make_gaussian_model(cfg);
  const Dataset data = model.simulate(ParamVector::Constant(1, 1.0), data_rng);
  auto target = [&](const ParamVector& u) {
    double ll = 0.0;
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
      const double r = data(i, 0) - u(0);
      ll -= 0.5 * r * r;
    }
    return ll - 0.5 * u(0) * u(0) / 16.0;
  };
  RWMConfig mcmc;
  mcmc.iterations = 2500;
  mcmc.burn_in = 500;
  mcmc.thin = 2;
  for (auto _ : state) {
    Rng rng(17);
    benchmark::DoNotOptimize(rwm_sample(target, ParamVector::Zero(1), mcmc, rng));
  }
}
BENCHMARK(BM_RwmGaussianPosterior);

void BM_CalibratePipeline(benchmark::State& state) {
  GaussianModelConfig mcfg;
  const auto model = make_gaussian_model(mcfg);
  Rng data_rng(19);
  const Dataset observed = model.simulate(ParamVector::Constant(1, 1.0), data_rng);
  CalibrationConfig cfg;
  cfg.calibration_sets = 50;
  cfg.draws_per_set = 50;
  cfg.seed = 21;
  for (auto _ : state) {
    benchmark::DoNotOptimize(calibrate(model, observed, cfg).optimizer.objective);
  }
}
BENCHMARK(BM_CalibratePipeline);

}  // namespace

BENCHMARK_MAIN();
