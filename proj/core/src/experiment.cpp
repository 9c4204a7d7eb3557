#include "scorecal/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <set>
#include <stdexcept>

#include "scorecal/stats.hpp"

namespace scorecal {

namespace {

// A type-checked view over one model's override section; unknown keys are
// field-level configuration errors.
class Overrides {
 public:
  Overrides(const RunConfig& cfg, const std::string& section) {
    const auto it = cfg.sections.find(section);
    if (it != cfg.sections.end()) values_ = it->second;
  }

  double number(const std::string& key, double fallback) {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    seen_.insert(it->first);
    return it->second;
  }

  int integer(const std::string& key, int fallback) {
    return static_cast<int>(number(key, fallback));
  }

  bool flag(const std::string& key, bool fallback) {
    return number(key, fallback ? 1.0 : 0.0) != 0.0;
  }

  void reject_unknown(const std::string& section) const {
    for (const auto& [key, value] : values_) {
      (void)value;
      if (seen_.find(key) == seen_.end())
        throw std::invalid_argument("config: unknown key '" + key + "' in section [" +
                                    section + "]");
    }
  }

 private:
  std::map<std::string, double> values_;
  std::set<std::string> seen_;
};

}  // namespace

void RunConfig::validate() const {
  if (calibration_sets < 2)
    throw std::invalid_argument("config: m must be at least 2");
  if (draws < 2) throw std::invalid_argument("config: n must be at least 2");
  if (alpha < 0.0 || alpha > 1.0)
    throw std::invalid_argument("config: alpha outside [0,1]");
  if (!(beta > 0.0 && beta < 2.0))
    throw std::invalid_argument("config: beta outside (0,2)");
  if (!(inflate > 0.0)) throw std::invalid_argument("config: inflate must be positive");
  if (replicates < 1) throw std::invalid_argument("config: replicates must be at least 1");
  if (workers < 1) throw std::invalid_argument("config: workers must be at least 1");
}

BuiltModel build_model(const RunConfig& cfg) {
  cfg.validate();
  Overrides ov(cfg, cfg.model);
  BuiltModel built;

  if (cfg.model == "gaussian") {
    GaussianModelConfig m;
    m.n_obs = ov.integer("n_obs", m.n_obs);
    m.sigma = ov.number("sigma", m.sigma);
    m.mu0 = ov.number("mu0", m.mu0);
    m.sigma0 = ov.number("sigma0", m.sigma0);
    m.true_mu = ov.number("true_mu", m.true_mu);
    m.error_mu_mean = ov.number("error_mu_mean", m.error_mu_mean);
    m.error_mu_sd = ov.number("error_mu_sd", m.error_mu_sd);
    m.error_sigma_mean = ov.number("error_sigma_mean", m.error_sigma_mean);
    m.error_sigma_sd = ov.number("error_sigma_sd", m.error_sigma_sd);
    m.perturb = ov.flag("perturb", m.perturb);
    built.spec = make_gaussian_model(m);
    built.true_params = ParamVector::Constant(1, m.true_mu);
    built.diagonal_transform = false;
  } else if (cfg.model == "ou1d" || cfg.model == "ou2d") {
    OUModelConfig m;
    if (cfg.model == "ou2d") m.x0 = 5.0;
    m.x0 = ov.number("x0", m.x0);
    m.gamma = ov.number("gamma", m.gamma);
    m.horizon = ov.number("horizon", m.horizon);
    m.n_obs = ov.integer("n_obs", m.n_obs);
    m.true_mu = ov.number("true_mu", m.true_mu);
    m.true_sigma2 = ov.number("true_sigma2", m.true_sigma2);
    m.prior_mu_sd = ov.number("prior_mu_sd", m.prior_mu_sd);
    m.prior_d_rate = ov.number("prior_d_rate", m.prior_d_rate);
    m.mcmc_burn_in = ov.integer("mcmc_burn_in", m.mcmc_burn_in);
    m.mcmc_thin = ov.integer("mcmc_thin", m.mcmc_thin);
    m.mcmc_initial_scale = ov.number("mcmc_initial_scale", m.mcmc_initial_scale);
    if (cfg.model == "ou1d") {
      built.spec = make_ou1d_model(m);
      built.true_params = ParamVector(2);
      built.true_params << m.true_mu, m.true_d();
      // The univariate example corrects each parameter independently.
      built.diagonal_transform = true;
    } else {
      m.true_rho = ov.number("true_rho", m.true_rho);
      m.surrogate_fit_draws = ov.integer("surrogate_fit_draws", m.surrogate_fit_draws);
      built.spec = make_ou2d_model(m);
      built.true_params = ParamVector(3);
      built.true_params << m.true_mu, m.true_d(), m.true_rho;
      built.diagonal_transform = false;
    }
  } else {
    throw std::invalid_argument("config: unknown model '" + cfg.model +
                                "' (expected gaussian, ou1d or ou2d; custom models are "
                                "registered through the library API)");
  }

  built.diagonal_transform = ov.flag("diagonal", built.diagonal_transform);
  built.penalty_lambda = ov.number("penalty_lambda", 0.0);
  ov.reject_unknown(cfg.model);
  return built;
}

std::string method_label_adjust(double alpha) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "adjust(%g)", alpha);
  return buf;
}

ExperimentOutcome run_experiment(
    const RunConfig& cfg, const std::function<void(const ReplicateOutcome&)>& sink) {
  const BuiltModel built = build_model(cfg);
  const auto& names = built.spec.param_names;
  const int replicates = cfg.replicates;

  // Replicates are parallelized at this level; a multi-replicate run keeps
  // the inner pipeline sequential so the worker budget is not oversubscribed.
  const int outer_workers = std::min(cfg.workers, replicates);
  const int inner_workers = replicates == 1 ? cfg.workers : 1;

  std::vector<DrawMatrix> approx_runs(static_cast<std::size_t>(replicates));
  std::vector<DrawMatrix> adjusted_runs(static_cast<std::size_t>(replicates));
  std::vector<DrawMatrix> true_runs;
  const bool has_true = built.spec.has_true_posterior();
  if (has_true) true_runs.resize(static_cast<std::size_t>(replicates));
  std::vector<CoverageCurve> curves(static_cast<std::size_t>(replicates));

  std::mutex sink_mutex;

  parallel_for(replicates, outer_workers, [&](int k) {
    try {
      Rng data_rng(substream_seed(cfg.seed, 2 * static_cast<std::uint64_t>(k)));
      const Dataset observed = built.spec.simulate(built.true_params, data_rng);

      CalibrationConfig ccfg;
      ccfg.calibration_sets = cfg.calibration_sets;
      ccfg.draws_per_set = cfg.draws;
      ccfg.alpha = cfg.alpha;
      ccfg.beta = cfg.beta;
      ccfg.inflation = cfg.inflate;
      ccfg.diagonal_transform = built.diagonal_transform;
      ccfg.penalty.lambda = built.penalty_lambda;
      ccfg.workers = inner_workers;
      ccfg.seed = substream_seed(cfg.seed, 2 * static_cast<std::uint64_t>(k) + 1);

      ReplicateOutcome outcome;
      outcome.index = k;
      outcome.result = calibrate(built.spec, observed, ccfg);
      if (has_true) {
        FittedPosterior truth = built.spec.fit_true(observed, data_rng);
        outcome.true_draws = built.spec.bijections.rows_to_constrained(
            truth.sample(cfg.draws, data_rng));
      }
      outcome.coverage = coverage_curve(outcome.result.calibration_thetas,
                                        outcome.result.calibration_adjusted, names);

      approx_runs[static_cast<std::size_t>(k)] = outcome.result.approx_draws;
      adjusted_runs[static_cast<std::size_t>(k)] = outcome.result.adjusted_draws;
      if (has_true) true_runs[static_cast<std::size_t>(k)] = outcome.true_draws;
      curves[static_cast<std::size_t>(k)] = outcome.coverage;

      if (sink) {
        std::lock_guard<std::mutex> lock(sink_mutex);
        sink(outcome);
      }
    } catch (const std::invalid_argument&) {
      throw;  // configuration problems keep their field-level message
    } catch (const std::exception& e) {
      throw std::runtime_error("replicate " + std::to_string(k) + ": " + e.what());
    }
  });

  ExperimentOutcome outcome;
  outcome.param_names = names;
  outcome.summary.push_back({"approx", summarize(approx_runs, built.true_params, names)});
  outcome.summary.push_back(
      {method_label_adjust(cfg.alpha), summarize(adjusted_runs, built.true_params, names)});
  if (has_true)
    outcome.summary.push_back({"true", summarize(true_runs, built.true_params, names)});
  outcome.coverage = average_coverage(curves);
  return outcome;
}

}  // namespace scorecal
