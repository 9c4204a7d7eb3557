#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "scorecal/common.hpp"
#include "scorecal/rng.hpp"

namespace scorecal {

// ---------------------------------------------------------------------------
// Constrained <-> unconstrained parameter maps
// ---------------------------------------------------------------------------

enum class CoordinateMap {
  Identity,  // theta = u
  Log,       // theta = exp(u), for positive parameters
  Logit,     // theta = 1/(1+exp(-u)), for unit-interval parameters
};

/// Per-coordinate bijections between the constrained model space and the
/// unconstrained space all calibration computation happens in, with the
/// log-Jacobian needed to express prior densities in unconstrained
/// coordinates.
struct BijectionStack {
  std::vector<CoordinateMap> maps;

  Eigen::Index dim() const { return static_cast<Eigen::Index>(maps.size()); }
  ParamVector to_unconstrained(const ParamVector& constrained) const;
  ParamVector to_constrained(const ParamVector& unconstrained) const;
  DrawMatrix rows_to_constrained(const DrawMatrix& unconstrained) const;
  /// log |d theta / d u| evaluated at the unconstrained point.
  double log_jacobian(const ParamVector& unconstrained) const;
};

// ---------------------------------------------------------------------------
// Posterior samplers
// ---------------------------------------------------------------------------

/// A fitted approximate (or exact) posterior for one dataset. `sample`
/// produces unconstrained draws. `logpdf_unnorm` is the unconstrained
/// log-density up to an additive constant; it may be empty when no density is
/// available, in which case importance reweighting (alpha < 1) is not
/// possible for the model.
struct FittedPosterior {
  std::function<DrawMatrix(int n_draws, Rng& rng)> sample;
  std::function<double(const ParamVector&)> logpdf_unnorm;
};

/// Everything the calibration pipeline needs to know about a model. All
/// parameter vectors crossing this interface are unconstrained except the
/// simulator input, which receives the constrained image.
struct ModelSpec {
  std::string name;
  Eigen::Index dim = 0;
  std::vector<std::string> param_names;
  BijectionStack bijections;
  std::function<double(const ParamVector&)> log_prior;  // unconstrained, Jacobian included
  std::function<Dataset(const ParamVector& constrained, Rng&)> simulate;
  std::function<FittedPosterior(const Dataset&, Rng&)> fit_approx;
  std::function<FittedPosterior(const Dataset&, Rng&)> fit_true;  // may be empty

  bool has_true_posterior() const { return static_cast<bool>(fit_true); }
};

// ---------------------------------------------------------------------------
// Adaptive random-walk Metropolis
// ---------------------------------------------------------------------------

struct RWMConfig {
  int iterations = 4000;
  int burn_in = 1000;
  int thin = 10;
  double initial_scale = 0.5;
  double target_acceptance = 0.3;

  void validate() const;
  /// Iteration count that yields exactly n_draws thinned samples.
  static RWMConfig for_draws(int n_draws, int burn_in, int thin, double initial_scale);
};

/// Random-walk Metropolis with an isotropic Gaussian proposal whose scale is
/// adapted toward the target acceptance rate during burn-in and frozen
/// afterward. Returns the post-burn-in thinned draws.
DrawMatrix rwm_sample(const std::function<double(const ParamVector&)>& log_target,
                      const ParamVector& init, const RWMConfig& cfg, Rng& rng);

/// Metropolis acceptance probability min(1, exp(log_proposed - log_current)).
double rwm_acceptance_probability(double log_current, double log_proposed);

/// Independent Gaussian per coordinate, moment-matched to the input draws.
/// Marginal means and standard deviations match the input exactly; cross
/// correlations of the output are zero in expectation.
FittedPosterior meanfield_surrogate(const DrawMatrix& draws);

// ---------------------------------------------------------------------------
// Conjugate Gaussian model with a perturbed approximate posterior
// ---------------------------------------------------------------------------

struct GaussianModelConfig {
  int n_obs = 10;
  double sigma = 1.0;    // known likelihood SD
  double mu0 = 0.0;      // prior mean
  double sigma0 = 4.0;   // prior SD
  double true_mu = 1.0;  // generating value for experiments
  double error_mu_mean = 0.5;
  double error_mu_sd = 0.025;
  double error_sigma_mean = 1.5;
  double error_sigma_sd = 0.025;
  bool perturb = true;   // false makes the approximate posterior exact (null case)
};

/// Exact posterior (mean, SD) for the conjugate Gaussian model.
std::pair<double, double> gaussian_true_posterior(const Dataset& data,
                                                  const GaussianModelConfig& cfg);

/// Perturbed posterior (mean, SD): draws one (mu_error, sigma_error) pair
/// from the rng and returns ((mu_post - mu_error)/sigma_error,
/// sigma_post/sigma_error). sigma_error is folded-normal so it is positive.
std::pair<double, double> gaussian_approx_posterior(double mu_post, double sigma_post,
                                                    const GaussianModelConfig& cfg,
                                                    Rng& rng);

ModelSpec make_gaussian_model(const GaussianModelConfig& cfg);

// ---------------------------------------------------------------------------
// Ornstein-Uhlenbeck models
// ---------------------------------------------------------------------------

/// Shared settings for the OU examples. The process starts at x0 and is
/// observed at time `horizon`; each dataset holds n_obs independent
/// realizations. Unknowns are mu (mean reversion level) and D = sigma^2/2;
/// the reversion rate gamma is known. The bivariate variant adds the mixing
/// weight rho with a uniform prior.
struct OUModelConfig {
  double x0 = 10.0;
  double gamma = 2.0;
  double horizon = 1.0;   // T
  int n_obs = 100;
  double true_mu = 1.0;
  double true_sigma2 = 20.0;  // so true D = 10
  double true_rho = 0.5;      // bivariate only
  double prior_mu_sd = 10.0;  // mu ~ N(0, prior_mu_sd^2)
  double prior_d_rate = 0.1;  // D ~ Exp(rate)
  int mcmc_burn_in = 1000;
  int mcmc_thin = 15;
  double mcmc_initial_scale = 0.3;
  int surrogate_fit_draws = 200;  // exact-posterior draws the surrogate is matched to

  double true_d() const { return 0.5 * true_sigma2; }
};

/// Log-density of the exact transition distribution at observation x:
/// N(mu + (x0-mu)e^{-gamma T}, (D/gamma)(1 - e^{-2 gamma T})).
double ou_transition_logpdf(double x, const OUModelConfig& cfg, double mu, double D);

/// Log-density of the stationary (T -> infinity) distribution N(mu, D/gamma)
/// used as the approximate likelihood.
double ou_limiting_logpdf(double x, const OUModelConfig& cfg, double mu, double D);

/// n independent pairs (Y1, Y2) with Y1 = X1 and Y2 = rho*X1 + (1-rho)*X2,
/// where X1, X2 are independent draws from the exact transition distribution.
Dataset bivariate_ou_simulate(const OUModelConfig& cfg, double mu, double D,
                              double rho, int n, Rng& rng);

/// Univariate OU: exact transition likelihood for the true posterior,
/// stationary likelihood for the approximate one. Parameters (mu, log D).
ModelSpec make_ou1d_model(const OUModelConfig& cfg);

/// Bivariate OU: exact likelihood for the true posterior; the approximate
/// posterior is a mean-field Gaussian surrogate moment-matched to draws from
/// the exact posterior, reproducing accurate marginals with zero
/// cross-parameter correlation. Parameters (mu, log D, logit rho).
ModelSpec make_ou2d_model(const OUModelConfig& cfg);

}  // namespace scorecal
