#include "scorecal/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "scorecal/stats.hpp"

namespace scorecal {

namespace {

constexpr double kLogTwoPi = 1.8378770664093454835606594728112;

double normal_logpdf(double x, double mean, double sd) {
  const double z = (x - mean) / sd;
  return -0.5 * kLogTwoPi - std::log(sd) - 0.5 * z * z;
}

// log(1/(1+exp(-x))), stable on both tails.
double log_sigmoid(double x) {
  if (x >= 0.0) return -std::log1p(std::exp(-x));
  return x - std::log1p(std::exp(x));
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

// ---------------------------------------------------------------------------
// Bijections
// ---------------------------------------------------------------------------

ParamVector BijectionStack::to_unconstrained(const ParamVector& constrained) const {
  if (constrained.size() != dim())
    throw std::invalid_argument("BijectionStack: dimension mismatch");
  ParamVector u(dim());
  for (Eigen::Index i = 0; i < dim(); ++i) {
    const double c = constrained(i);
    switch (maps[static_cast<std::size_t>(i)]) {
      case CoordinateMap::Identity:
        u(i) = c;
        break;
      case CoordinateMap::Log:
        if (!(c > 0.0))
          throw std::invalid_argument("BijectionStack: log map needs a positive value");
        u(i) = std::log(c);
        break;
      case CoordinateMap::Logit:
        if (!(c > 0.0 && c < 1.0))
          throw std::invalid_argument("BijectionStack: logit map needs a value in (0,1)");
        u(i) = std::log(c / (1.0 - c));
        break;
    }
  }
  return u;
}

ParamVector BijectionStack::to_constrained(const ParamVector& unconstrained) const {
  if (unconstrained.size() != dim())
    throw std::invalid_argument("BijectionStack: dimension mismatch");
  ParamVector c(dim());
  for (Eigen::Index i = 0; i < dim(); ++i) {
    const double u = unconstrained(i);
    switch (maps[static_cast<std::size_t>(i)]) {
      case CoordinateMap::Identity:
        c(i) = u;
        break;
      case CoordinateMap::Log:
        c(i) = std::exp(u);
        break;
      case CoordinateMap::Logit:
        c(i) = sigmoid(u);
        break;
    }
  }
  return c;
}

DrawMatrix BijectionStack::rows_to_constrained(const DrawMatrix& unconstrained) const {
  DrawMatrix out(unconstrained.rows(), unconstrained.cols());
  for (Eigen::Index r = 0; r < unconstrained.rows(); ++r)
    out.row(r) = to_constrained(unconstrained.row(r));
  return out;
}

double BijectionStack::log_jacobian(const ParamVector& unconstrained) const {
  if (unconstrained.size() != dim())
    throw std::invalid_argument("BijectionStack: dimension mismatch");
  double total = 0.0;
  for (Eigen::Index i = 0; i < dim(); ++i) {
    const double u = unconstrained(i);
    switch (maps[static_cast<std::size_t>(i)]) {
      case CoordinateMap::Identity:
        break;
      case CoordinateMap::Log:
        total += u;
        break;
      case CoordinateMap::Logit:
        total += log_sigmoid(u) + log_sigmoid(-u);
        break;
    }
  }
  return total;
}

// ---------------------------------------------------------------------------
// Random-walk Metropolis
// ---------------------------------------------------------------------------

void RWMConfig::validate() const {
  if (burn_in < 0) throw std::invalid_argument("RWMConfig: burn_in must be nonnegative");
  if (iterations <= burn_in)
    throw std::invalid_argument("RWMConfig: iterations must exceed burn_in");
  if (thin < 1) throw std::invalid_argument("RWMConfig: thin must be at least 1");
  if (!(initial_scale > 0.0))
    throw std::invalid_argument("RWMConfig: proposal scale must be positive");
  if (!(target_acceptance > 0.0 && target_acceptance < 1.0))
    throw std::invalid_argument("RWMConfig: target acceptance must lie in (0,1)");
}

RWMConfig RWMConfig::for_draws(int n_draws, int burn_in, int thin, double initial_scale) {
  RWMConfig cfg;
  cfg.burn_in = burn_in;
  cfg.thin = thin;
  cfg.iterations = burn_in + n_draws * thin;
  cfg.initial_scale = initial_scale;
  return cfg;
}

double rwm_acceptance_probability(double log_current, double log_proposed) {
  if (log_proposed >= log_current) return 1.0;
  return std::exp(log_proposed - log_current);
}

DrawMatrix rwm_sample(const std::function<double(const ParamVector&)>& log_target,
                      const ParamVector& init, const RWMConfig& cfg, Rng& rng) {
  cfg.validate();
  const Eigen::Index d = init.size();
  double log_current = log_target(init);
  if (!std::isfinite(log_current))
    throw std::invalid_argument("rwm_sample: log target is not finite at the initial point");

  const int n_keep = (cfg.iterations - cfg.burn_in) / cfg.thin;
  DrawMatrix out(n_keep, d);

  ParamVector current = init;
  ParamVector proposal(d);
  double log_scale = std::log(cfg.initial_scale);
  int kept = 0;

  for (int t = 0; t < cfg.iterations; ++t) {
    const double scale = std::exp(log_scale);
    for (Eigen::Index j = 0; j < d; ++j) proposal(j) = current(j) + scale * rng.normal();
    const double log_proposed = log_target(proposal);
    const double accept_prob = std::isfinite(log_proposed)
                                   ? rwm_acceptance_probability(log_current, log_proposed)
                                   : 0.0;
    if (rng.uniform() < accept_prob) {
      current.swap(proposal);
      log_current = log_proposed;
    }
    if (t < cfg.burn_in) {
      // Robbins-Monro step toward the target acceptance rate, frozen after
      // burn-in so the post-burn-in chain is a fixed-kernel Metropolis chain.
      const double gamma = 1.0 / std::pow(static_cast<double>(t) + 1.0, 0.6);
      log_scale += gamma * (accept_prob - cfg.target_acceptance);
    } else if ((t - cfg.burn_in) % cfg.thin == cfg.thin - 1 && kept < n_keep) {
      out.row(kept++) = current;
    }
  }
  return out;
}

FittedPosterior meanfield_surrogate(const DrawMatrix& draws) {
  if (draws.rows() < 10)
    throw std::invalid_argument("meanfield_surrogate: need at least 10 draws");
  const Eigen::Index d = draws.cols();
  Eigen::VectorXd means(d), sds(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    means(j) = draws.col(j).mean();
    sds(j) = sample_sd(draws.col(j));
    if (!(sds(j) > 0.0))
      throw std::invalid_argument("meanfield_surrogate: coordinate " + std::to_string(j) +
                                  " has zero variance");
  }
  FittedPosterior post;
  post.sample = [means, sds, d](int n_draws, Rng& rng) {
    DrawMatrix out(n_draws, d);
    for (int i = 0; i < n_draws; ++i)
      for (Eigen::Index j = 0; j < d; ++j) out(i, j) = rng.normal(means(j), sds(j));
    return out;
  };
  post.logpdf_unnorm = [means, sds, d](const ParamVector& u) {
    double total = 0.0;
    for (Eigen::Index j = 0; j < d; ++j) total += normal_logpdf(u(j), means(j), sds(j));
    return total;
  };
  return post;
}

// ---------------------------------------------------------------------------
// Conjugate Gaussian model
// ---------------------------------------------------------------------------

std::pair<double, double> gaussian_true_posterior(const Dataset& data,
                                                  const GaussianModelConfig& cfg) {
  const auto n = data.rows();
  if (n < 1) throw std::invalid_argument("gaussian_true_posterior: empty dataset");
  const double sum = data.col(0).sum();
  const double precision = 1.0 / (cfg.sigma0 * cfg.sigma0) +
                           static_cast<double>(n) / (cfg.sigma * cfg.sigma);
  const double variance = 1.0 / precision;
  const double mean = variance * (cfg.mu0 / (cfg.sigma0 * cfg.sigma0) +
                                  sum / (cfg.sigma * cfg.sigma));
  return {mean, std::sqrt(variance)};
}

std::pair<double, double> gaussian_approx_posterior(double mu_post, double sigma_post,
                                                    const GaussianModelConfig& cfg,
                                                    Rng& rng) {
  const double mu_error = rng.normal(cfg.error_mu_mean, cfg.error_mu_sd);
  const double sigma_error =
      std::abs(rng.normal(cfg.error_sigma_mean, cfg.error_sigma_sd));
  return {(mu_post - mu_error) / sigma_error, sigma_post / sigma_error};
}

ModelSpec make_gaussian_model(const GaussianModelConfig& cfg) {
  if (!(cfg.sigma > 0.0) || !(cfg.sigma0 > 0.0))
    throw std::invalid_argument("GaussianModelConfig: sigma and sigma0 must be positive");
  if (cfg.n_obs < 1)
    throw std::invalid_argument("GaussianModelConfig: n_obs must be at least 1");

  ModelSpec model;
  model.name = "gaussian";
  model.dim = 1;
  model.param_names = {"mu"};
  model.bijections.maps = {CoordinateMap::Identity};

  model.log_prior = [cfg](const ParamVector& u) {
    return normal_logpdf(u(0), cfg.mu0, cfg.sigma0);
  };

  model.simulate = [cfg](const ParamVector& constrained, Rng& rng) {
    Dataset data(cfg.n_obs, 1);
    for (int i = 0; i < cfg.n_obs; ++i) data(i, 0) = rng.normal(constrained(0), cfg.sigma);
    return data;
  };

  auto make_exact = [](double mean, double sd) {
    FittedPosterior post;
    post.sample = [mean, sd](int n_draws, Rng& rng) {
      DrawMatrix out(n_draws, 1);
      for (int i = 0; i < n_draws; ++i) out(i, 0) = rng.normal(mean, sd);
      return out;
    };
    post.logpdf_unnorm = [mean, sd](const ParamVector& u) {
      return normal_logpdf(u(0), mean, sd);
    };
    return post;
  };

  model.fit_true = [cfg, make_exact](const Dataset& data, Rng&) {
    const auto [mean, sd] = gaussian_true_posterior(data, cfg);
    return make_exact(mean, sd);
  };

  model.fit_approx = [cfg, make_exact](const Dataset& data, Rng& rng) {
    const auto [mean, sd] = gaussian_true_posterior(data, cfg);
    if (!cfg.perturb) return make_exact(mean, sd);
    const auto [mean_a, sd_a] = gaussian_approx_posterior(mean, sd, cfg, rng);
    return make_exact(mean_a, sd_a);
  };

  return model;
}

// ---------------------------------------------------------------------------
// Ornstein-Uhlenbeck models
// ---------------------------------------------------------------------------

namespace {

struct OUMoments {
  double decay;        // e^{-gamma T}
  double var_factor;   // (1 - e^{-2 gamma T}) / gamma
};

OUMoments ou_moments(const OUModelConfig& cfg) {
  const double decay = std::exp(-cfg.gamma * cfg.horizon);
  return {decay, (1.0 - decay * decay) / cfg.gamma};
}

double ou_transition_mean(const OUModelConfig& cfg, double mu) {
  const auto m = ou_moments(cfg);
  return mu + (cfg.x0 - mu) * m.decay;
}

double ou_transition_var(const OUModelConfig& cfg, double D) {
  return D * ou_moments(cfg).var_factor;
}

// Gaussian log-likelihood of n iid observations through the sufficient
// statistics (n, sum, sum of squares).
struct GaussSuff {
  double n = 0.0;
  double sum = 0.0;
  double sum_sq = 0.0;

  static GaussSuff from(const Eigen::VectorXd& values) {
    GaussSuff s;
    s.n = static_cast<double>(values.size());
    s.sum = values.sum();
    s.sum_sq = values.squaredNorm();
    return s;
  }

  double loglik(double mean, double variance) const {
    const double q = sum_sq - 2.0 * mean * sum + n * mean * mean;
    return -0.5 * n * (kLogTwoPi + std::log(variance)) - 0.5 * q / variance;
  }

  double mean() const { return sum / n; }
  double variance() const {
    const double m = mean();
    return sum_sq / n - m * m;
  }
};

// Jacobian-corrected priors over the unconstrained coordinates. mu is
// identity-mapped, D is log-mapped, rho (when present) is logit-mapped.
double ou_log_prior(const OUModelConfig& cfg, const ParamVector& u, bool with_rho) {
  const double log_d = u(1);
  double total = normal_logpdf(u(0), 0.0, cfg.prior_mu_sd);
  total += std::log(cfg.prior_d_rate) - cfg.prior_d_rate * std::exp(log_d) + log_d;
  if (with_rho) total += log_sigmoid(u(2)) + log_sigmoid(-u(2));
  return total;
}

double clamp_positive(double x, double floor_value) {
  return std::max(x, floor_value);
}

}  // namespace

double ou_transition_logpdf(double x, const OUModelConfig& cfg, double mu, double D) {
  if (!(D > 0.0)) throw std::invalid_argument("ou_transition_logpdf: D must be positive");
  return normal_logpdf(x, ou_transition_mean(cfg, mu), std::sqrt(ou_transition_var(cfg, D)));
}

double ou_limiting_logpdf(double x, const OUModelConfig& cfg, double mu, double D) {
  if (!(D > 0.0)) throw std::invalid_argument("ou_limiting_logpdf: D must be positive");
  return normal_logpdf(x, mu, std::sqrt(D / cfg.gamma));
}

Dataset bivariate_ou_simulate(const OUModelConfig& cfg, double mu, double D,
                              double rho, int n, Rng& rng) {
  if (!(D > 0.0)) throw std::invalid_argument("bivariate_ou_simulate: D must be positive");
  if (rho < 0.0 || rho > 1.0)
    throw std::invalid_argument("bivariate_ou_simulate: rho must lie in [0,1]");
  const double mean = ou_transition_mean(cfg, mu);
  const double sd = std::sqrt(ou_transition_var(cfg, D));
  Dataset data(n, 2);
  for (int i = 0; i < n; ++i) {
    const double x1 = rng.normal(mean, sd);
    const double x2 = rng.normal(mean, sd);
    data(i, 0) = x1;
    data(i, 1) = rho * x1 + (1.0 - rho) * x2;
  }
  return data;
}

ModelSpec make_ou1d_model(const OUModelConfig& cfg) {
  if (!(cfg.gamma > 0.0) || !(cfg.horizon > 0.0) || !(cfg.true_sigma2 > 0.0))
    throw std::invalid_argument("OUModelConfig: gamma, horizon, sigma2 must be positive");

  ModelSpec model;
  model.name = "ou1d";
  model.dim = 2;
  model.param_names = {"mu", "D"};
  model.bijections.maps = {CoordinateMap::Identity, CoordinateMap::Log};

  model.log_prior = [cfg](const ParamVector& u) { return ou_log_prior(cfg, u, false); };

  model.simulate = [cfg](const ParamVector& constrained, Rng& rng) {
    const double mean = ou_transition_mean(cfg, constrained(0));
    const double sd = std::sqrt(ou_transition_var(cfg, constrained(1)));
    Dataset data(cfg.n_obs, 1);
    for (int i = 0; i < cfg.n_obs; ++i) data(i, 0) = rng.normal(mean, sd);
    return data;
  };

  const auto moments = ou_moments(cfg);

  auto make_mcmc_posterior = [cfg](std::function<double(const ParamVector&)> log_post,
                                   ParamVector init) {
    FittedPosterior post;
    post.sample = [cfg, log_post, init](int n_draws, Rng& rng) {
      const auto mcmc = RWMConfig::for_draws(n_draws, cfg.mcmc_burn_in, cfg.mcmc_thin,
                                             cfg.mcmc_initial_scale);
      return rwm_sample(log_post, init, mcmc, rng);
    };
    post.logpdf_unnorm = log_post;
    return post;
  };

  model.fit_true = [cfg, moments, make_mcmc_posterior](const Dataset& data, Rng&) {
    const auto suff = GaussSuff::from(data.col(0));
    auto log_post = [cfg, suff](const ParamVector& u) {
      const double D = std::exp(u(1));
      return suff.loglik(ou_transition_mean(cfg, u(0)), ou_transition_var(cfg, D)) +
             ou_log_prior(cfg, u, false);
    };
    ParamVector init(2);
    init(0) = (suff.mean() - cfg.x0 * moments.decay) / (1.0 - moments.decay);
    init(1) = std::log(clamp_positive(suff.variance() / moments.var_factor, 1e-3));
    return make_mcmc_posterior(log_post, init);
  };

  model.fit_approx = [cfg, make_mcmc_posterior](const Dataset& data, Rng&) {
    const auto suff = GaussSuff::from(data.col(0));
    auto log_post = [cfg, suff](const ParamVector& u) {
      const double D = std::exp(u(1));
      return suff.loglik(u(0), D / cfg.gamma) + ou_log_prior(cfg, u, false);
    };
    ParamVector init(2);
    init(0) = suff.mean();
    init(1) = std::log(clamp_positive(cfg.gamma * suff.variance(), 1e-3));
    return make_mcmc_posterior(log_post, init);
  };

  return model;
}

namespace {

// Sufficient statistics for n iid bivariate observations.
struct BivariateSuff {
  double n = 0.0;
  double s1 = 0.0, s2 = 0.0;
  double s11 = 0.0, s22 = 0.0, s12 = 0.0;

  static BivariateSuff from(const Dataset& data) {
    BivariateSuff s;
    s.n = static_cast<double>(data.rows());
    s.s1 = data.col(0).sum();
    s.s2 = data.col(1).sum();
    s.s11 = data.col(0).squaredNorm();
    s.s22 = data.col(1).squaredNorm();
    s.s12 = data.col(0).dot(data.col(1));
    return s;
  }

  // Log-likelihood of the bivariate Gaussian with common mean m on both
  // components and covariance v * [[1, rho], [rho, rho^2 + (1-rho)^2]],
  // which is the law of (X1, rho X1 + (1-rho) X2) for iid X ~ N(m, v).
  double loglik(double m, double v, double rho) const {
    const double one_minus = 1.0 - rho;
    const double det = v * v * one_minus * one_minus;
    if (!(det > 0.0)) return -std::numeric_limits<double>::infinity();
    const double inv_common = 1.0 / (v * one_minus * one_minus);
    const double a11 = (rho * rho + one_minus * one_minus) * inv_common;
    const double a12 = -rho * inv_common;
    const double a22 = inv_common;

    const double c11 = s11 - 2.0 * m * s1 + n * m * m;
    const double c22 = s22 - 2.0 * m * s2 + n * m * m;
    const double c12 = s12 - m * (s1 + s2) + n * m * m;

    const double quad = a11 * c11 + 2.0 * a12 * c12 + a22 * c22;
    return -n * kLogTwoPi - 0.5 * n * std::log(det) - 0.5 * quad;
  }
};

double rho_from_correlation(double corr) {
  // Inverts corr(Y1, Y2) = rho / sqrt(rho^2 + (1-rho)^2) for rho in (0,1).
  const double c = std::clamp(corr, 0.02, 0.98);
  const double t = c / std::sqrt(1.0 - c * c);
  return t / (1.0 + t);
}

}  // namespace

ModelSpec make_ou2d_model(const OUModelConfig& cfg) {
  if (!(cfg.gamma > 0.0) || !(cfg.horizon > 0.0) || !(cfg.true_sigma2 > 0.0))
    throw std::invalid_argument("OUModelConfig: gamma, horizon, sigma2 must be positive");
  if (cfg.true_rho < 0.0 || cfg.true_rho > 1.0)
    throw std::invalid_argument("OUModelConfig: true_rho must lie in [0,1]");

  ModelSpec model;
  model.name = "ou2d";
  model.dim = 3;
  model.param_names = {"mu", "D", "rho"};
  model.bijections.maps = {CoordinateMap::Identity, CoordinateMap::Log,
                           CoordinateMap::Logit};

  model.log_prior = [cfg](const ParamVector& u) { return ou_log_prior(cfg, u, true); };

  model.simulate = [cfg](const ParamVector& constrained, Rng& rng) {
    return bivariate_ou_simulate(cfg, constrained(0), constrained(1), constrained(2),
                                 cfg.n_obs, rng);
  };

  const auto moments = ou_moments(cfg);

  auto exact_pieces = [cfg, moments](const Dataset& data) {
    const auto suff = BivariateSuff::from(data);
    auto log_post = [cfg, suff](const ParamVector& u) {
      const double D = std::exp(u(1));
      const double rho = sigmoid(u(2));
      return suff.loglik(ou_transition_mean(cfg, u(0)), ou_transition_var(cfg, D), rho) +
             ou_log_prior(cfg, u, true);
    };
    // Moment-based start: component one is an unmixed realization of the
    // transition distribution.
    const double mean1 = suff.s1 / suff.n;
    const double var1 = clamp_positive(suff.s11 / suff.n - mean1 * mean1, 1e-6);
    const double mean2 = suff.s2 / suff.n;
    const double cov12 = suff.s12 / suff.n - mean1 * mean2;
    const double var2 = clamp_positive(suff.s22 / suff.n - mean2 * mean2, 1e-6);
    const double corr = cov12 / std::sqrt(var1 * var2);

    ParamVector init(3);
    init(0) = (mean1 - cfg.x0 * moments.decay) / (1.0 - moments.decay);
    init(1) = std::log(clamp_positive(var1 / moments.var_factor, 1e-3));
    const double rho0 = rho_from_correlation(corr);
    init(2) = std::log(rho0 / (1.0 - rho0));
    return std::make_pair(std::function<double(const ParamVector&)>(log_post), init);
  };

  model.fit_true = [cfg, exact_pieces](const Dataset& data, Rng&) {
    auto [log_post, init] = exact_pieces(data);
    FittedPosterior post;
    post.sample = [cfg, log_post, init](int n_draws, Rng& rng) {
      const auto mcmc = RWMConfig::for_draws(n_draws, cfg.mcmc_burn_in, cfg.mcmc_thin,
                                             cfg.mcmc_initial_scale);
      return rwm_sample(log_post, init, mcmc, rng);
    };
    post.logpdf_unnorm = log_post;
    return post;
  };

  // The approximate posterior keeps the exact marginals (up to Monte Carlo
  // error) but drops all cross-parameter correlation: a mean-field Gaussian
  // matched to draws from the exact posterior.
  model.fit_approx = [cfg, exact_pieces](const Dataset& data, Rng& rng) {
    auto [log_post, init] = exact_pieces(data);
    const auto mcmc = RWMConfig::for_draws(cfg.surrogate_fit_draws, cfg.mcmc_burn_in,
                                           cfg.mcmc_thin, cfg.mcmc_initial_scale);
    const DrawMatrix fit_draws = rwm_sample(log_post, init, mcmc, rng);
    return meanfield_surrogate(fit_draws);
  };

  return model;
}

}  // namespace scorecal
