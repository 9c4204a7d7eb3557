#include "scorecal/weights.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "scorecal/stats.hpp"

namespace scorecal {

void validate_weights(const WeightVector& w) {
  if (w.size() == 0) throw std::invalid_argument("WeightVector: empty");
  bool any_positive = false;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (!std::isfinite(w(i)) || w(i) < 0.0)
      throw std::invalid_argument("WeightVector: entry " + std::to_string(i) +
                                  " is negative or non-finite");
    if (w(i) > 0.0) any_positive = true;
  }
  if (!any_positive) throw std::invalid_argument("WeightVector: all entries are zero");
}

double Stabilizer::operator()(const Dataset& data) const {
  if (is_unit()) return 1.0;
  const double v = fn(data);
  if (!std::isfinite(v) || v < 0.0)
    throw std::invalid_argument("Stabilizer: returned a negative or non-finite value");
  return v;
}

WeightVector raw_weights(const std::function<double(const ParamVector&)>& log_prior,
                         const std::function<double(const ParamVector&)>& log_importance,
                         const Stabilizer& stabilizer,
                         const Eigen::MatrixXd& thetas,
                         const std::vector<Dataset>& datasets) {
  const Eigen::Index m = thetas.rows();
  if (m == 0) throw std::invalid_argument("raw_weights: no calibration samples");
  if (static_cast<Eigen::Index>(datasets.size()) != m)
    throw std::invalid_argument("raw_weights: theta/dataset count mismatch");

  WeightVector w(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const ParamVector theta = thetas.row(i);
    const double lp = log_prior(theta);
    const double li = log_importance(theta);
    if (!std::isfinite(lp))
      throw std::runtime_error("raw_weights: non-finite prior log-density at index " +
                               std::to_string(i));
    if (!std::isfinite(li))
      throw std::runtime_error("raw_weights: non-finite importance log-density at index " +
                               std::to_string(i));
    w(i) = std::exp(lp - li) * stabilizer(datasets[static_cast<std::size_t>(i)]);
  }
  validate_weights(w);
  return w;
}

WeightVector clip_weights(const WeightVector& w, double alpha) {
  validate_weights(w);
  if (alpha < 0.0 || alpha > 1.0)
    throw std::invalid_argument("clip_weights: alpha outside [0,1]");
  std::vector<double> sorted(w.data(), w.data() + w.size());
  const double cap = quantile(std::move(sorted), 1.0 - alpha);
  return w.array().min(cap);
}

WeightVector unit_weights(int m) {
  if (m < 1) throw std::invalid_argument("unit_weights: m must be at least 1");
  return WeightVector::Ones(m);
}

}  // namespace scorecal
