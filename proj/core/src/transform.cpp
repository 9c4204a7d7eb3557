#include "scorecal/transform.hpp"

#include <cmath>
#include <stdexcept>

namespace scorecal {

void MomentTransform::validate() const {
  const auto d = shift.size();
  if (scale.rows() != d || scale.cols() != d)
    throw std::invalid_argument("MomentTransform: shift/scale dimension mismatch");
  for (Eigen::Index i = 0; i < d; ++i) {
    if (!(scale(i, i) > 0.0))
      throw std::invalid_argument("MomentTransform: scale diagonal must be positive");
    for (Eigen::Index j = i + 1; j < d; ++j) {
      if (scale(i, j) != 0.0)
        throw std::invalid_argument("MomentTransform: scale must be lower triangular");
    }
  }
}

MomentTransform MomentTransform::identity(Eigen::Index dim) {
  return MomentTransform{Eigen::VectorXd::Zero(dim),
                         Eigen::MatrixXd::Identity(dim, dim)};
}

TransformParams identity_params(Eigen::Index dim, bool diagonal_only) {
  TransformParams p;
  p.dim = dim;
  p.diagonal_only = diagonal_only;
  p.values = Eigen::VectorXd::Zero(TransformParams::size_for(dim, diagonal_only));
  return p;
}

TransformParams pack(const MomentTransform& transform, bool diagonal_only) {
  transform.validate();
  const auto d = transform.dim();
  TransformParams p = identity_params(d, diagonal_only);
  for (Eigen::Index i = 0; i < d; ++i) p.values(i) = transform.shift(i);
  for (Eigen::Index i = 0; i < d; ++i) p.values(d + i) = std::log(transform.scale(i, i));
  if (!diagonal_only) {
    Eigen::Index k = 2 * d;
    for (Eigen::Index i = 1; i < d; ++i)
      for (Eigen::Index j = 0; j < i; ++j) p.values(k++) = transform.scale(i, j);
  }
  return p;
}

MomentTransform unpack(const TransformParams& params) {
  const auto d = params.dim;
  if (params.values.size() != TransformParams::size_for(d, params.diagonal_only))
    throw std::invalid_argument("TransformParams: value vector has wrong length");
  MomentTransform t;
  t.shift = params.values.head(d);
  t.scale = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index i = 0; i < d; ++i) t.scale(i, i) = std::exp(params.values(d + i));
  if (!params.diagonal_only) {
    Eigen::Index k = 2 * d;
    for (Eigen::Index i = 1; i < d; ++i)
      for (Eigen::Index j = 0; j < i; ++j) t.scale(i, j) = params.values(k++);
  }
  return t;
}

void PenaltyConfig::validate() const {
  if (lambda < 0.0)
    throw std::invalid_argument("PenaltyConfig: lambda must be nonnegative");
}

double penalty(const TransformParams& params, const PenaltyConfig& cfg) {
  cfg.validate();
  if (cfg.lambda == 0.0) return 0.0;
  const MomentTransform t = unpack(params);
  double total = 0.0;
  for (Eigen::Index i = 0; i < t.dim(); ++i) {
    const double dd = t.scale(i, i) - 1.0;
    total += dd * dd;
    for (Eigen::Index j = 0; j < i; ++j) total += t.scale(i, j) * t.scale(i, j);
  }
  return cfg.lambda * total;
}

ParamVector apply(const MomentTransform& transform, const ParamVector& center,
                  const ParamVector& theta) {
  const auto d = transform.dim();
  if (center.size() != d || theta.size() != d)
    throw std::invalid_argument("apply: dimension mismatch");
  return transform.scale * (theta - center) + center + transform.shift;
}

DrawMatrix pushforward_with_center(const MomentTransform& transform,
                                   const DrawMatrix& draws,
                                   const ParamVector& center) {
  const auto d = transform.dim();
  if (draws.cols() != d || center.size() != d)
    throw std::invalid_argument("pushforward: dimension mismatch");
  if (draws.rows() < 2)
    throw std::invalid_argument("pushforward: need at least 2 draws");
  DrawMatrix out = (draws.rowwise() - center.transpose()) * transform.scale.transpose();
  out.rowwise() += (center + transform.shift).transpose();
  return out;
}

DrawMatrix pushforward(const MomentTransform& transform, const DrawMatrix& draws) {
  if (draws.rows() < 2)
    throw std::invalid_argument("pushforward: need at least 2 draws");
  const Eigen::VectorXd center = draws.colwise().mean();
  return pushforward_with_center(transform, draws, center);
}

}  // namespace scorecal
