#pragma once

#include "scorecal/common.hpp"

namespace scorecal {

/// Moment-correcting affine transform: theta -> L*(theta - center) + center + b
/// where the centering point is the mean of the approximate posterior the
/// transform is applied to. One (b, L) pair corrects every calibration
/// posterior by the same relative amount.
struct MomentTransform {
  Eigen::VectorXd shift;  // b
  Eigen::MatrixXd scale;  // L, lower triangular with positive diagonal

  Eigen::Index dim() const { return shift.size(); }
  void validate() const;

  static MomentTransform identity(Eigen::Index dim);
};

/// Unconstrained optimizer coordinates for a MomentTransform.
///
/// Layout: the d shift entries, then the diagonal of L stored as logarithms,
/// then (unless diagonal_only) the strictly-lower-triangular entries of L in
/// row-major order. The exponential map keeps the unpacked diagonal positive
/// for every real-valued coordinate vector.
struct TransformParams {
  Eigen::VectorXd values;
  Eigen::Index dim = 0;
  bool diagonal_only = false;

  Eigen::Index size() const { return values.size(); }

  static Eigen::Index size_for(Eigen::Index dim, bool diagonal_only) {
    return diagonal_only ? 2 * dim : dim + dim * (dim + 1) / 2;
  }
};

/// Identity transform in unconstrained coordinates (the zero vector).
TransformParams identity_params(Eigen::Index dim, bool diagonal_only);

TransformParams pack(const MomentTransform& transform, bool diagonal_only);
MomentTransform unpack(const TransformParams& params);

/// Squared shrinkage penalty on the scale matrix: diagonal entries toward one
/// and off-diagonal entries toward zero.
struct PenaltyConfig {
  double lambda = 0.0;

  void validate() const;
};

/// lambda * ( sum_i (L_ii - 1)^2 + sum_{i>j} L_ij^2 ); zero at the identity.
double penalty(const TransformParams& params, const PenaltyConfig& cfg);

/// L*(theta - center) + center + shift.
ParamVector apply(const MomentTransform& transform, const ParamVector& center,
                  const ParamVector& theta);

/// Transforms every row of draws, centering at the empirical mean of draws.
/// The output's empirical mean is center + b and its empirical covariance is
/// L * Cov * L^T, both exactly up to floating point.
DrawMatrix pushforward(const MomentTransform& transform, const DrawMatrix& draws);

/// Same as pushforward but with the centering point supplied by the caller
/// (the cached per-dataset approximate posterior mean).
DrawMatrix pushforward_with_center(const MomentTransform& transform,
                                   const DrawMatrix& draws,
                                   const ParamVector& center);

}  // namespace scorecal
