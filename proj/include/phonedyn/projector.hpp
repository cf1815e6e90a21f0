#pragma once

// Covariate regress-out. One ridge regression per covariate predicts it
// from the features; the coefficient vectors are orthonormalized and the
// spanned directions are then removed from every feature vector.

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "error.hpp"
#include "ridge.hpp"

namespace phonedyn {

struct CovariateProjector {
  Eigen::MatrixXd directions;    // dims x m, orthonormal columns
  Eigen::MatrixXd coefficients;  // dims x c, raw ridge coefficients per covariate
  Eigen::VectorXd feature_mean;

  Eigen::Index dims() const noexcept { return directions.rows(); }
  Eigen::Index rank() const noexcept { return directions.cols(); }
};

/// `covariates` holds one column per covariate, rows aligned with X.
inline CovariateProjector fit_projector(const Eigen::MatrixXd& X, const Eigen::MatrixXd& covariates,
                                        double alpha = 1.0) {
  if (covariates.rows() != X.rows())
    throw DimensionError("fit_projector: " + std::to_string(covariates.rows()) + " covariate rows for " +
                         std::to_string(X.rows()) + " feature rows");
  if (X.rows() < 2) throw DataError("fit_projector: need at least 2 rows");
  if (!covariates.allFinite()) throw DataError("fit_projector: non-finite covariate values");
  if (!X.allFinite()) throw DataError("fit_projector: non-finite feature values");
  if (!(alpha > 0.0)) throw DataError("fit_projector: alpha must be positive");

  CovariateProjector p;
  p.feature_mean = X.colwise().mean().transpose();
  const Eigen::MatrixXd Xc = X.rowwise() - p.feature_mean.transpose();
  const Eigen::MatrixXd Cc = covariates.rowwise() - covariates.colwise().mean();
  p.coefficients = solve_ridge(Xc, Cc, alpha);

  // Modified Gram-Schmidt with one re-orthogonalization pass.
  std::vector<Eigen::VectorXd> basis;
  for (Eigen::Index c = 0; c < p.coefficients.cols(); ++c) {
    Eigen::VectorXd v = p.coefficients.col(c);
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& b : basis) v -= b.dot(v) * b;
    const double norm = v.norm();
    if (norm < 1e-10) continue;
    basis.push_back(v / norm);
  }
  if (basis.empty()) throw DataError("fit_projector: every covariate coefficient vector vanished; nothing to project");

  p.directions.resize(X.cols(), static_cast<Eigen::Index>(basis.size()));
  for (std::size_t i = 0; i < basis.size(); ++i) p.directions.col(static_cast<Eigen::Index>(i)) = basis[i];
  return p;
}

/// x' = x - sum_d (x . d) d, applied row-wise.
template <class Derived>
void project_out_inplace(const CovariateProjector& p, Eigen::MatrixBase<Derived>& X) {
  if (X.cols() != p.dims())
    throw DimensionError("project_out: input has " + std::to_string(X.cols()) + " dims, projector expects " +
                         std::to_string(p.dims()));
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    Eigen::RowVectorXd row = X.row(i);
    for (Eigen::Index d = 0; d < p.rank(); ++d) row -= row.dot(p.directions.col(d)) * p.directions.col(d).transpose();
    X.row(i) = row;
  }
}

inline Eigen::MatrixXd project_out(const CovariateProjector& p, const Eigen::MatrixXd& X) {
  Eigen::MatrixXd out = X;
  project_out_inplace(p, out);
  return out;
}

}  // namespace phonedyn
