#pragma once

// Closed-form one-vs-rest ridge classifier and the majority-class baseline.
//
// Fitting centers X and the one-hot targets Y, solves
//   (Xc'Xc + alpha I) W = Xc'Yc
// with a Cholesky factorization, and leaves the intercept unpenalized:
//   intercept = mean(Y) - mean(X)' W.
// Scores are read out in centered form, (x - mean(X))' W + mean(Y), which
// is algebraically identical to x' W + intercept.

#include <algorithm>
#include <cmath>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "dataset.hpp"
#include "error.hpp"

namespace phonedyn {

struct RidgeModel {
  Eigen::MatrixXd weights;       // dims x k
  Eigen::VectorXd intercept;     // k, applies to uncentered inputs
  Eigen::VectorXd feature_mean;  // dims
  Eigen::VectorXd target_mean;   // k, class frequencies in the training set
  double alpha = 1.0;
  std::vector<int> class_labels;  // ascending; column j of weights scores class_labels[j]

  Eigen::Index dims() const noexcept { return weights.rows(); }
  Eigen::Index num_classes() const noexcept { return weights.cols(); }
};

/// Solves (Xc'Xc + alpha I) B = Xc'Yc for already-centered inputs.
inline Eigen::MatrixXd solve_ridge(const Eigen::MatrixXd& Xc, const Eigen::MatrixXd& Yc, double alpha) {
  Eigen::MatrixXd gram = Xc.transpose() * Xc;
  gram.diagonal().array() += alpha;
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success) throw DataError("ridge: regularized Gram matrix is not positive definite");
  return llt.solve(Xc.transpose() * Yc);
}

/// Fits the classifier. When `class_labels` is empty the classes are the
/// distinct labels present in `y` (at least two required).
inline RidgeModel ridge_fit(const Eigen::MatrixXd& X, std::span<const int> y, double alpha,
                            std::vector<int> class_labels = {}) {
  const Eigen::Index n = X.rows();
  if (n < 2) throw DataError("ridge_fit: need at least 2 samples, got " + std::to_string(n));
  if (static_cast<std::size_t>(n) != y.size())
    throw DimensionError("ridge_fit: " + std::to_string(n) + " rows but " + std::to_string(y.size()) + " labels");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw DataError("ridge_fit: alpha must be positive");
  if (!X.allFinite()) throw DataError("ridge_fit: design matrix contains non-finite values");

  if (class_labels.empty()) class_labels.assign(y.begin(), y.end());
  std::sort(class_labels.begin(), class_labels.end());
  class_labels.erase(std::unique(class_labels.begin(), class_labels.end()), class_labels.end());
  if (class_labels.size() < 2)
    throw DataError("ridge_fit: need at least 2 classes, got " + std::to_string(class_labels.size()));

  const auto k = static_cast<Eigen::Index>(class_labels.size());
  Eigen::MatrixXd Y = Eigen::MatrixXd::Zero(n, k);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto it = std::lower_bound(class_labels.begin(), class_labels.end(), y[static_cast<std::size_t>(i)]);
    if (it == class_labels.end() || *it != y[static_cast<std::size_t>(i)])
      throw DataError("ridge_fit: label " + std::to_string(y[static_cast<std::size_t>(i)]) +
                      " is not among the class labels");
    Y(i, it - class_labels.begin()) = 1.0;
  }

  RidgeModel m;
  m.alpha = alpha;
  m.class_labels = std::move(class_labels);
  m.feature_mean = X.colwise().mean().transpose();
  m.target_mean = Y.colwise().mean().transpose();
  const Eigen::MatrixXd Xc = X.rowwise() - m.feature_mean.transpose();
  const Eigen::MatrixXd Yc = Y.rowwise() - m.target_mean.transpose();
  m.weights = solve_ridge(Xc, Yc, alpha);
  m.intercept = m.target_mean - m.weights.transpose() * m.feature_mean;
  return m;
}

inline RidgeModel ridge_fit(const SampleSet& s, double alpha, std::vector<int> class_labels = {}) {
  return ridge_fit(s.X, s.y, alpha, std::move(class_labels));
}

/// Scores of one row. Every prediction in the library goes through this
/// routine, so a given model and frame always produce bit-identical scores
/// whichever analysis asks for them.
template <class Row>
Eigen::VectorXd ridge_scores(const RidgeModel& m, const Eigen::MatrixBase<Row>& x) {
  const Eigen::VectorXd centered = x.transpose() - m.feature_mean;
  Eigen::VectorXd s = m.target_mean;
  s.noalias() += m.weights.transpose() * centered;
  return s;
}

/// Label of the highest score; ties go to the lowest class label.
template <class Row>
int ridge_predict_row(const RidgeModel& m, const Eigen::MatrixBase<Row>& x) {
  const Eigen::VectorXd s = ridge_scores(m, x);
  Eigen::Index best = 0;
  for (Eigen::Index j = 1; j < s.size(); ++j)
    if (s(j) > s(best)) best = j;
  return m.class_labels[static_cast<std::size_t>(best)];
}

template <class Derived>
std::vector<int> ridge_predict(const RidgeModel& m, const Eigen::MatrixBase<Derived>& X) {
  if (X.cols() != m.dims())
    throw DimensionError("ridge_predict: input has " + std::to_string(X.cols()) + " dims, model expects " +
                         std::to_string(m.dims()));
  std::vector<int> out(static_cast<std::size_t>(X.rows()));
  for (Eigen::Index i = 0; i < X.rows(); ++i) out[static_cast<std::size_t>(i)] = ridge_predict_row(m, X.row(i));
  return out;
}

inline double accuracy(std::span<const int> predicted, std::span<const int> truth) {
  if (predicted.size() != truth.size() || truth.empty())
    throw DimensionError("accuracy: prediction/label size mismatch or empty input");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hits += predicted[i] == truth[i];
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

struct MajorityBaseline {
  int label = 0;
  double accuracy = 0.0;
};

/// Most frequent training label (ties -> lowest index) scored on `test`.
inline MajorityBaseline majority_baseline(std::span<const int> train, std::span<const int> test) {
  if (train.empty()) throw DataError("majority_baseline: empty training set");
  std::map<int, std::size_t> counts;
  for (const int l : train) ++counts[l];
  MajorityBaseline b;
  std::size_t best = 0;
  for (const auto& [label, c] : counts)
    if (c > best) {
      best = c;
      b.label = label;
    }
  if (!test.empty())
    b.accuracy = static_cast<double>(std::count(test.begin(), test.end(), b.label)) /
                 static_cast<double>(test.size());
  return b;
}

}  // namespace phonedyn
