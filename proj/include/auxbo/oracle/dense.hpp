#pragma once

// Naive dense-inverse reference computations for the GP and the Bayesian
// linear head. Deliberately avoids Cholesky so they are independent of the
// production code path.

#include <Eigen/Dense>

#include <cmath>
#include <numbers>

namespace auxbo::oracle {

using Matrix = Eigen::MatrixXd;
using Eigen::VectorXd;

inline double matern52_naive(double r, double l, double sf2) {
  const double a = std::sqrt(5.0) * r / l;
  return sf2 * (1.0 + a + 5.0 * r * r / (3.0 * l * l)) * std::exp(-a);
}

inline Matrix gram(const Matrix& A, const Matrix& B, double l, double sf2) {
  Matrix K(A.cols(), B.cols());
  for (Eigen::Index i = 0; i < A.cols(); ++i)
    for (Eigen::Index j = 0; j < B.cols(); ++j) K(i, j) = matern52_naive((A.col(i) - B.col(j)).norm(), l, sf2);
  return K;
}

inline double gp_log_marginal(const Matrix& X, const VectorXd& y, double l, double sf2, double jitter) {
  Matrix K = gram(X, X, l, sf2);
  K.diagonal().array() += jitter;
  const Matrix Kinv = K.inverse();
  const double n = static_cast<double>(y.size());
  return -0.5 * y.dot(Kinv * y) - 0.5 * std::log(K.determinant()) - 0.5 * n * std::log(2.0 * std::numbers::pi);
}

struct GpMoments {
  VectorXd mean, var;
};

inline GpMoments gp_predict(const Matrix& X, const VectorXd& y, const Matrix& Xs, double l, double sf2, double jitter) {
  Matrix K = gram(X, X, l, sf2);
  K.diagonal().array() += jitter;
  const Matrix Kinv = K.inverse();
  const Matrix Ks = gram(X, Xs, l, sf2);
  GpMoments m;
  m.mean = Ks.transpose() * Kinv * y;
  m.var = VectorXd(Xs.cols());
  for (Eigen::Index j = 0; j < Xs.cols(); ++j) m.var[j] = sf2 - Ks.col(j).dot(Kinv * Ks.col(j));
  return m;
}

struct BlrMoments {
  VectorXd mean;
  Matrix cov;
};

inline BlrMoments blr_posterior(const Matrix& F, const VectorXd& y, double alpha, double beta) {
  const Eigen::Index D = F.cols();
  BlrMoments b;
  b.cov = (alpha * Matrix::Identity(D, D) + beta * F.transpose() * F).inverse();
  b.mean = beta * b.cov * F.transpose() * y;
  return b;
}

}  // namespace auxbo::oracle
