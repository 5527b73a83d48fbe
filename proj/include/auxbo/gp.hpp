#pragma once

// Exact GP regression with an isotropic Matern 5/2 kernel. Hyperparameters
// (lengthscale, signal variance) maximize the log marginal likelihood by
// multi-start coordinate-wise golden-section search in log space.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>

#include "auxbo/surrogates/surrogate.hpp"

namespace auxbo {

inline double matern52(double r, double lengthscale, double signal_var) {
  if (!(lengthscale > 0.0)) throw std::invalid_argument("matern52: lengthscale must be positive");
  if (r < 0.0) throw std::invalid_argument("matern52: negative distance");
  const double s = std::sqrt(5.0) * r / lengthscale;
  return signal_var * (1.0 + s + s * s / 3.0) * std::exp(-s);
}

/// Pairwise Euclidean distances between the columns of A and B.
inline Matrix pairwise_distances(const Matrix& A, const Matrix& B) {
  const Eigen::VectorXd a2 = A.colwise().squaredNorm().transpose();
  const Eigen::RowVectorXd b2 = B.colwise().squaredNorm();
  Matrix D = (-2.0 * A.transpose() * B).colwise() + a2;
  D.rowwise() += b2;
  return D.cwiseMax(0.0).cwiseSqrt();
}

inline Matrix matern52_matrix(const Matrix& dist, double lengthscale, double signal_var) {
  const double k = std::sqrt(5.0) / lengthscale;
  return dist.unaryExpr([&](double r) {
    const double s = k * r;
    return signal_var * (1.0 + s + s * s / 3.0) * std::exp(-s);
  });
}

struct GpHyper {
  double lengthscale = 1.0;
  double signal_var = 1.0;
};

/// Fitted GP on columns of X with targets y (already standardized).
struct GpModel {
  GpHyper hyper;
  double jitter = 1e-8;
  Matrix X;
  Eigen::VectorXd y;
  Matrix L;                // lower Cholesky factor of K + jitter*I
  Eigen::VectorXd alpha;   // (K + jitter*I)^{-1} y
  double log_marginal = 0.0;
};

inline constexpr double kGpMinJitter = 1e-8;
inline constexpr double kGpMaxJitter = 1e-4;
inline constexpr double kGpLogBoxLo = -4.605170185988091;  // log(1e-2)
inline constexpr double kGpLogBoxHi = 4.605170185988091;   // log(1e2)
inline constexpr int kGpRestarts = 8;

namespace detail {

/// Factorizes K + jitter*I for given hyperparameters; false if not PD.
inline bool gp_factorize(const Matrix& dist, const Eigen::VectorXd& y, GpHyper hp, double jitter, GpModel& out) {
  const Eigen::Index n = dist.rows();
  Matrix K = matern52_matrix(dist, hp.lengthscale, hp.signal_var);
  K.diagonal().array() += jitter;
  Eigen::LLT<Matrix> llt(K);
  if (llt.info() != Eigen::Success) return false;
  out.hyper = hp;
  out.jitter = jitter;
  out.L = llt.matrixL();
  out.alpha = llt.solve(y);
  const double logdet = 2.0 * out.L.diagonal().array().log().sum();
  const double lml = -0.5 * y.dot(out.alpha) - 0.5 * logdet - 0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
  if (!std::isfinite(lml)) return false;
  out.log_marginal = lml;
  return true;
}

/// Radical-inverse (Halton) point in [0,1) for base 2 and 3.
inline double radical_inverse(unsigned i, unsigned base) {
  double f = 1.0, r = 0.0;
  for (; i > 0; i /= base) {
    f /= base;
    r += f * (i % base);
  }
  return r;
}

}  // namespace detail

/// Log marginal likelihood at fixed hyperparameters; -inf when the kernel
/// matrix is not positive definite.
inline double gp_log_marginal(const Matrix& X, const Eigen::VectorXd& y, GpHyper hp, double jitter = kGpMinJitter) {
  GpModel m;
  if (!detail::gp_factorize(pairwise_distances(X, X), y, hp, jitter, m)) return -std::numeric_limits<double>::infinity();
  return m.log_marginal;
}

/// Factorized model at fixed hyperparameters.
inline GpModel gp_condition(const Matrix& X, const Eigen::VectorXd& y, GpHyper hp, double jitter = kGpMinJitter) {
  if (X.cols() != y.size()) throw std::invalid_argument("gp: input/target count mismatch");
  GpModel m;
  if (!detail::gp_factorize(pairwise_distances(X, X), y, hp, jitter, m))
    throw std::runtime_error("gp: kernel matrix not positive definite");
  m.X = X;
  m.y = y;
  return m;
}

inline GpModel gp_fit(const Matrix& X, const Eigen::VectorXd& y) {
  const Eigen::Index n = X.cols();
  if (n < 2) throw std::invalid_argument("gp_fit: need at least 2 training points");
  if (y.size() != n) throw std::invalid_argument("gp_fit: input/target count mismatch");
  const Matrix dist = pairwise_distances(X, X);
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  const double width = kGpLogBoxHi - kGpLogBoxLo;

  for (double jitter = kGpMinJitter; jitter <= kGpMaxJitter * 1.0001; jitter *= 10.0) {
    GpModel best, trial;
    double best_lml = -std::numeric_limits<double>::infinity();
    auto eval = [&](const std::array<double, 2>& t) {
      if (!detail::gp_factorize(dist, y, {std::exp(t[0]), std::exp(t[1])}, jitter, trial))
        return -std::numeric_limits<double>::infinity();
      if (trial.log_marginal > best_lml) {
        best_lml = trial.log_marginal;
        best = trial;
      }
      return trial.log_marginal;
    };
    for (int r = 0; r < kGpRestarts; ++r) {
      std::array<double, 2> t{kGpLogBoxLo + width * detail::radical_inverse(r + 1, 2),
                              kGpLogBoxLo + width * detail::radical_inverse(r + 1, 3)};
      double cur = eval(t);
      double half = width / 4.0;
      for (int sweep = 0; sweep < 4; ++sweep, half /= 2.0) {
        for (int d = 0; d < 2; ++d) {
          double a = std::max(kGpLogBoxLo, t[d] - half), b = std::min(kGpLogBoxHi, t[d] + half);
          auto at = [&](double v) {
            auto u = t;
            u[d] = v;
            return eval(u);
          };
          double c = b - phi * (b - a), e = a + phi * (b - a);
          double fc = at(c), fe = at(e);
          for (int it = 0; it < 12; ++it) {
            if (fc >= fe) {
              b = e, e = c, fe = fc;
              c = b - phi * (b - a);
              fc = at(c);
            } else {
              a = c, c = e, fc = fe;
              e = a + phi * (b - a);
              fe = at(e);
            }
          }
          const double v = fc >= fe ? c : e;
          const double fv = std::max(fc, fe);
          if (fv > cur) {
            t[d] = v;
            cur = fv;
          }
        }
      }
    }
    if (std::isfinite(best_lml)) {
      best.X = X;
      best.y = y;
      return best;
    }
  }
  std::ostringstream os;
  os << "gp_fit: kernel matrix not positive definite for any restart up to jitter " << kGpMaxJitter;
  throw std::runtime_error(os.str());
}

/// Posterior mean and variance at the columns of Xs (standardized units).
inline NormalPrediction gp_predict(const GpModel& m, const Matrix& Xs) {
  const Matrix Ks = matern52_matrix(pairwise_distances(m.X, Xs), m.hyper.lengthscale, m.hyper.signal_var);
  NormalPrediction p;
  p.mean = Ks.transpose() * m.alpha;
  const Matrix V = m.L.triangularView<Eigen::Lower>().solve(Ks);
  const Eigen::ArrayXd var = (m.hyper.signal_var - V.colwise().squaredNorm().array()).transpose();
  p.sd = var.cwiseMax(0.0).sqrt().matrix();
  return p;
}

/// GP as a surrogate: each training call refits hyperparameters from scratch.
class GpSurrogate final : public Surrogate {
 public:
  std::string name() const override { return "gp"; }
  bool trained() const override { return trained_; }
  const GpModel& model() const { return model_; }

  void train_from_scratch(const Matrix& X, const Matrix& T, SeedStream&) override {
    if (T.rows() != 1) throw std::invalid_argument("gp: scalar targets only");
    scaler_ = TargetScaler(T);
    model_ = gp_fit(X, scaler_.forward(T).row(0).transpose());
    trained_ = true;
  }

  void continue_training(const Matrix& X, const Matrix& T, SeedStream& rng) override { train_from_scratch(X, T, rng); }

  std::optional<NormalPrediction> predict_normal(const Matrix& X) const override {
    require_trained();
    NormalPrediction p = gp_predict(model_, X);
    const double m = scaler_.mean()[0], s = scaler_.std()[0];
    p.mean = (p.mean.array() * s + m).matrix();
    p.sd *= s;
    return p;
  }

  PredictionSet predict_samples(const Matrix& X, int n_mc, SeedStream& rng) const override {
    if (n_mc < 1) throw std::invalid_argument("gp: n_mc must be >= 1");
    const NormalPrediction p = *predict_normal(X);
    PredictionSet ps;
    for (int i = 0; i < n_mc; ++i) {
      Matrix s(1, X.cols());
      for (Eigen::Index j = 0; j < X.cols(); ++j) s(0, j) = p.mean[j] + p.sd[j] * rng.normal();
      ps.samples.push_back(std::move(s));
    }
    return ps;
  }

 private:
  GpModel model_;
  TargetScaler scaler_;
  bool trained_ = false;
};

}  // namespace auxbo
