#pragma once

// Neural linear model: the hidden layers of a trained network act as basis
// functions (plus a constant) for conjugate Bayesian linear regression.

#include <Eigen/Dense>

#include <cmath>
#include <sstream>
#include <string>

#include "auxbo/nn/arch.hpp"
#include "auxbo/surrogates/surrogate.hpp"

namespace auxbo {

/// Gaussian posterior over linear weights. `chol` is the lower Cholesky
/// factor of the posterior precision alpha*I + beta*F^T F.
struct BlrPosterior {
  Eigen::VectorXd mean;
  Matrix cov;
  Matrix chol;
  double jitter = 0.0;
};

/// Conjugate posterior for y = F w with prior N(0, I/alpha) and noise
/// precision beta. Rows of F are observations.
inline BlrPosterior neural_linear_fit_head(const Matrix& F, const Eigen::VectorXd& y, double alpha, double beta) {
  if (F.rows() < 1) throw std::invalid_argument("neural_linear_fit_head: need at least one observation");
  if (F.rows() != y.size()) throw std::invalid_argument("neural_linear_fit_head: feature/target count mismatch");
  if (!(alpha > 0.0) || !(beta > 0.0)) throw std::invalid_argument("neural_linear_fit_head: alpha and beta must be positive");
  const Eigen::Index D = F.cols();
  const Matrix A0 = alpha * Matrix::Identity(D, D) + beta * F.transpose() * F;
  const double scale = A0.diagonal().maxCoeff();
  double jitter = 0.0;
  for (int attempt = 0; attempt < 8; ++attempt) {
    const Matrix A = A0 + jitter * Matrix::Identity(D, D);
    Eigen::LLT<Matrix> llt(A);
    if (llt.info() == Eigen::Success && llt.rcond() > 1e-12) {
      BlrPosterior post;
      post.chol = llt.matrixL();
      post.cov = llt.solve(Matrix::Identity(D, D));
      post.cov = 0.5 * (post.cov + post.cov.transpose());
      post.mean = beta * (post.cov * (F.transpose() * y));
      post.jitter = jitter;
      return post;
    }
    jitter = (jitter == 0.0) ? 1e-10 * scale : jitter * 100.0;
  }
  std::ostringstream os;
  os << "neural_linear_fit_head: ill-conditioned system (jitter up to " << jitter << ")";
  throw std::runtime_error(os.str());
}

/// n_mc joint draws of Phi w, w ~ posterior; Phi rows are points. Returns
/// an n_mc x points matrix.
inline Matrix blr_sample(const BlrPosterior& post, const Matrix& Phi, int n_mc, SeedStream& rng) {
  const Eigen::Index D = post.mean.size();
  Matrix eps(D, n_mc);
  for (Eigen::Index j = 0; j < n_mc; ++j)
    for (Eigen::Index d = 0; d < D; ++d) eps(d, j) = rng.normal();
  // w = mean + L^{-T} eps has covariance (L L^T)^{-1}.
  const Matrix W = (post.chol.transpose().triangularView<Eigen::Upper>().solve(eps)).colwise() + post.mean;
  return (Phi * W).transpose();
}

class NeuralLinearSurrogate final : public Surrogate {
 public:
  NeuralLinearSurrogate(SurrogateConfig cfg, nn::Shape input)
      : cfg_(std::move(cfg)), net_(nn::build_network(cfg_.arch, input, 1)), body_(nn::build_body(cfg_.arch, input)) {}

  std::string name() const override { return "neural-linear"; }
  bool trained() const override { return trained_; }
  long epochs_consumed() const override { return epochs_; }
  double last_loss() const override { return last_loss_; }
  const BlrPosterior& head() const { return head_; }

  void train_from_scratch(const Matrix& X, const Matrix& T, SeedStream& rng) override {
    auto init = rng.child("init");
    net_.init(init);
    fit(X, T, rng, cfg_.epochs_scratch);
  }

  void continue_training(const Matrix& X, const Matrix& T, SeedStream& rng) override {
    require_trained();
    fit(X, T, rng, cfg_.epochs_cont);
  }

  /// Basis functions at the columns of X, one row per point.
  Matrix features(const Matrix& X) const {
    const Eigen::Index P = static_cast<Eigen::Index>(body_.param_count());
    const Matrix H = body_.forward_with(net_.params.head(P), X);
    Matrix Phi(H.cols(), H.rows() + 1);
    Phi.leftCols(H.rows()) = H.transpose();
    Phi.col(H.rows()).setOnes();
    return Phi;
  }

  std::optional<NormalPrediction> predict_normal(const Matrix& X) const override {
    require_trained();
    const Matrix Phi = features(X);
    NormalPrediction np;
    const double m = scaler_.mean()[0], s = scaler_.std()[0];
    np.mean = (Phi * head_.mean).array() * s + m;
    const Matrix V = head_.chol.triangularView<Eigen::Lower>().solve(Phi.transpose());
    np.sd = V.colwise().squaredNorm().transpose().cwiseMax(0.0).cwiseSqrt() * s;
    return np;
  }

  PredictionSet predict_samples(const Matrix& X, int n_mc, SeedStream& rng) const override {
    require_trained();
    if (n_mc < 1) throw std::invalid_argument("neural-linear: n_mc must be >= 1");
    const Matrix draws = blr_sample(head_, features(X), n_mc, rng);
    PredictionSet ps;
    for (int i = 0; i < n_mc; ++i) ps.samples.push_back(scaler_.inverse(draws.row(i)));
    return ps;
  }

 private:
  void fit(const Matrix& X, const Matrix& T, SeedStream& rng, int epochs) {
    if (T.rows() != 1) throw std::invalid_argument("neural-linear: scalar targets only");
    scaler_ = TargetScaler(T);
    const Matrix S = scaler_.forward(T);
    const auto stats = nn::fit_network(net_, X, S, {cfg_.base_lr, epochs, cfg_.batch_size}, rng, cfg_.augment);
    epochs_ += stats.epochs_run;
    if (stats.epochs_run > 0) last_loss_ = stats.final_loss();
    head_ = neural_linear_fit_head(features(X), S.row(0).transpose(), cfg_.nl_alpha, cfg_.nl_beta);
    trained_ = true;
  }

  SurrogateConfig cfg_;
  nn::Network net_;
  nn::Network body_;
  TargetScaler scaler_;
  BlrPosterior head_;
  bool trained_ = false;
  long epochs_ = 0;
  double last_loss_ = 0.0;
};

}  // namespace auxbo
