#pragma once

// Bayes by Backprop: a factorized normal posterior over every network weight,
// w = mu + softplus(rho) * eps, trained on MSE + kl_weight * KL(q || p) / N
// with one reparameterized draw per minibatch.

#include <cmath>
#include <string>

#include "auxbo/nn/arch.hpp"
#include "auxbo/surrogates/surrogate.hpp"

namespace auxbo {

enum class TrainingPhase { scratch, continued };

/// KL weight at `epoch`: exponential annealing 10^(epoch/500 - 5) from
/// scratch, constant 1e-3 during continued training.
inline double bbb_kl_weight(int epoch, TrainingPhase phase) {
  if (epoch < 0) throw std::invalid_argument("bbb_kl_weight: negative epoch");
  if (phase == TrainingPhase::continued) return 1e-3;
  return std::pow(10.0, epoch / 500.0 - 5.0);
}

namespace detail {
inline double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }
inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
}  // namespace detail

class BbbSurrogate final : public Surrogate {
 public:
  /// Without annealing the KL weight is the continued-training constant in
  /// both phases.
  static constexpr double kConstantKlWeight = 1e-3;

  BbbSurrogate(SurrogateConfig cfg, nn::Shape input, std::size_t outputs, std::string name = "bbb")
      : cfg_(std::move(cfg)), net_(nn::build_network(cfg_.arch, input, outputs)), name_(std::move(name)) {
    if (!(cfg_.bbb_prior_sd > 0.0)) throw std::invalid_argument("bbb: prior sd must be positive");
  }

  std::string name() const override { return name_; }
  bool trained() const override { return trained_; }
  long epochs_consumed() const override { return epochs_; }
  double last_loss() const override { return last_loss_; }

  const nn::ParamVector& mean() const { return mu_; }
  nn::ParamVector& rho() { return rho_; }
  nn::ParamVector posterior_sd() const { return rho_.unaryExpr([](double r) { return detail::softplus(r); }); }

  double kl_weight(int epoch, TrainingPhase phase) const {
    return cfg_.bbb_kl_anneal ? bbb_kl_weight(epoch, phase) : kConstantKlWeight;
  }

  void train_from_scratch(const Matrix& X, const Matrix& T, SeedStream& rng) override {
    auto init = rng.child("init");
    net_.init(init);
    mu_ = net_.params;
    rho_ = nn::ParamVector::Constant(mu_.size(), cfg_.bbb_init_rho);
    fit(X, T, rng, cfg_.epochs_scratch, TrainingPhase::scratch);
    trained_ = true;
  }

  void continue_training(const Matrix& X, const Matrix& T, SeedStream& rng) override {
    require_trained();
    fit(X, T, rng, cfg_.epochs_cont, TrainingPhase::continued);
  }

  PredictionSet predict_samples(const Matrix& X, int n_mc, SeedStream& rng) const override {
    require_trained();
    if (n_mc < 1) throw std::invalid_argument("bbb: n_mc must be >= 1");
    const nn::ParamVector sd = posterior_sd();
    PredictionSet ps;
    nn::ParamVector w(mu_.size());
    for (int i = 0; i < n_mc; ++i) {
      for (Eigen::Index k = 0; k < w.size(); ++k) w[k] = mu_[k] + sd[k] * rng.normal();
      ps.samples.push_back(scaler_.inverse(net_.forward_with(w, X)));
    }
    return ps;
  }

  /// KL(q || N(0, prior_sd^2)) summed over weights.
  double kl() const {
    const double sp = cfg_.bbb_prior_sd;
    double total = 0.0;
    for (Eigen::Index k = 0; k < mu_.size(); ++k) {
      const double s = detail::softplus(rho_[k]);
      total += std::log(sp / s) + (s * s + mu_[k] * mu_[k]) / (2.0 * sp * sp) - 0.5;
    }
    return total;
  }

 private:
  void fit(const Matrix& X, const Matrix& T, SeedStream& rng, int epochs, TrainingPhase phase) {
    scaler_ = TargetScaler(T);
    const Matrix S = scaler_.forward(T);
    const Eigen::Index P = mu_.size();
    const double n_train = static_cast<double>(X.cols());
    const double sp2 = cfg_.bbb_prior_sd * cfg_.bbb_prior_sd;

    nn::ParamVector theta(2 * P);
    theta << mu_, rho_;
    nn::Workspace ws;
    nn::ParamVector w(P), eps(P), gw(P);
    Matrix dout;
    auto noise = rng.child("weights");
    nn::StepFn step = [&](const Matrix& x, const Matrix& t, int epoch, nn::ParamVector& grad) {
      const auto mu = theta.head(P);
      const auto rho = theta.tail(P);
      for (Eigen::Index k = 0; k < P; ++k) {
        eps[k] = noise.normal();
        w[k] = mu[k] + detail::softplus(rho[k]) * eps[k];
      }
      const Matrix y = net_.forward(w, x, ws);
      const double data = nn::mse(y, t, &dout);
      if (!std::isfinite(data)) return data;
      gw.setZero();
      net_.backward(w, ws, dout, gw);
      const double beta = kl_weight(epoch, phase) / n_train;
      double kl = 0.0;
      for (Eigen::Index k = 0; k < P; ++k) {
        const double s = detail::softplus(rho[k]);
        kl += std::log(cfg_.bbb_prior_sd / s) + (s * s + mu[k] * mu[k]) / (2.0 * sp2) - 0.5;
        grad[k] = gw[k] + beta * mu[k] / sp2;
        grad[P + k] = (gw[k] * eps[k] + beta * (-1.0 / s + s / sp2)) * detail::sigmoid(rho[k]);
      }
      return data + beta * kl;
    };
    const auto stats = nn::run_epochs(theta, step, X, S, {cfg_.base_lr, epochs, cfg_.batch_size}, rng, cfg_.augment);
    mu_ = theta.head(P);
    rho_ = theta.tail(P);
    net_.params = mu_;
    epochs_ += stats.epochs_run;
    if (stats.epochs_run > 0) last_loss_ = stats.final_loss();
  }

  SurrogateConfig cfg_;
  nn::Network net_;
  std::string name_;
  nn::ParamVector mu_, rho_;
  TargetScaler scaler_;
  bool trained_ = false;
  long epochs_ = 0;
  double last_loss_ = 0.0;
};

}  // namespace auxbo
