#pragma once

#include <Eigen/Dense>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "auxbo/core.hpp"
#include "auxbo/nn/train.hpp"

namespace auxbo {

using Matrix = Eigen::MatrixXd;

/// Posterior draws of the surrogate output: samples[i] is D_out x batch.
struct PredictionSet {
  std::vector<Matrix> samples;

  std::size_t n_mc() const { return samples.size(); }
  std::size_t batch() const { return samples.empty() ? 0 : static_cast<std::size_t>(samples.front().cols()); }
  std::size_t d_out() const { return samples.empty() ? 0 : static_cast<std::size_t>(samples.front().rows()); }
};

/// Per-point normal predictive distribution of a scalar surrogate.
struct NormalPrediction {
  Eigen::VectorXd mean;
  Eigen::VectorXd sd;
};

/// Per-output standardization of training targets (rows of T).
class TargetScaler {
 public:
  TargetScaler() = default;
  explicit TargetScaler(const Matrix& T) {
    const Eigen::Index D = T.rows(), N = T.cols();
    mean_ = Eigen::VectorXd::Zero(D);
    std_ = Eigen::VectorXd::Ones(D);
    if (N == 0) throw std::invalid_argument("TargetScaler: no targets");
    for (Eigen::Index d = 0; d < D; ++d) {
      if (N == 1) {
        mean_[d] = T(d, 0);
        clamped_ = true;
        continue;
      }
      const Eigen::VectorXd row = T.row(d).transpose();
      const auto s = standardize_targets(std::span<const double>(row.data(), static_cast<std::size_t>(N)));
      mean_[d] = s.mean;
      std_[d] = s.std;
      clamped_ = clamped_ || s.clamped;
    }
  }

  Matrix forward(const Matrix& T) const { return (T.colwise() - mean_).array().colwise() / std_.array(); }
  Matrix inverse(const Matrix& S) const { return (S.array().colwise() * std_.array()).matrix().colwise() + mean_; }
  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::VectorXd& std() const { return std_; }
  bool clamped() const { return clamped_; }

 private:
  Eigen::VectorXd mean_;
  Eigen::VectorXd std_;
  bool clamped_ = false;
};

struct SurrogateConfig {
  std::string arch = "mlp:256x8";
  int epochs_scratch = 1000;
  int epochs_cont = 100;
  double base_lr = 1e-3;
  int batch_size = 0;  // 0 -> min(32, N)
  std::size_t ensemble_size = 10;
  std::size_t threads = 1;  // ensemble members trained concurrently
  double bbb_prior_sd = 1.0;
  double bbb_init_rho = -5.0;
  bool bbb_kl_anneal = false;
  double nl_alpha = 1.0;
  double nl_beta = 100.0;
  nn::Augmenter augment;  // applied to training minibatches only
};

/// Probabilistic model of X -> targets. Inputs are columns of X; targets are
/// columns of T in raw units (standardization is internal).
class Surrogate {
 public:
  virtual ~Surrogate() = default;

  virtual std::string name() const = 0;

  virtual void train_from_scratch(const Matrix& X, const Matrix& T, SeedStream& rng) = 0;
  /// Warm-started training from the current parameters with a fresh
  /// learning-rate cycle.
  virtual void continue_training(const Matrix& X, const Matrix& T, SeedStream& rng) = 0;

  virtual bool trained() const = 0;
  /// Total optimizer epochs spent so far.
  virtual long epochs_consumed() const { return 0; }
  /// Mean training loss of the last epoch of the most recent training call.
  virtual double last_loss() const { return 0.0; }

  /// `n_mc` posterior draws at the columns of X, in raw target units.
  virtual PredictionSet predict_samples(const Matrix& X, int n_mc, SeedStream& rng) const = 0;

  /// Closed-form normal predictive, when the model has one.
  virtual std::optional<NormalPrediction> predict_normal(const Matrix&) const { return std::nullopt; }

 protected:
  void require_trained() const {
    if (!trained()) throw std::logic_error(name() + ": model has not been trained");
  }
};

}  // namespace auxbo
