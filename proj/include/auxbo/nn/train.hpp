#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "auxbo/core.hpp"
#include "auxbo/nn/network.hpp"

namespace auxbo::nn {

/// Learning rate of a single cosine-annealing cycle, decaying from base_lr to 0.
inline double cosine_lr(int epoch, int total_epochs, double base_lr) {
  if (total_epochs <= 0) throw std::invalid_argument("cosine_lr: total_epochs must be positive");
  if (epoch < 0 || epoch >= total_epochs) throw std::out_of_range("cosine_lr: epoch outside [0, total_epochs)");
  return base_lr * 0.5 * (1.0 + std::cos(std::numbers::pi * epoch / total_epochs));
}

struct AdamHyper {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  ParamVector m;
  ParamVector v;
  long step = 0;
};

inline void adam_step(ParamVector& params, const ParamVector& grad, AdamState& s, double lr, const AdamHyper& h = {}) {
  if (grad.size() != params.size()) throw std::invalid_argument("adam_step: gradient/parameter size mismatch");
  if (!grad.allFinite()) throw DivergenceError("adam_step: non-finite gradient");
  if (s.m.size() != params.size()) {
    s.m = ParamVector::Zero(params.size());
    s.v = ParamVector::Zero(params.size());
    s.step = 0;
  }
  ++s.step;
  const double c1 = 1.0 - std::pow(h.beta1, static_cast<double>(s.step));
  const double c2 = 1.0 - std::pow(h.beta2, static_cast<double>(s.step));
  const double step = lr / c1, inv_c2 = 1.0 / c2;
  double* p = params.data();
  double* m = s.m.data();
  double* v = s.v.data();
  const double* g = grad.data();
  for (Eigen::Index i = 0, n = params.size(); i < n; ++i) {
    m[i] = h.beta1 * m[i] + (1.0 - h.beta1) * g[i];
    v[i] = h.beta2 * v[i] + (1.0 - h.beta2) * g[i] * g[i];
    p[i] -= step * m[i] / (std::sqrt(v[i] * inv_c2) + h.eps);
  }
}

struct TrainConfig {
  double base_lr = 1e-3;
  int epochs = 1000;
  int batch_size = 0;  // 0 -> min(32, N)
};

/// In-place transform of a minibatch of inputs (one sample per column).
using Augmenter = std::function<void(Matrix& inputs, SeedStream& rng)>;

struct TrainStats {
  std::vector<double> epoch_loss;
  int epochs_run = 0;
  double final_loss() const { return epoch_loss.empty() ? 0.0 : epoch_loss.back(); }
};

/// Loss and gradient of one minibatch; `epoch` lets the objective depend on
/// the schedule position.
using StepFn = std::function<double(const Matrix& x, const Matrix& t, int epoch, ParamVector& grad)>;

/// Shuffled minibatch Adam over a single cosine cycle of `cfg.epochs` epochs.
/// Adam moments start fresh for every call.
inline TrainStats run_epochs(ParamVector& theta, const StepFn& step, const Matrix& X, const Matrix& T,
                             const TrainConfig& cfg, SeedStream& rng, const Augmenter& augment = {}) {
  TrainStats stats;
  const auto N = static_cast<std::size_t>(X.cols());
  if (N == 0) throw std::invalid_argument("train: empty dataset");
  if (T.cols() != X.cols()) throw std::invalid_argument("train: input/target count mismatch");
  if (cfg.epochs <= 0) return stats;
  const std::size_t bs = cfg.batch_size > 0 ? static_cast<std::size_t>(cfg.batch_size) : std::min<std::size_t>(32, N);

  AdamState adam;
  ParamVector grad(theta.size());
  std::vector<std::size_t> order(N);
  std::iota(order.begin(), order.end(), 0);
  Matrix xb, tb;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng.engine());
    const double lr = cosine_lr(epoch, cfg.epochs, cfg.base_lr);
    double total = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < N; start += bs) {
      const std::size_t n = std::min(bs, N - start);
      xb.resize(X.rows(), static_cast<Eigen::Index>(n));
      tb.resize(T.rows(), static_cast<Eigen::Index>(n));
      for (std::size_t k = 0; k < n; ++k) {
        xb.col(static_cast<Eigen::Index>(k)) = X.col(static_cast<Eigen::Index>(order[start + k]));
        tb.col(static_cast<Eigen::Index>(k)) = T.col(static_cast<Eigen::Index>(order[start + k]));
      }
      if (augment) augment(xb, rng);
      grad.setZero();
      const double loss = step(xb, tb, epoch, grad);
      if (!std::isfinite(loss)) throw DivergenceError("train: non-finite loss at epoch " + std::to_string(epoch));
      adam_step(theta, grad, adam, lr);
      total += loss;
      ++batches;
    }
    stats.epoch_loss.push_back(total / static_cast<double>(batches));
    ++stats.epochs_run;
  }
  return stats;
}

/// Trains a deterministic network on mean squared error.
inline TrainStats fit_network(Network& net, const Matrix& X, const Matrix& T, const TrainConfig& cfg, SeedStream& rng,
                              const Augmenter& augment = {}) {
  Workspace ws;
  Matrix dout;
  StepFn step = [&](const Matrix& x, const Matrix& t, int, ParamVector& grad) {
    const Matrix y = net.forward(net.params, x, ws);
    const double loss = mse(y, t, &dout);
    if (!std::isfinite(loss)) return loss;
    net.backward(net.params, ws, dout, grad);
    return loss;
  };
  return run_epochs(net.params, step, X, T, cfg, rng, augment);
}

}  // namespace auxbo::nn
