#pragma once

// Deep ensemble: independently initialized networks whose spread is the
// predictive uncertainty. No variance head, no bootstrapping.

#include <string>
#include <vector>

#include "auxbo/nn/arch.hpp"
#include "auxbo/parallel.hpp"
#include "auxbo/surrogates/surrogate.hpp"

namespace auxbo {

class EnsembleSurrogate final : public Surrogate {
 public:
  EnsembleSurrogate(SurrogateConfig cfg, nn::Shape input, std::size_t outputs, std::string name = "ensemble")
      : cfg_(std::move(cfg)), input_(input), outputs_(outputs), name_(std::move(name)) {
    if (cfg_.ensemble_size == 0) throw std::invalid_argument("ensemble: size must be >= 1");
    nn::validate_architecture(cfg_.arch);
  }

  std::string name() const override { return name_; }
  bool trained() const override { return !members_.empty(); }
  long epochs_consumed() const override { return epochs_; }
  double last_loss() const override { return last_loss_; }
  const std::vector<nn::Network>& members() const { return members_; }
  std::vector<nn::Network>& members() { return members_; }

  void train_from_scratch(const Matrix& X, const Matrix& T, SeedStream& rng) override {
    members_.clear();
    for (std::size_t m = 0; m < cfg_.ensemble_size; ++m) {
      members_.push_back(nn::build_network(cfg_.arch, input_, outputs_));
      auto init = rng.child("member:" + std::to_string(m) + "/init");
      members_.back().init(init);
    }
    fit(X, T, rng, cfg_.epochs_scratch);
  }

  void continue_training(const Matrix& X, const Matrix& T, SeedStream& rng) override {
    require_trained();
    fit(X, T, rng, cfg_.epochs_cont);
  }

  PredictionSet predict_samples(const Matrix& X, int, SeedStream&) const override {
    require_trained();
    PredictionSet ps;
    ps.samples.reserve(members_.size());
    for (const auto& net : members_) ps.samples.push_back(scaler_.inverse(net.forward(X)));
    return ps;
  }

 private:
  void fit(const Matrix& X, const Matrix& T, SeedStream& rng, int epochs) {
    scaler_ = TargetScaler(T);
    const Matrix S = scaler_.forward(T);
    nn::TrainConfig tc{cfg_.base_lr, epochs, cfg_.batch_size};
    std::vector<double> losses(members_.size(), 0.0);
    parallel_for(members_.size(), cfg_.threads, [&](std::size_t m) {
      auto shuffle = rng.child("member:" + std::to_string(m) + "/shuffle");
      losses[m] = nn::fit_network(members_[m], X, S, tc, shuffle, cfg_.augment).final_loss();
    });
    epochs_ += static_cast<long>(epochs) * static_cast<long>(members_.size());
    last_loss_ = 0.0;
    for (double l : losses) last_loss_ += l / static_cast<double>(losses.size());
  }

  SurrogateConfig cfg_;
  nn::Shape input_;
  std::size_t outputs_;
  std::string name_;
  std::vector<nn::Network> members_;
  TargetScaler scaler_;
  long epochs_ = 0;
  double last_loss_ = 0.0;
};

}  // namespace auxbo
