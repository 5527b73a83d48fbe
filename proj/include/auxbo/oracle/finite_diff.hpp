#pragma once

// Central finite-difference check of network gradients on the MSE loss.

#include <cmath>
#include <vector>

#include "auxbo/core.hpp"
#include "auxbo/nn/network.hpp"

namespace auxbo::oracle {

struct GradientCheck {
  std::size_t index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double rel_err = 0.0;
};

/// Compares backprop against (L(p + e) - L(p - e)) / 2e at `samples` random
/// parameter indices. The relative error uses max(|a|, |n|, 1e-8) as scale.
inline std::vector<GradientCheck> check_gradients(nn::Network& net, const nn::Matrix& x, const nn::Matrix& t,
                                                  std::size_t samples, SeedStream& rng, double eps = 1e-4) {
  nn::Workspace ws;
  nn::Matrix dout;
  const nn::Matrix y = net.forward(net.params, x, ws);
  nn::mse(y, t, &dout);
  nn::ParamVector grad = nn::ParamVector::Zero(net.params.size());
  net.backward(net.params, ws, dout, grad);

  std::vector<GradientCheck> out;
  for (std::size_t s = 0; s < samples; ++s) {
    const auto k = static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(net.params.size())));
    nn::ParamVector p = net.params;
    p[k] += eps;
    const double up = nn::mse(net.forward_with(p, x), t);
    p[k] -= 2.0 * eps;
    const double down = nn::mse(net.forward_with(p, x), t);
    GradientCheck c;
    c.index = static_cast<std::size_t>(k);
    c.analytic = grad[k];
    c.numeric = (up - down) / (2.0 * eps);
    c.rel_err = std::abs(c.analytic - c.numeric) / std::max({std::abs(c.analytic), std::abs(c.numeric), 1e-8});
    out.push_back(c);
  }
  return out;
}

}  // namespace auxbo::oracle
