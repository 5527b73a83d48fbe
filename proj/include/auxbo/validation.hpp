#pragma once

// Oracle-backed self-checks run by `auxbo validate`.

#include <boost/math/distributions/normal.hpp>

#include <chrono>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "auxbo/acquisition.hpp"
#include "auxbo/gp.hpp"
#include "auxbo/nn/network.hpp"
#include "auxbo/oracle/dense.hpp"
#include "auxbo/oracle/finite_diff.hpp"
#include "auxbo/oracle/mie_homogeneous.hpp"
#include "auxbo/registry.hpp"
#include "auxbo/tasks/nanoparticle.hpp"

namespace auxbo::validation {

struct Check {
  std::string suite;
  std::string name;
  bool pass = false;
  std::string detail;
};

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> s{"mie", "gradients", "gp", "acquisition"};
  return s;
}

namespace detail {

inline std::string sci(double v) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << v;
  return os.str();
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

/// Least-squares slope of log(y) against log(x).
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) mx += std::log(x[i]) / n, my += std::log(y[i]) / n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

}  // namespace detail

/// Six silica layers against the homogeneous-sphere reference.
inline Check mie_reduction(const std::vector<double>& thicknesses = {40, 55, 60, 30, 70, 45}) {
  using namespace nanoparticle;
  const auto t0 = std::chrono::steady_clock::now();
  double radius = 0.0;
  std::vector<mie::Shell> shells;
  for (double t : thicknesses) shells.push_back({radius += t, kEpsSilica});
  const Vector z = spectrum_of([&](double) { return shells; });
  double worst = 0.0;
  for (std::size_t i = 0; i < kSpectrumSize; ++i) {
    const double lam = wavelength(i);
    const double x = 2.0 * std::numbers::pi * radius * std::sqrt(kEpsWater) / lam;
    const double ref = oracle::homogeneous_sphere_sigma(radius, kEpsSilica, kEpsWater, lam, 2 * mie::truncation_order(x));
    worst = std::max(worst, detail::rel_err(z[i], ref));
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {"mie", "homogeneous reduction", worst < 1e-6 && secs < 60.0,
          "max rel err " + detail::sci(worst) + " (< 1e-6), " + detail::sci(secs) + " s (< 60 s)"};
}

/// log-log slope of a 5 nm silica sphere over 600-750 nm.
inline Check mie_rayleigh() {
  using namespace nanoparticle;
  std::vector<mie::Shell> shells;
  for (std::size_t l = 0; l < kLayers; ++l) shells.push_back({5.0 * static_cast<double>(l + 1) / kLayers, kEpsSilica});
  const Vector z = spectrum_of([&](double) { return shells; });
  std::vector<double> lam, sig;
  for (std::size_t i = 0; i < kSpectrumSize; ++i)
    if (wavelength(i) >= 600.0) lam.push_back(wavelength(i)), sig.push_back(z[i]);
  const double slope = detail::loglog_slope(lam, sig);
  std::ostringstream os;
  os << "slope " << slope << " (-4 +/- 0.1)";
  return {"mie", "Rayleigh slope", std::abs(slope + 4.0) <= 0.1, os.str()};
}

inline Check mie_doubling(const std::vector<double>& thicknesses = {40, 55, 60, 30, 70, 45}) {
  const Vector a = nanoparticle::scatter_spectrum(thicknesses, 1);
  const Vector b = nanoparticle::scatter_spectrum(thicknesses, 2);
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, detail::rel_err(a[i], b[i]));
  return {"mie", "n_max doubling", worst <= 1e-9, "max rel change " + detail::sci(worst) + " (<= 1e-9)"};
}

inline nn::Network gradient_net_dense() {
  nn::Network net({4, 1, 1});
  net.dense(6).relu().dense(2);
  return net;
}

inline nn::Network gradient_net_conv() {
  nn::Network net({2, 8, 8});
  net.conv(3).relu().maxpool().global_avg_pool().dense(2);
  return net;
}

/// Backprop vs central differences, 10 parameters per seed, 5 seeds.
inline Check gradient_check(const std::string& label, nn::Network (*make)(), std::size_t seeds = 5) {
  double worst = 0.0;
  for (std::size_t s = 0; s < seeds; ++s) {
    SeedStream rng(s, "gradcheck/" + label);
    nn::Network net = make();
    net.init(rng);
    // Non-zero biases so every layer's bias path is exercised.
    for (Eigen::Index k = 0; k < net.params.size(); ++k) net.params[k] += 0.1 * rng.normal();
    nn::Matrix x(static_cast<Eigen::Index>(net.input_shape().size()), 3), t(2, 3);
    for (Eigen::Index k = 0; k < x.size(); ++k) x.data()[k] = rng.normal();
    for (Eigen::Index k = 0; k < t.size(); ++k) t.data()[k] = rng.normal();
    for (const auto& c : oracle::check_gradients(net, x, t, 10, rng)) worst = std::max(worst, c.rel_err);
  }
  return {"gradients", label, worst < 1e-4, "max rel err " + detail::sci(worst) + " (< 1e-4)"};
}

/// GP fit/predict on 5 random points against the dense-inverse reference.
inline Check gp_oracle(std::uint64_t seed = 11) {
  SeedStream rng(seed, "validate/gp");
  Matrix X(2, 5), Xs(2, 7);
  Eigen::VectorXd y(5);
  for (Eigen::Index k = 0; k < X.size(); ++k) X.data()[k] = rng.uniform(-1, 1);
  for (Eigen::Index k = 0; k < Xs.size(); ++k) Xs.data()[k] = rng.uniform(-1, 1);
  for (Eigen::Index k = 0; k < y.size(); ++k) y[k] = rng.normal();
  const GpModel m = gp_fit(X, y);
  const double l = m.hyper.lengthscale, sf2 = m.hyper.signal_var;
  const auto ref = oracle::gp_predict(X, y, Xs, l, sf2, m.jitter);
  const auto p = gp_predict(m, Xs);
  double worst = detail::rel_err(m.log_marginal, oracle::gp_log_marginal(X, y, l, sf2, m.jitter));
  for (Eigen::Index j = 0; j < Xs.cols(); ++j) {
    worst = std::max(worst, detail::rel_err(p.mean[j], ref.mean[j]));
    worst = std::max(worst, detail::rel_err(p.sd[j] * p.sd[j], ref.var[j]));
  }
  const auto at_train = gp_predict(m, X);
  const double interp = (at_train.mean - y).cwiseAbs().maxCoeff();
  return {"gp", "dense-inverse oracle", worst < 1e-8 && interp < 1e-6,
          "max rel err " + detail::sci(worst) + " (< 1e-8), max |mu - y| at training points " + detail::sci(interp) +
              " (< 1e-6)"};
}

/// ei_mc on 10^6 normal draws vs ei_analytic on a 5x5 (gamma, sigma) grid.
/// Draws are stratified (one uniform per equal-probability cell, mapped
/// through the normal quantile) to keep the MC error well below the 1%
/// tolerance in the tails.
inline Check ei_consistency(std::size_t draws = 1000000, std::uint64_t seed = 5) {
  SeedStream rng(seed, "validate/ei");
  const boost::math::normal_distribution<double> stdn;
  std::vector<double> base(draws);
  for (std::size_t i = 0; i < draws; ++i)
    base[i] = boost::math::quantile(stdn, (static_cast<double>(i) + rng.uniform()) / static_cast<double>(draws));
  double worst = 0.0;
  std::vector<double> s(draws);
  for (double sigma : {0.1, 1.0}) {
    for (int gi = 0; gi < 5; ++gi) {
      const double gamma = -2.0 + gi;
      const double y_best = 0.0, mu = gamma * sigma;
      for (std::size_t i = 0; i < draws; ++i) s[i] = mu + sigma * base[i];
      worst = std::max(worst, detail::rel_err(ei_mc(s, y_best), ei_analytic(mu, sigma, y_best)));
    }
  }
  return {"acquisition", "EI Monte Carlo vs closed form", worst < 0.01, "max rel err " + detail::sci(worst) + " (< 1e-2)"};
}

inline std::vector<Check> run_suite(const std::string& suite) {
  if (suite == "mie") return {mie_reduction(), mie_rayleigh(), mie_doubling()};
  if (suite == "gradients") return {gradient_check("dense 2-layer", gradient_net_dense), gradient_check("conv+maxpool+gap", gradient_net_conv)};
  if (suite == "gp") return {gp_oracle()};
  if (suite == "acquisition") return {ei_consistency()};
  throw ConfigError("unknown suite '" + suite + "' (expected mie, gradients, gp, acquisition)");
}

}  // namespace auxbo::validation
