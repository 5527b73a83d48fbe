#pragma once

// Expected improvement (closed form, Monte Carlo, and Monte Carlo through a
// known objective h) and its maximization over a finite candidate pool.

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "auxbo/surrogates/surrogate.hpp"

namespace auxbo {

enum class AcqKind { ei, ei_mc, ei_mc_aux };

inline std::string to_string(AcqKind k) {
  switch (k) {
    case AcqKind::ei: return "ei";
    case AcqKind::ei_mc: return "ei-mc";
    case AcqKind::ei_mc_aux: return "ei-mc-aux";
  }
  return "?";
}

inline AcqKind parse_acq(std::string_view s) {
  if (s == "ei" || s == "ei-analytic") return AcqKind::ei;
  if (s == "ei-mc") return AcqKind::ei_mc;
  if (s == "ei-mc-aux") return AcqKind::ei_mc_aux;
  throw std::invalid_argument("unknown acquisition '" + std::string(s) + "' (expected ei, ei-mc, ei-mc-aux)");
}

inline double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }
inline double std_normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

inline double ei_analytic(double mu, double sigma, double y_best) {
  if (sigma < 0.0) throw std::invalid_argument("ei_analytic: negative sigma");
  if (sigma == 0.0) return std::max(mu - y_best, 0.0);
  const double g = (mu - y_best) / sigma;
  return std::max(0.0, sigma * (g * std_normal_cdf(g) + std_normal_pdf(g)));
}

inline double ei_mc(std::span<const double> samples, double y_best) {
  if (samples.empty()) throw std::invalid_argument("ei_mc: no samples");
  double s = 0.0;
  for (double v : samples) s += std::max(v - y_best, 0.0);
  return s / static_cast<double>(samples.size());
}

using Objective = std::function<double(std::span<const double>)>;

/// EI with h applied to each posterior sample before the max.
inline double ei_mc_aux(std::span<const Vector> samples, const Objective& h, double y_best) {
  if (samples.empty()) throw std::invalid_argument("ei_mc_aux: no samples");
  double s = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    double v;
    try {
      v = h(samples[i]);
    } catch (const std::exception& e) {
      throw std::runtime_error("ei_mc_aux: objective failed on sample " + std::to_string(i) + ": " + e.what());
    }
    s += std::max(v - y_best, 0.0);
  }
  return s / static_cast<double>(samples.size());
}

struct AcquisitionConfig {
  AcqKind kind = AcqKind::ei_mc;
  std::size_t pool_size = 100000;
  int n_mc = 30;
  std::size_t chunk = 1024;
};

/// EI of every column of X. In aux mode `h` maps a surrogate output column
/// to the objective; in scalar modes the output is the objective itself.
inline std::vector<double> score_candidates(const Surrogate& model, const Matrix& X, AcqKind kind, const Objective& h,
                                            double y_best, int n_mc, SeedStream& rng) {
  std::vector<double> out(static_cast<std::size_t>(X.cols()));
  if (kind == AcqKind::ei) {
    const auto p = model.predict_normal(X);
    if (!p) throw std::invalid_argument("acquisition 'ei' requires a surrogate with a closed-form predictive (gp, neural-linear)");
    for (Eigen::Index j = 0; j < X.cols(); ++j) out[j] = ei_analytic(p->mean[j], p->sd[j], y_best);
    return out;
  }
  const PredictionSet ps = model.predict_samples(X, n_mc, rng);
  const std::size_t S = ps.n_mc();
  if (kind == AcqKind::ei_mc) {
    std::vector<double> col(S);
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
      for (std::size_t i = 0; i < S; ++i) col[i] = ps.samples[i](0, j);
      out[j] = ei_mc(col, y_best);
    }
    return out;
  }
  const Eigen::Index D = ps.samples.front().rows();
  std::vector<Vector> zs(S, Vector(D));
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    for (std::size_t i = 0; i < S; ++i)
      for (Eigen::Index d = 0; d < D; ++d) zs[i][d] = ps.samples[i](d, j);
    out[j] = ei_mc_aux(zs, h, y_best);
  }
  return out;
}

struct PoolChoice {
  std::size_t index = 0;
  double value = -std::numeric_limits<double>::infinity();
  double runner_up = -std::numeric_limits<double>::infinity();
};

/// Produces encoded candidates [start, start + n) as columns.
using CandidateEncoder = std::function<Matrix(std::size_t start, std::size_t n)>;

/// Argmax of EI over `count` encoded candidates, lowest index on ties.
/// Candidates are scored in chunks; every chunk sees the same posterior
/// draws.
inline PoolChoice maximize_over_pool(const Surrogate& model, std::size_t count, const CandidateEncoder& encode,
                                     const AcquisitionConfig& cfg, const Objective& h, double y_best,
                                     const SeedStream& rng) {
  if (count < 1) throw PoolExhausted("maximize_over_pool: empty pool");
  PoolChoice best;
  const std::size_t chunk = std::max<std::size_t>(1, cfg.chunk);
  for (std::size_t start = 0; start < count; start += chunk) {
    const std::size_t n = std::min(chunk, count - start);
    SeedStream draws = rng;
    const auto scores = score_candidates(model, encode(start, n), cfg.kind, h, y_best, cfg.n_mc, draws);
    for (std::size_t j = 0; j < n; ++j) {
      const double v = scores[j];
      if (!std::isfinite(v)) throw std::runtime_error("maximize_over_pool: non-finite acquisition value");
      if (v > best.value) {
        best.runner_up = best.value;
        best.value = v;
        best.index = start + j;
      } else if (v > best.runner_up) {
        best.runner_up = v;
      }
    }
  }
  return best;
}

inline PoolChoice maximize_over_pool(const Surrogate& model, const Matrix& pool, const AcquisitionConfig& cfg,
                                     const Objective& h, double y_best, const SeedStream& rng) {
  const CandidateEncoder cols = [&](std::size_t start, std::size_t n) -> Matrix {
    return pool.middleCols(static_cast<Eigen::Index>(start), static_cast<Eigen::Index>(n));
  };
  return maximize_over_pool(model, static_cast<std::size_t>(pool.cols()), cols, cfg, h, y_best, rng);
}

}  // namespace auxbo
