#pragma once

// Closed-form benchmark functions. Constants follow the standard definitions
// in Surjanovic & Bingham, "Virtual Library of Simulation Experiments"
// (https://www.sfu.ca/~ssurjano/branin.html, .../hart6.html), which match
// Dixon & Szego (1978).

#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>

#include "auxbo/tasks/task.hpp"

namespace auxbo::synthetic {

inline double branin(std::span<const double> x) {
  if (x.size() != 2) throw std::invalid_argument("branin: expected 2 inputs");
  if (!(x[0] >= -5.0 && x[0] <= 10.0 && x[1] >= 0.0 && x[1] <= 15.0))
    throw std::domain_error("branin: input outside [-5,10] x [0,15]");
  constexpr double pi = std::numbers::pi;
  constexpr double a = 1.0;
  constexpr double b = 5.1 / (4.0 * pi * pi);
  constexpr double c = 5.0 / pi;
  constexpr double r = 6.0;
  constexpr double s = 10.0;
  constexpr double t = 1.0 / (8.0 * pi);
  const double q = x[1] - b * x[0] * x[0] + c * x[0] - r;
  return a * q * q + s * (1.0 - t) * std::cos(x[0]) + s;
}

inline constexpr std::array<double, 4> kHartmannAlpha{1.0, 1.2, 3.0, 3.2};
inline constexpr std::array<std::array<double, 6>, 4> kHartmannA{{
    {10.0, 3.0, 17.0, 3.5, 1.7, 8.0},
    {0.05, 10.0, 17.0, 0.1, 8.0, 14.0},
    {3.0, 3.5, 1.7, 10.0, 17.0, 8.0},
    {17.0, 8.0, 0.05, 10.0, 0.1, 14.0},
}};
inline constexpr std::array<std::array<double, 6>, 4> kHartmannP{{
    {0.1312, 0.1696, 0.5569, 0.0124, 0.8283, 0.5886},
    {0.2329, 0.4135, 0.8307, 0.3736, 0.1004, 0.9991},
    {0.2348, 0.1451, 0.3522, 0.2883, 0.3047, 0.6650},
    {0.4047, 0.8828, 0.8732, 0.5743, 0.1091, 0.0381},
}};

/// Global minimizer of the 6-d Hartmann function.
inline constexpr std::array<double, 6> kHartmannArgmin{0.20169, 0.150011, 0.476874, 0.275332, 0.311652, 0.6573};

inline double hartmann6(std::span<const double> x) {
  if (x.size() != 6) throw std::invalid_argument("hartmann6: expected 6 inputs");
  for (double v : x)
    if (!(v >= 0.0 && v <= 1.0)) throw std::domain_error("hartmann6: input outside [0,1]^6");
  double f = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    double e = 0.0;
    for (std::size_t j = 0; j < 6; ++j) {
      const double d = x[j] - kHartmannP[i][j];
      e += kHartmannA[i][j] * d * d;
    }
    f -= kHartmannAlpha[i] * std::exp(-e);
  }
  return f;
}

/// Minimization benchmark exposed for maximization: g(x) = [-f(x)], h = id.
class SyntheticTask final : public Task {
 public:
  enum class Kind { branin, hartmann6 };

  explicit SyntheticTask(Kind kind) : kind_(kind) {
    if (kind_ == Kind::branin)
      bounds_ = {{-5.0, 10.0}, {0.0, 15.0}};
    else
      bounds_ = Bounds(6, Interval{0.0, 1.0});
  }

  std::string name() const override { return kind_ == Kind::branin ? "branin" : "hartmann6"; }
  const Bounds& bounds() const override { return bounds_; }
  std::size_t z_dim() const override { return 1; }
  bool identity_h() const override { return true; }

  double raw(std::span<const double> x) const { return kind_ == Kind::branin ? branin(x) : hartmann6(x); }

  Vector g(std::span<const double> x) const override { return {sign_ * raw(x)}; }

  double h(std::span<const double> z) const override {
    if (z.size() != 1) throw std::invalid_argument("synthetic h: expected scalar z");
    return z[0];
  }

 private:
  Kind kind_;
  Bounds bounds_;
  double sign_ = -1.0;
};

}  // namespace auxbo::synthetic
