#pragma once

// Six-layer nanoparticle (silica core, alternating TiO2 / silica shells) in
// water, labeled by its scattering spectrum on 350..750 nm.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>

#include "auxbo/tasks/mie.hpp"
#include "auxbo/tasks/task.hpp"

namespace auxbo::nanoparticle {

inline constexpr double kEpsSilica = 2.04;
inline constexpr double kEpsWater = 1.77;
inline constexpr std::size_t kLayers = 6;
inline constexpr double kMinThickness = 30.0;
inline constexpr double kMaxThickness = 70.0;
inline constexpr std::size_t kSpectrumSize = 201;

inline double wavelength(std::size_t i) { return 350.0 + 2.0 * static_cast<double>(i); }

/// Relative permittivity of TiO2 at wavelength `lambda_nm`.
inline double eps_tio2(double lambda_nm) {
  const double denom = 1e-6 * lambda_nm * lambda_nm - 0.0803;
  if (std::abs(denom) < 1e-9) throw std::domain_error("eps_tio2: wavelength at dispersion pole");
  return 5.913 + 0.2441 / denom;
}

/// Shells for core radius + 5 thicknesses, with TiO2 in the odd layers.
inline std::vector<mie::Shell> shells_for(std::span<const double> thicknesses, double lambda_nm) {
  std::vector<mie::Shell> shells;
  double r = 0.0;
  for (std::size_t i = 0; i < thicknesses.size(); ++i) {
    r += thicknesses[i];
    shells.push_back({r, (i % 2 == 0) ? kEpsSilica : eps_tio2(lambda_nm)});
  }
  return shells;
}

inline void check_thicknesses(std::span<const double> t) {
  if (t.size() != kLayers) {
    std::ostringstream os;
    os << "nanoparticle: expected " << kLayers << " thicknesses, got " << t.size();
    throw std::invalid_argument(os.str());
  }
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!(t[i] >= kMinThickness && t[i] <= kMaxThickness)) {
      std::ostringstream os;
      os << "nanoparticle: thickness[" << i << "] = " << t[i] << " nm outside [30, 70]";
      throw std::domain_error(os.str());
    }
  }
}

/// Spectrum of an arbitrary stack of shells on the 201-point grid. The task
/// path goes through `scatter_spectrum`; this entry point also serves
/// out-of-range validation geometries.
inline Vector spectrum_of(const std::function<std::vector<mie::Shell>(double)>& shells_at, int nmax_scale = 1) {
  Vector z(kSpectrumSize);
  for (std::size_t i = 0; i < kSpectrumSize; ++i) {
    const double lam = wavelength(i);
    const auto shells = shells_at(lam);
    int nmax = 0;
    if (nmax_scale != 1) {
      const double x = 2.0 * std::numbers::pi * shells.back().outer_radius_nm * std::sqrt(kEpsWater) / lam;
      nmax = nmax_scale * mie::truncation_order(x);
    }
    const double s = mie::multilayer_cross_section(shells, kEpsWater, lam, nmax).sigma_nm2;
    if (s < -1e-12 || !std::isfinite(s)) throw std::runtime_error("scatter_spectrum: invalid cross-section");
    z[i] = std::max(s, 0.0);
  }
  return z;
}

inline Vector scatter_spectrum(std::span<const double> thicknesses, int nmax_scale = 1) {
  check_thicknesses(thicknesses);
  Vector t(thicknesses.begin(), thicknesses.end());
  return spectrum_of([&](double lam) { return shells_for(t, lam); }, nmax_scale);
}

namespace detail {
inline void check_spectrum(std::span<const double> z, const char* who) {
  if (z.size() != kSpectrumSize) {
    std::ostringstream os;
    os << who << ": expected " << kSpectrumSize << " values, got " << z.size();
    throw std::invalid_argument(os.str());
  }
}
// 1-based inclusive sum.
inline double band(std::span<const double> z, std::size_t first, std::size_t last) {
  double s = 0.0;
  for (std::size_t i = first; i <= last; ++i) s += z[i - 1];
  return s;
}
}  // namespace detail

inline double h_narrowband(std::span<const double> z) {
  detail::check_spectrum(z, "h_narrowband");
  const double den = detail::band(z, 1, 125) + detail::band(z, 146, 201);
  if (den == 0.0) throw std::domain_error("h_narrowband: zero denominator");
  return detail::band(z, 126, 145) / den;
}

inline double h_highpass(std::span<const double> z) {
  detail::check_spectrum(z, "h_highpass");
  const double den = detail::band(z, 1, 125);
  if (den == 0.0) throw std::domain_error("h_highpass: zero denominator");
  return detail::band(z, 126, 201) / den;
}

inline void write_spectrum_csv(std::ostream& os, std::span<const double> z) {
  os << "lambda_nm,sigma\n";
  os.precision(17);
  for (std::size_t i = 0; i < z.size(); ++i) os << wavelength(i) << ',' << z[i] << '\n';
}

class NanoparticleTask final : public Task {
 public:
  enum class Objective { narrowband, highpass };

  explicit NanoparticleTask(Objective obj) : obj_(obj), bounds_(kLayers, Interval{kMinThickness, kMaxThickness}) {}

  std::string name() const override { return obj_ == Objective::narrowband ? "np-narrowband" : "np-highpass"; }
  const Bounds& bounds() const override { return bounds_; }
  std::size_t z_dim() const override { return kSpectrumSize; }
  Vector g(std::span<const double> x) const override { return scatter_spectrum(x); }
  double h(std::span<const double> z) const override {
    return obj_ == Objective::narrowband ? h_narrowband(z) : h_highpass(z);
  }

 private:
  Objective obj_;
  Bounds bounds_;
};

}  // namespace auxbo::nanoparticle
