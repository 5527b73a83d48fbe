#pragma once

// Reference scattering cross-section of a homogeneous sphere from the
// closed-form Mie coefficients, evaluated with the standard library's
// spherical Bessel functions. Shares no code with the multilayer solver.

#include <cmath>
#include <complex>
#include <numbers>

namespace auxbo::oracle {

/// sigma in nm^2 for a sphere of radius R (nm) and permittivity eps in a
/// host of permittivity eps_host, summed over n = 1..nmax.
inline double homogeneous_sphere_sigma(double radius_nm, double eps, double eps_host, double lambda_nm, int nmax) {
  const double k = 2.0 * std::numbers::pi * std::sqrt(eps_host) / lambda_nm;
  const double x = k * radius_nm;
  const double m = std::sqrt(eps / eps_host);
  const double mx = m * x;
  auto j = [](int n, double z) { return std::sph_bessel(static_cast<unsigned>(n), z); };
  auto y = [](int n, double z) { return std::sph_neumann(static_cast<unsigned>(n), z); };
  auto psi = [&](int n, double z) { return z * j(n, z); };
  auto dpsi = [&](int n, double z) { return z * j(n - 1, z) - n * j(n, z); };
  auto xi = [&](int n, double z) { return std::complex<double>(z * j(n, z), z * y(n, z)); };
  auto dxi = [&](int n, double z) {
    return std::complex<double>(z * j(n - 1, z) - n * j(n, z), z * y(n - 1, z) - n * y(n, z));
  };
  double s = 0.0;
  for (int n = 1; n <= nmax; ++n) {
    const auto a = (m * psi(n, mx) * dpsi(n, x) - psi(n, x) * dpsi(n, mx)) / (m * psi(n, mx) * dxi(n, x) - xi(n, x) * dpsi(n, mx));
    const auto b = (psi(n, mx) * dpsi(n, x) - m * psi(n, x) * dpsi(n, mx)) / (psi(n, mx) * dxi(n, x) - m * xi(n, x) * dpsi(n, mx));
    s += (2 * n + 1) * (std::norm(a) + std::norm(b));
  }
  return 2.0 * std::numbers::pi / (k * k) * s;
}

}  // namespace auxbo::oracle
