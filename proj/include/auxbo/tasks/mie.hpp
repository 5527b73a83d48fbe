#pragma once

// Scattering cross-section of a layered dielectric sphere (lossless
// materials). Each layer carries a pair of Riccati-Bessel coefficients that
// are propagated outward through 2x2 interface transfer matrices; with real
// permittivities every quantity in the recursion is real.

#include <cmath>
#include <numbers>
#include <span>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace auxbo::mie {

/// A spherical shell described by its outer radius and relative permittivity.
struct Shell {
  double outer_radius_nm = 0.0;
  double eps = 1.0;
};

/// Riccati-Bessel functions psi_n(x) = x j_n(x), chi_n(x) = x y_n(x) and
/// their derivatives for n = 0..nmax.
struct RiccatiBessel {
  std::vector<double> psi, dpsi, chi, dchi;
};

namespace detail {

// Ratio j_n(x) / j_{n-1}(x) from the continued fraction
//   r_n = 1 / ((2n+1)/x - r_{n+1})
// evaluated with the modified Lentz algorithm.
inline double bessel_ratio(int n, double x) {
  constexpr double tiny = 1e-300;
  constexpr double eps = 1e-16;
  double f = tiny;
  double c = f;
  double d = 0.0;
  for (int k = 0; k < 100000; ++k) {
    const double a = (k == 0) ? 1.0 : -1.0;
    const double b = (2.0 * (n + k) + 1.0) / x;
    d = b + a * d;
    if (d == 0.0) d = tiny;
    c = b + a / c;
    if (c == 0.0) c = tiny;
    d = 1.0 / d;
    const double delta = c * d;
    f *= delta;
    if (std::abs(delta - 1.0) < eps) return f;
  }
  throw std::runtime_error("bessel_ratio: continued fraction did not converge");
}

}  // namespace detail

/// psi_n by downward recurrence seeded from the continued fraction, chi_n by
/// upward recurrence.
inline RiccatiBessel riccati_bessel(double x, int nmax) {
  if (!(x > 0.0)) throw std::invalid_argument("riccati_bessel: argument must be positive");
  if (nmax < 1) throw std::invalid_argument("riccati_bessel: nmax must be >= 1");
  RiccatiBessel rb;
  const auto n1 = static_cast<std::size_t>(nmax) + 1;
  rb.psi.assign(n1, 0.0);
  rb.dpsi.assign(n1, 0.0);
  rb.chi.assign(n1, 0.0);
  rb.dchi.assign(n1, 0.0);

  // Unnormalized downward sweep: psi_nmax = 1, psi_{nmax-1} = 1 / r_nmax.
  std::vector<double> p(n1 + 1, 0.0);
  p[n1] = 0.0;
  p[nmax] = 1.0;
  p[nmax - 1] = 1.0 / detail::bessel_ratio(nmax, x);
  for (int n = nmax - 1; n >= 1; --n) p[n - 1] = (2.0 * n + 1.0) / x * p[n] - p[n + 1];

  const double s = std::sin(x);
  const double c = std::cos(x);
  const double psi0 = s;
  const double psi1 = s / x - c;
  const double scale = (std::abs(psi0) > std::abs(psi1)) ? psi0 / p[0] : psi1 / p[1];
  for (std::size_t n = 0; n < n1; ++n) rb.psi[n] = p[n] * scale;

  rb.chi[0] = -c;
  rb.chi[1] = -c / x - s;
  for (int n = 1; n < nmax; ++n) rb.chi[n + 1] = (2.0 * n + 1.0) / x * rb.chi[n] - rb.chi[n - 1];

  rb.dpsi[0] = c;
  rb.dchi[0] = s;
  for (int n = 1; n <= nmax; ++n) {
    rb.dpsi[n] = rb.psi[n - 1] - n * rb.psi[n] / x;
    rb.dchi[n] = rb.chi[n - 1] - n * rb.chi[n] / x;
  }
  return rb;
}

/// Multipole truncation order for host size parameter `x`.
inline int truncation_order(double x) {
  return static_cast<int>(std::ceil(x + 4.0 * std::cbrt(x) + 2.0));
}

struct CrossSection {
  double sigma_nm2 = 0.0;   // total scattering cross-section
  int nmax = 0;             // number of multipole orders summed
  double last_term = 0.0;   // contribution of order nmax to sigma
};

/// Relative size of the highest-order term above which a sum is rejected as
/// not converged.
inline constexpr double kConvergenceTolerance = 1e-8;

/// Scattering cross-section (nm^2) of concentric shells (innermost first)
/// embedded in a host of permittivity `eps_host`. With `nmax == 0` the order
/// is chosen by `truncation_order`.
inline CrossSection multilayer_cross_section(std::span<const Shell> shells, double eps_host, double lambda_nm,
                                             int nmax = 0) {
  if (shells.empty()) throw std::invalid_argument("mie: no shells");
  if (!(lambda_nm > 0.0)) throw std::invalid_argument("mie: wavelength must be positive");
  if (!(eps_host > 0.0)) throw std::invalid_argument("mie: host permittivity must be positive");
  double prev = 0.0;
  for (const auto& s : shells) {
    if (!(s.outer_radius_nm > prev)) throw std::invalid_argument("mie: shell radii must be strictly increasing");
    if (!(s.eps > 0.0)) throw std::invalid_argument("mie: permittivities must be positive (lossless dielectric)");
    prev = s.outer_radius_nm;
  }

  const double k0 = 2.0 * std::numbers::pi / lambda_nm;
  const double m_host = std::sqrt(eps_host);
  const double k_host = k0 * m_host;
  const double x_size = k_host * shells.back().outer_radius_nm;
  if (nmax == 0) nmax = truncation_order(x_size);

  const std::size_t L = shells.size();
  std::vector<double> m(L + 1);
  for (std::size_t l = 0; l < L; ++l) m[l] = std::sqrt(shells[l].eps);
  m[L] = m_host;

  // Functions on both sides of every interface.
  std::vector<RiccatiBessel> inner(L), outer(L);
  for (std::size_t l = 0; l < L; ++l) {
    inner[l] = riccati_bessel(k0 * m[l] * shells[l].outer_radius_nm, nmax);
    outer[l] = riccati_bessel(k0 * m[l + 1] * shells[l].outer_radius_nm, nmax);
  }

  // te == true: continuity of u and du/dr (b_n); otherwise u and du/dr / eps (a_n).
  auto host_coefficients = [&](int n, bool te) {
    double A = 1.0, B = 0.0;
    for (std::size_t l = 0; l < L; ++l) {
      const double s_in = te ? m[l] : 1.0 / m[l];
      const double s_out = te ? m[l + 1] : 1.0 / m[l + 1];
      const auto& fi = inner[l];
      const auto& fo = outer[l];
      const double u = fi.psi[n] * A + fi.chi[n] * B;
      const double du = s_in * (fi.dpsi[n] * A + fi.dchi[n] * B);
      const double q = du / s_out;
      // Inverse of [[psi, chi], [psi', chi']] has unit Wronskian determinant.
      A = fo.dchi[n] * u - fo.chi[n] * q;
      B = -fo.dpsi[n] * u + fo.psi[n] * q;
    }
    return std::pair{A, B};
  };

  CrossSection out;
  out.nmax = nmax;
  double sum = 0.0;
  for (int n = 1; n <= nmax; ++n) {
    const auto [Aa, Ba] = host_coefficients(n, false);
    const auto [Ab, Bb] = host_coefficients(n, true);
    // Outside, u = A psi + B chi = const * (psi - c_n xi) with xi = psi + i chi,
    // so |c_n|^2 = B^2 / (A^2 + B^2).
    const double a2 = Ba * Ba / (Aa * Aa + Ba * Ba);
    const double b2 = Bb * Bb / (Ab * Ab + Bb * Bb);
    const double term = (2.0 * n + 1.0) * (a2 + b2);
    if (!std::isfinite(term)) {
      std::ostringstream os;
      os << "mie: non-finite multipole term at order " << n << " (lambda " << lambda_nm << " nm)";
      throw std::runtime_error(os.str());
    }
    sum += term;
    out.last_term = term;
  }
  const double prefactor = 2.0 * std::numbers::pi / (k_host * k_host);
  out.sigma_nm2 = prefactor * sum;
  out.last_term *= prefactor;
  if (out.last_term > kConvergenceTolerance * out.sigma_nm2) {
    std::ostringstream os;
    os << "mie: multipole sum not converged at nmax = " << nmax << " (lambda " << lambda_nm
       << " nm, last-order fraction " << out.last_term / out.sigma_nm2 << ")";
    throw std::runtime_error(os.str());
  }
  return out;
}

}  // namespace auxbo::mie
