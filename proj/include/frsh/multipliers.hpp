#pragma once

#include <cmath>
#include <functional>

#include "frsh/grid.hpp"

namespace frsh {

// Apply a radial Fourier multiplier m(|xi|); fn receives |xi| and must handle 0.
template <typename Fn>
Field apply_radial_multiplier(const Field& f, Fn&& fn) {
  SpectralField s = transform_forward(f);
  const auto& tab = grid_tables(f.grid);
  const double dxi = f.grid.dxi();
  for (std::size_t i = 0; i < s.coeffs.size(); ++i)
    s.coeffs[i] *= fn(dxi * std::sqrt(static_cast<double>(tab.k2[i])));
  return transform_inverse(s);
}

template <typename Fn>
void apply_radial_multiplier_inplace(SpectralField& s, Fn&& fn) {
  const auto& tab = grid_tables(s.grid);
  const double dxi = s.grid.dxi();
  for (std::size_t i = 0; i < s.coeffs.size(); ++i)
    s.coeffs[i] *= fn(dxi * std::sqrt(static_cast<double>(tab.k2[i])));
}

// (-Delta)^{alpha/2} = F^{-1} |xi|^alpha F, 1 < alpha <= 2.
inline Field fractional_laplacian_apply(const Field& f, double alpha) {
  if (!(alpha > 1.0 && alpha <= 2.0))
    throw DomainError("fractional_laplacian_apply: alpha must lie in (1, 2]");
  return apply_radial_multiplier(
      f, [alpha](double xi) { return xi == 0.0 ? 0.0 : std::pow(xi, alpha); });
}

// Constant of the Riesz identity  (|x|^{-alpha} * rho)^ = c_{d,alpha} |xi|^{alpha-d} rhohat.
inline double riesz_constant(int dim, double alpha) {
  return std::pow(kPi, 0.5 * dim) * std::pow(2.0, dim - alpha) *
         std::tgamma(0.5 * (dim - alpha)) / std::tgamma(0.5 * alpha);
}

// The xi = 0 mode of the periodic Riesz multiplier is clamped to the value at
// the smallest nonzero lattice frequency; the constant shift of the Hartree
// potential only rotates the global phase. Named so tests can assert it.
inline double riesz_zero_mode_multiplier(const Grid& g, double alpha) {
  return riesz_constant(g.dim, alpha) * std::pow(g.dxi(), alpha - g.dim);
}

// |x|^{-alpha} * rho on the torus, 1 < alpha < d.
inline Field riesz_convolve(const Field& rho, double alpha) {
  const int d = rho.grid.dim;
  if (!(alpha > 1.0 && alpha < static_cast<double>(d)))
    throw DomainError("riesz_convolve: alpha must lie in (1, d)");
  const double c = riesz_constant(d, alpha);
  const double dc = riesz_zero_mode_multiplier(rho.grid, alpha);
  return apply_radial_multiplier(rho, [=](double xi) {
    return xi == 0.0 ? dc : c * std::pow(xi, alpha - d);
  });
}

// 2/3-rule spectral truncation mask: zero every mode with any axis index
// |k_a| > N/3. Applied to the spectrum of nonlinear products.
inline void dealias_inplace(SpectralField& s) {
  const int n = s.grid.n;
  const int kmax = n / 3;
  std::array<int, 3> idx{0, 0, 0};
  const std::size_t total = s.coeffs.size();
  for (std::size_t flat = 0; flat < total; ++flat) {
    for (int a = 0; a < s.grid.dim; ++a) {
      const int k = s.grid.freq_index(idx[a]);
      if (k > kmax || k < -kmax) {
        s.coeffs[flat] = Complex{0.0, 0.0};
        break;
      }
    }
    for (int a = s.grid.dim - 1; a >= 0; --a) {
      if (++idx[a] < n) break;
      idx[a] = 0;
    }
  }
}

}  // namespace frsh
