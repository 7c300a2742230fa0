#pragma once

#include <cmath>
#include <vector>

#include "frsh/grid.hpp"
#include "frsh/multipliers.hpp"

namespace frsh {

// Smoothed step: 1 on r <= 1, exp(1 - 1/(1 - (r-1)^2)) on 1 < r < 2, 0 on r >= 2.
inline double lp_eta(double r) {
  if (r <= 1.0) return 1.0;
  if (r >= 2.0) return 0.0;
  const double s = r - 1.0;
  const double den = 1.0 - s * s;
  return std::exp(1.0 - 1.0 / den);
}

// Bump chi(xi) = eta(|xi|) - eta(2|xi|), supported in {1/2 < |xi| < 2};
// sum_k chi(xi / 2^k) telescopes to 1 for xi != 0.
inline double lp_chi(double r) { return lp_eta(r) - lp_eta(2.0 * r); }

// Littlewood-Paley projection P_k with symbol chi(xi / 2^k), support annulus
// A_k = {2^{k-1} < |xi| <= 2^{k+1}}.
struct DyadicProjector {
  int band = 0;

  double symbol(double xi_norm) const { return lp_chi(std::ldexp(xi_norm, -band)); }

  bool annulus_contains(double xi_norm) const {
    const double lo = std::ldexp(1.0, band - 1);
    const double hi = std::ldexp(1.0, band + 1);
    return xi_norm > lo && xi_norm <= hi;
  }
};

// Bands whose symbol is nonzero somewhere on the resolved frequency lattice.
inline std::vector<int> resolved_bands(const Grid& g) {
  const double xi_min = g.dxi();
  const double xi_max = g.nyquist() * std::sqrt(static_cast<double>(g.dim));
  std::vector<int> bands;
  const int klo = static_cast<int>(std::floor(std::log2(xi_min))) - 1;
  const int khi = static_cast<int>(std::ceil(std::log2(xi_max))) + 1;
  for (int k = klo; k <= khi; ++k) {
    // nonzero iff the open support (2^{k-1}, 2^{k+1}) meets [xi_min, xi_max]
    const double lo = std::ldexp(1.0, k - 1);
    const double hi = std::ldexp(1.0, k + 1);
    if (lo < xi_max && hi > xi_min) bands.push_back(k);
  }
  return bands;
}

inline Field dyadic_project(const Field& f, int k) {
  DyadicProjector p{k};
  const double lo = std::ldexp(1.0, k - 1);
  const double hi = std::ldexp(1.0, k + 1);
  const double xi_min = f.grid.dxi();
  const double xi_max = f.grid.nyquist() * std::sqrt(static_cast<double>(f.grid.dim));
  if (!(lo < xi_max && hi > xi_min))
    throw EmptyBandError("dyadic_project: band has no lattice points");
  return apply_radial_multiplier(f, [&p](double xi) { return p.symbol(xi); });
}

}  // namespace frsh
