#pragma once

#include <cmath>

#include "frsh/config.hpp"
#include "frsh/profiles.hpp"
#include "frsh/radial.hpp"

namespace frsh {

// Gaussian shell profile with compact spectral support:
// phihat(xi) = exp(-z^2 / (1 - (z/2.2)^2)) for z = (|xi|-center)/width,
// |z| < 2.2, zero otherwise. C-infinity in |xi|, supported in an annulus
// around `center`, spatially concentrated within a radius of a few units.
inline double band_profile_shell(double z) {
  const double s = z / 2.2;
  if (s <= -1.0 || s >= 1.0) return 0.0;
  return std::exp(-z * z / (1.0 - s * s));
}

// Unit-scale radial profile on a frame grid, normalized to the requested
// mass. Real and radial by construction.
inline Field make_band_profile(const Grid& frame, double target_mass, double center = 1.0,
                               double width = 0.55) {
  if (!(target_mass > 0.0)) throw DomainError("make_band_profile: mass must be positive");
  SpectralField s = SpectralField::zeros(frame);
  const auto& tab = grid_tables(frame);
  const double dxi = frame.dxi();
  for (std::size_t i = 0; i < s.coeffs.size(); ++i) {
    const double xi = dxi * std::sqrt(static_cast<double>(tab.k2[i]));
    if (xi == 0.0) continue;
    s.coeffs[i] = Complex{band_profile_shell((xi - center) / width), 0.0};
  }
  Field f = transform_inverse(s);
  const double m = mass(f);
  if (m == 0.0) throw ResolutionError("make_band_profile: shell missed the frequency lattice");
  const double scale = std::sqrt(target_mass / m);
  for (auto& v : f.values) v *= scale;
  return f;
}

// Realize component specs against a target grid: each phi lives on its
// scale-matched frame so synthesis and decomposition round-trip exactly.
inline std::vector<ProfileComponent> build_components(const Grid& target,
                                                      const std::vector<ComponentSpec>& specs) {
  std::vector<ProfileComponent> out;
  int index = 0;
  for (const auto& sp : specs) {
    ProfileComponent c;
    c.band = sp.band;
    c.log2_h = -sp.band;
    c.h = std::ldexp(1.0, -sp.band);
    c.t = sp.t;
    c.index = index++;
    c.phi = make_band_profile(frame_grid(target, sp.band), sp.mass, sp.center, sp.width);
    c.mass2 = sp.mass;
    out.push_back(std::move(c));
  }
  return out;
}

inline Field synthesize_mixture(const Grid& target, double alpha,
                                const std::vector<ComponentSpec>& specs) {
  return synthesize(build_components(target, specs), Field::zeros(target), alpha);
}

}  // namespace frsh
