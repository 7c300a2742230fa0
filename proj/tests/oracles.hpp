// Test-only oracles: brute-force / closed-form references kept independent
// of the library's transform path.
#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "frsh/grid.hpp"
#include "frsh/multipliers.hpp"
#include "frsh/rng.hpp"

namespace oracle {

using frsh::Complex;
using frsh::Field;
using frsh::Grid;
using frsh::kPi;

// O(N^{2d}) direct DFT (d = 2 only): fhat(xi_k) = sum_x f(x) e^{-i x.xi} dx^d.
inline std::vector<Complex> dense_forward_2d(const Field& f) {
  const Grid& g = f.grid;
  const int n = g.n;
  std::vector<Complex> out(g.size());
  const double dx = g.dx();
  const double dxi = g.dxi();
  for (int ka = 0; ka < n; ++ka) {
    const double xia = dxi * (ka < n / 2 ? ka : ka - n);
    for (int kb = 0; kb < n; ++kb) {
      const double xib = dxi * (kb < n / 2 ? kb : kb - n);
      Complex acc{0.0, 0.0};
      for (int ia = 0; ia < n; ++ia) {
        const double xa = g.coord(ia);
        for (int ib = 0; ib < n; ++ib) {
          const double xb = g.coord(ib);
          acc += f.values[static_cast<std::size_t>(ia) * n + ib] *
                 std::polar(1.0, -(xa * xia + xb * xib));
        }
      }
      out[static_cast<std::size_t>(ka) * n + kb] = acc * dx * dx;
    }
  }
  return out;
}

// Dense multiplier oracle: F^{-1}[ m(|xi|) fhat ] by direct sums (d = 2).
template <typename Mult>
Field dense_multiplier_2d(const Field& f, Mult&& m) {
  const Grid& g = f.grid;
  const int n = g.n;
  std::vector<Complex> hat = dense_forward_2d(f);
  Field out = Field::zeros(g);
  const double dxi = g.dxi();
  const double w = dxi * dxi / (2.0 * kPi * 2.0 * kPi);
  for (int ia = 0; ia < n; ++ia) {
    const double xa = g.coord(ia);
    for (int ib = 0; ib < n; ++ib) {
      const double xb = g.coord(ib);
      Complex acc{0.0, 0.0};
      for (int ka = 0; ka < n; ++ka) {
        const double xia = dxi * (ka < n / 2 ? ka : ka - n);
        for (int kb = 0; kb < n; ++kb) {
          const double xib = dxi * (kb < n / 2 ? kb : kb - n);
          acc += m(std::hypot(xia, xib)) * hat[static_cast<std::size_t>(ka) * n + kb] *
                 std::polar(1.0, xa * xia + xb * xib);
        }
      }
      out.values[static_cast<std::size_t>(ia) * n + ib] = acc * w;
    }
  }
  return out;
}

// O(N^4) free-space Riesz potential sum int |x-y|^{-a} rho(y) dy over the box
// (d = 2); the singular cell is integrated in polar coordinates on a subgrid.
inline Field direct_riesz_2d(const Field& rho, double a) {
  const Grid& g = rho.grid;
  const int n = g.n;
  const double dx = g.dx();
  // self-cell contribution per unit density: int_cell |y|^{-a} dy
  double self = 0.0;
  {
    const int sub = 64;
    const double h = dx / sub;
    for (int i = 0; i < sub; ++i)
      for (int j = 0; j < sub; ++j) {
        const double y1 = -0.5 * dx + (i + 0.5) * h;
        const double y2 = -0.5 * dx + (j + 0.5) * h;
        self += std::pow(std::hypot(y1, y2), -a) * h * h;
      }
  }
  Field out = Field::zeros(g);
  for (int ia = 0; ia < n; ++ia)
    for (int ib = 0; ib < n; ++ib) {
      Complex acc{0.0, 0.0};
      for (int ja = 0; ja < n; ++ja)
        for (int jb = 0; jb < n; ++jb) {
          const Complex r = rho.values[static_cast<std::size_t>(ja) * n + jb];
          if (ja == ia && jb == ib) {
            acc += r * self;
          } else {
            const double dist = dx * std::hypot(ia - ja, ib - jb);
            acc += r * std::pow(dist, -a) * dx * dx;
          }
        }
      out.values[static_cast<std::size_t>(ia) * n + ib] = acc;
    }
  return out;
}

// Closed-form free evolution of exp(-|x|^2/2) in d = 2 under the multiplier
// e^{+i t |xi|^2}: (1 - 2it)^{-1} exp(-|x|^2 / (2 (1 - 2it))).
inline Field gaussian_free_evolution_2d(const Grid& g, double t, double phase_sign) {
  const auto& tab = frsh::grid_tables(g);
  const Complex a{1.0, -2.0 * phase_sign * t};
  Field out = Field::zeros(g);
  const double dx2 = g.dx() * g.dx();
  for (std::size_t i = 0; i < out.values.size(); ++i)
    out.values[i] = std::exp(-0.5 * dx2 * static_cast<double>(tab.r2[i]) / a) / a;
  return out;
}

inline Field centered_gaussian(const Grid& g, double width = 1.0, double amp = 1.0) {
  const auto& tab = frsh::grid_tables(g);
  Field out = Field::zeros(g);
  const double dx2 = g.dx() * g.dx();
  for (std::size_t i = 0; i < out.values.size(); ++i)
    out.values[i] =
        amp * std::exp(-0.5 * dx2 * static_cast<double>(tab.r2[i]) / (width * width));
  return out;
}

// Random radial field: per-|xi|-shell coefficients with a smooth band
// envelope. Real radial by construction when `complex_valued` is false.
inline Field random_radial_field(const Grid& g, frsh::CounterRng& rng, double band_lo = 0.5,
                                 double band_hi = 4.0, bool complex_valued = true) {
  const auto& tab = frsh::grid_tables(g);
  std::map<std::uint32_t, Complex> shell_amp;
  frsh::SpectralField s = frsh::SpectralField::zeros(g);
  const double dxi = g.dxi();
  for (std::size_t i = 0; i < s.coeffs.size(); ++i) {
    const double xi = dxi * std::sqrt(static_cast<double>(tab.k2[i]));
    if (xi < band_lo || xi > band_hi) continue;
    auto it = shell_amp.find(tab.k2[i]);
    if (it == shell_amp.end()) {
      Complex amp = complex_valued ? Complex{rng.next_normal(), rng.next_normal()}
                                   : Complex{rng.next_normal(), 0.0};
      it = shell_amp.emplace(tab.k2[i], amp).first;
    }
    s.coeffs[i] = it->second;
  }
  return frsh::transform_inverse(s);
}

}  // namespace oracle
