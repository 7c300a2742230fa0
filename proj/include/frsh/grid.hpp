#pragma once

#include <fftw3.h>

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <utility>
#include <vector>

#include "frsh/errors.hpp"

namespace frsh {

inline constexpr double kPi = 3.14159265358979323846264338327950288;
inline constexpr double kTwoPi = 2.0 * kPi;

using Complex = std::complex<double>;
using CVec = std::vector<Complex>;

// Uniform periodic box [-L, L)^d with N points per axis.
// Physical lattice x_i = -L + i*dx, dx = 2L/N.
// Frequency lattice xi = (pi/L) * k, k in {-N/2, ..., N/2-1}^d.
struct Grid {
  int dim = 0;
  int n = 0;
  double half_width = 0.0;

  static Grid make(int dim, int n, double half_width) {
    if (dim < 2 || dim > 3) throw StructuralError("Grid: dim must be 2 or 3");
    if (n < 4 || (n & (n - 1)) != 0)
      throw StructuralError("Grid: N must be a power of two >= 4");
    if (!(half_width > 0.0)) throw StructuralError("Grid: L must be positive");
    return Grid{dim, n, half_width};
  }

  bool operator==(const Grid&) const = default;

  double dx() const { return 2.0 * half_width / n; }
  double dxi() const { return kPi / half_width; }
  // Per-axis Nyquist frequency pi*N/(2L).
  double nyquist() const { return kPi * n / (2.0 * half_width); }

  std::size_t size() const {
    std::size_t s = 1;
    for (int a = 0; a < dim; ++a) s *= static_cast<std::size_t>(n);
    return s;
  }

  // Signed frequency integer for a raw axis index.
  int freq_index(int i) const { return i < n / 2 ? i : i - n; }
  double coord(int i) const { return -half_width + i * dx(); }

  double cell_volume() const { return std::pow(dx(), dim); }
  double freq_cell_volume() const { return std::pow(dxi(), dim); }
};

// Per-grid integer tables shared by every multiplier loop:
//   k2:    sum_j freq(i_j)^2     (|xi|^2 = dxi^2 * k2)
//   r2:    sum_j (i_j - N/2)^2   (|x|^2  = dx^2  * r2)
//   sign:  (-1)^(sum_j i_j)      (centering phase of the transforms)
struct GridTables {
  std::vector<std::uint32_t> k2;
  std::vector<std::uint32_t> r2;
  std::vector<std::int8_t> sign;
};

namespace detail {

inline GridTables build_tables(const Grid& g) {
  GridTables t;
  const std::size_t total = g.size();
  t.k2.resize(total);
  t.r2.resize(total);
  t.sign.resize(total);
  const int n = g.n;
  std::array<int, 3> idx{0, 0, 0};
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::uint32_t k2 = 0, r2 = 0;
    int parity = 0;
    for (int a = 0; a < g.dim; ++a) {
      const int i = idx[a];
      const int k = i < n / 2 ? i : i - n;
      const int c = i - n / 2;
      k2 += static_cast<std::uint32_t>(k * k);
      r2 += static_cast<std::uint32_t>(c * c);
      parity += i;
    }
    t.k2[flat] = k2;
    t.r2[flat] = r2;
    t.sign[flat] = (parity & 1) ? -1 : 1;
    for (int a = g.dim - 1; a >= 0; --a) {
      if (++idx[a] < n) break;
      idx[a] = 0;
    }
  }
  return t;
}

}  // namespace detail

inline const GridTables& grid_tables(const Grid& g) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, std::unique_ptr<GridTables>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_pair(g.dim, g.n);
  auto it = cache.find(key);
  if (it == cache.end())
    it = cache.emplace(key, std::make_unique<GridTables>(detail::build_tables(g))).first;
  return *it->second;
}

// Complex samples of u on the physical lattice, row-major.
struct Field {
  Grid grid;
  CVec values;

  static Field zeros(const Grid& g) { return Field{g, CVec(g.size(), Complex{0.0, 0.0})}; }
};

// Discrete Fourier coefficients in the continuum convention
//   coeff(xi_k) ~ integral e^{-i x.xi} f(x) dx  (forward carries dx^d).
struct SpectralField {
  Grid grid;
  CVec coeffs;

  static SpectralField zeros(const Grid& g) {
    return SpectralField{g, CVec(g.size(), Complex{0.0, 0.0})};
  }
};

namespace detail {

// Synchronized FFTW plan registry. Plans are created once per (dim, N,
// direction) with FFTW_ESTIMATE | FFTW_UNALIGNED and executed through the
// new-array interface, which is safe to call concurrently.
class FftEngine {
 public:
  static FftEngine& instance() {
    static FftEngine e;
    return e;
  }

  void execute(const Grid& g, Complex* data, int sign) {
    fftw_plan plan = get_plan(g, sign);
    fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(data),
                     reinterpret_cast<fftw_complex*>(data));
  }

 private:
  FftEngine() = default;

  fftw_plan get_plan(const Grid& g, int sign) {
    std::lock_guard<std::mutex> lock(mu_);
    auto key = std::make_tuple(g.dim, g.n, sign);
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;
    std::vector<int> dims(g.dim, g.n);
    CVec scratch(g.size());
    fftw_plan plan = fftw_plan_dft(
        g.dim, dims.data(), reinterpret_cast<fftw_complex*>(scratch.data()),
        reinterpret_cast<fftw_complex*>(scratch.data()), sign,
        FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (!plan) throw Error("FFTW plan creation failed");
    plans_.emplace(key, plan);
    return plan;
  }

  std::mutex mu_;
  std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

}  // namespace detail

// Forward transform, convention  fhat(xi) = sum_x f(x) e^{-i x.xi} dx^d.
inline SpectralField transform_forward(const Field& f) {
  if (f.values.size() != f.grid.size())
    throw StructuralError("transform: values length does not match grid");
  SpectralField out{f.grid, f.values};
  detail::FftEngine::instance().execute(f.grid, out.coeffs.data(), FFTW_FORWARD);
  const auto& tab = grid_tables(f.grid);
  const double w = f.grid.cell_volume();
  for (std::size_t i = 0; i < out.coeffs.size(); ++i)
    out.coeffs[i] *= w * static_cast<double>(tab.sign[i]);
  return out;
}

// Inverse transform, convention  f(x) = (2pi)^-d sum_xi fhat(xi) e^{i x.xi} dxi^d.
inline Field transform_inverse(const SpectralField& s) {
  if (s.coeffs.size() != s.grid.size())
    throw StructuralError("transform: coefficient length does not match grid");
  Field out{s.grid, s.coeffs};
  const auto& tab = grid_tables(s.grid);
  for (std::size_t i = 0; i < out.values.size(); ++i)
    out.values[i] *= static_cast<double>(tab.sign[i]);
  detail::FftEngine::instance().execute(s.grid, out.values.data(), FFTW_BACKWARD);
  const double w = std::pow(s.grid.dxi() / kTwoPi, s.grid.dim);
  for (auto& v : out.values) v *= w;
  return out;
}

// ---- small field algebra -------------------------------------------------

inline void check_same_grid(const Grid& a, const Grid& b, const char* what) {
  if (!(a == b)) throw StructuralError(std::string(what) + ": grid mismatch");
}

inline Field operator+(const Field& a, const Field& b) {
  check_same_grid(a.grid, b.grid, "Field+Field");
  Field out = a;
  for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] += b.values[i];
  return out;
}

inline Field operator-(const Field& a, const Field& b) {
  check_same_grid(a.grid, b.grid, "Field-Field");
  Field out = a;
  for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] -= b.values[i];
  return out;
}

inline Field operator*(Complex c, const Field& f) {
  Field out = f;
  for (auto& v : out.values) v *= c;
  return out;
}

inline Field operator*(double c, const Field& f) { return Complex{c, 0.0} * f; }

inline Complex inner_product(const Field& a, const Field& b) {
  check_same_grid(a.grid, b.grid, "inner_product");
  Complex s{0.0, 0.0};
  for (std::size_t i = 0; i < a.values.size(); ++i)
    s += std::conj(a.values[i]) * b.values[i];
  return s * a.grid.cell_volume();
}

inline double norm_l2(const Field& f) {
  double s = 0.0;
  for (const auto& v : f.values) s += std::norm(v);
  return std::sqrt(s * f.grid.cell_volume());
}

inline double norm_l2(const SpectralField& s) {
  double acc = 0.0;
  for (const auto& c : s.coeffs) acc += std::norm(c);
  return std::sqrt(acc * s.grid.freq_cell_volume() / std::pow(kTwoPi, s.grid.dim));
}

inline double norm_lp(const Field& f, double p) {
  double s = 0.0;
  for (const auto& v : f.values) s += std::pow(std::abs(v), p);
  return std::pow(s * f.grid.cell_volume(), 1.0 / p);
}

inline bool all_finite(const Field& f) {
  for (const auto& v : f.values)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
  return true;
}

// ---- dyadic frame rescaling ----------------------------------------------

// Frame grid for a piece living around dyadic frequency 2^k: same N, box
// scaled by 2^k. Index-for-index, (pi/L_frame) * i corresponds to the
// original lattice point (pi/L) * i divided by 2^k.
inline Grid frame_grid(const Grid& g, int k) {
  return Grid::make(g.dim, g.n, g.half_width * std::ldexp(1.0, k));
}

// Exact unit-frame rescale F(x) = rho^{-d/2} f(x / rho), rho = 2^k, realized
// as the same-index spectral map Fhat[i] = rho^{d/2} fhat[i] onto frame_grid.
// This is an exact L2 isometry and commutes exactly with U(t) at matched
// times t_frame = t / rho^alpha.
inline Field rescale_to_frame(const Field& f, int k) {
  SpectralField s = transform_forward(f);
  const double rho = std::ldexp(1.0, k);
  const double amp = std::pow(rho, 0.5 * f.grid.dim);
  SpectralField out{frame_grid(f.grid, k), std::move(s.coeffs)};
  for (auto& c : out.coeffs) c *= amp;
  return transform_inverse(out);
}

// Re-express a box-supported field on the frame with box scaled by 2^dk
// (dk >= 0), same N: target samples are the 2^dk-strided source samples,
// zero outside the source box. Exact where the source is genuinely
// box-supported; purely a diagnostic aid for comparing rescaled snapshots.
inline Field embed_resample(const Field& f, int dk) {
  if (dk == 0) return f;
  if (dk < 0) throw ResolutionError("embed_resample: only coarsening (dk >= 0) supported");
  const Grid& g = f.grid;
  Grid target = Grid::make(g.dim, g.n, g.half_width * std::ldexp(1.0, dk));
  Field out = Field::zeros(target);
  const int n = g.n;
  const int stride = 1 << dk;
  std::array<int, 3> idx{0, 0, 0};
  const std::size_t total = out.values.size();
  for (std::size_t flat = 0; flat < total; ++flat) {
    bool inside = true;
    std::size_t src = 0;
    for (int a = 0; a < g.dim; ++a) {
      const int i = n / 2 + stride * (idx[a] - n / 2);
      if (i < 0 || i >= n) {
        inside = false;
        break;
      }
      src = src * static_cast<std::size_t>(n) + static_cast<std::size_t>(i);
    }
    if (inside) out.values[flat] = f.values[src];
    for (int a = g.dim - 1; a >= 0; --a) {
      if (++idx[a] < n) break;
      idx[a] = 0;
    }
  }
  return out;
}

// Exact inverse of rescale_to_frame.
inline Field rescale_from_frame(const Field& frame_field, const Grid& target, int k) {
  Grid expect = frame_grid(target, k);
  if (!(frame_field.grid == expect))
    throw ResolutionError("rescale_from_frame: field is not on the k-matched frame grid");
  SpectralField s = transform_forward(frame_field);
  const double rho = std::ldexp(1.0, k);
  const double amp = std::pow(rho, -0.5 * target.dim);
  SpectralField out{target, std::move(s.coeffs)};
  for (auto& c : out.coeffs) c *= amp;
  return transform_inverse(out);
}

}  // namespace frsh
