#pragma once

#include <unordered_map>
#include <vector>

#include "frsh/grid.hpp"

namespace frsh {

namespace detail {

// For each lattice point, the index of its exact-|x| shell (points sharing
// the integer value of |x/dx|^2). Cached per (dim, N).
struct ShellIndex {
  std::vector<std::uint32_t> shell_of;  // per lattice point
  std::size_t shell_count = 0;
};

inline const ShellIndex& shell_index(const Grid& g) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, std::unique_ptr<ShellIndex>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_pair(g.dim, g.n);
  auto it = cache.find(key);
  if (it == cache.end()) {
    const auto& tab = grid_tables(g);
    auto si = std::make_unique<ShellIndex>();
    std::unordered_map<std::uint32_t, std::uint32_t> ids;
    ids.reserve(tab.r2.size() / 4);
    si->shell_of.resize(tab.r2.size());
    for (std::size_t i = 0; i < tab.r2.size(); ++i) {
      auto [pos, fresh] = ids.try_emplace(tab.r2[i], static_cast<std::uint32_t>(ids.size()));
      si->shell_of[i] = pos->second;
    }
    si->shell_count = ids.size();
    it = cache.emplace(key, std::move(si)).first;
  }
  return *it->second;
}

}  // namespace detail

// Project onto radial functions by averaging over exact equal-|x| lattice
// shells. Linear, self-adjoint, idempotent to roundoff; odd functions map
// to zero since every shell is symmetric under x -> -x.
inline Field radial_symmetrize(const Field& f) {
  const auto& si = detail::shell_index(f.grid);
  std::vector<Complex> sum(si.shell_count, Complex{0.0, 0.0});
  std::vector<std::uint32_t> count(si.shell_count, 0);
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    sum[si.shell_of[i]] += f.values[i];
    ++count[si.shell_of[i]];
  }
  for (std::size_t s = 0; s < sum.size(); ++s) sum[s] /= static_cast<double>(count[s]);
  Field out{f.grid, CVec(f.values.size())};
  for (std::size_t i = 0; i < f.values.size(); ++i) out.values[i] = sum[si.shell_of[i]];
  return out;
}

// Radial profile as (radius, shell average) pairs sorted by radius.
inline std::vector<std::pair<double, Complex>> radial_profile(const Field& f) {
  const auto& tab = grid_tables(f.grid);
  std::map<std::uint32_t, std::pair<Complex, std::uint32_t>> shells;
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    auto& e = shells[tab.r2[i]];
    e.first += f.values[i];
    e.second += 1;
  }
  std::vector<std::pair<double, Complex>> out;
  out.reserve(shells.size());
  const double dx = f.grid.dx();
  for (const auto& [r2, e] : shells)
    out.emplace_back(dx * std::sqrt(static_cast<double>(r2)),
                     e.first / static_cast<double>(e.second));
  return out;
}

}  // namespace frsh
