#pragma once

#include <cmath>
#include <sstream>
#include <vector>

#include "frsh/propagator.hpp"

namespace frsh {

struct WaveOperatorResult {
  Trajectory traj;                        // u(t) = U(t) g + v(t) on [T, t_end]
  std::vector<double> contraction_ratios; // per Picard iteration
  std::vector<double> updates;            // ||v^{m+1} - v^m||_{C_t L2}
  double residual = 0.0;                  // ||v - N(v)||_{C_t L2} of the returned v
  std::vector<double> deviation;          // ||u(t_i) - U(t_i) g||_2
  double tail_estimate = 0.0;             // size of the dropped integral beyond t_end
  int iterations = 0;
};

namespace detail {

// One application of the Appendix-A map
//   N(v)(t) = i lambda int_t^{t_end} U(t-s) F(U(s) g + v(s)) ds
// on the step lattice, trapezoid rule, evaluated via the backward cumulative
// sum of e^{-i s |xi|^alpha} Fhat(s) so the whole sweep costs O(n) transforms.
inline std::vector<SpectralField> apply_wave_map(
    const std::vector<SpectralField>& ghat_t,  // U(t_i) g, spectral
    const std::vector<SpectralField>& v,       // v(t_i), spectral
    const std::vector<double>& times, const SimConfig& cfg, double* tail_estimate) {
  const Grid& g = cfg.grid;
  const std::size_t nt = times.size();
  const double lam = static_cast<double>(cfg.lambda);

  // F̂(t_i), phase-rolled back to s = 0.
  std::vector<SpectralField> rolled(nt);
  for (std::size_t i = 0; i < nt; ++i) {
    SpectralField sum = ghat_t[i];
    for (std::size_t j = 0; j < sum.coeffs.size(); ++j) sum.coeffs[j] += v[i].coeffs[j];
    Field ui = transform_inverse(sum);
    Field fi = hartree_nonlinearity(ui, cfg.alpha, cfg.lambda, cfg.dealias);
    SpectralField fhat = transform_forward(fi);
    linear_propagate_inplace(fhat, -times[i], cfg.alpha);
    rolled[i] = std::move(fhat);
    if (i + 1 == nt && tail_estimate) {
      // magnitude of the last interval's contribution, used as the estimate
      // of the dropped improper tail
      double dt_last = nt >= 2 ? times[nt - 1] - times[nt - 2] : 0.0;
      *tail_estimate = dt_last * norm_l2(transform_inverse(rolled[i]));
    }
  }

  std::vector<SpectralField> out(nt);
  SpectralField acc = SpectralField::zeros(g);
  out[nt - 1] = acc;
  for (std::size_t i = nt - 1; i-- > 0;) {
    const double w = 0.5 * (times[i + 1] - times[i]);
    for (std::size_t j = 0; j < acc.coeffs.size(); ++j)
      acc.coeffs[j] += w * (rolled[i].coeffs[j] + rolled[i + 1].coeffs[j]);
    out[i] = acc;
  }
  for (std::size_t i = 0; i < nt; ++i) {
    linear_propagate_inplace(out[i], times[i], cfg.alpha);
    for (auto& c : out[i].coeffs) c *= Complex{0.0, lam};
  }
  return out;
}

inline double ct_l2_diff(const std::vector<SpectralField>& a,
                         const std::vector<SpectralField>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    SpectralField d = a[i];
    for (std::size_t j = 0; j < d.coeffs.size(); ++j) d.coeffs[j] -= b[i].coeffs[j];
    m = std::max(m, norm_l2(d));
  }
  return m;
}

}  // namespace detail

// Construct the solution with prescribed asymptotic state g on [T, t_end]:
// u(t) = U(t) g + v(t), v the fixed point of the Appendix-A map with the
// improper integral truncated at t_end. Contraction is measured, not assumed.
inline WaveOperatorResult wave_operator_solve(const Field& g, double T, double t_end,
                                              double tol, const SimConfig& cfg) {
  cfg.validate();
  check_same_grid(g.grid, cfg.grid, "wave_operator_solve");
  if (!(T < t_end)) throw DomainError("wave_operator_solve: need T < t_end");
  if (!(tol > 0.0)) throw DomainError("wave_operator_solve: tol must be positive");

  std::vector<double> times;
  for (double t = T; t < t_end + 0.5 * cfg.dt; t += cfg.dt) times.push_back(t);
  if (times.back() < t_end) times.push_back(t_end);
  const std::size_t nt = times.size();

  SpectralField ghat = transform_forward(g);
  std::vector<SpectralField> ghat_t(nt);
  for (std::size_t i = 0; i < nt; ++i) {
    ghat_t[i] = ghat;
    linear_propagate_inplace(ghat_t[i], times[i], cfg.alpha);
  }

  WaveOperatorResult res;
  std::vector<SpectralField> v(nt, SpectralField::zeros(cfg.grid));
  const double gnorm = norm_l2(g);

  double prev_update = -1.0;
  const int max_iter = 24;
  for (int it = 0; it < max_iter; ++it) {
    double tail = 0.0;
    std::vector<SpectralField> next =
        detail::apply_wave_map(ghat_t, v, times, cfg, &tail);
    res.tail_estimate = tail;
    const double update = detail::ct_l2_diff(next, v);
    if (!std::isfinite(update)) {
      std::ostringstream oss;
      oss << "wave_operator_solve: iteration diverged (non-finite update at iteration "
          << res.iterations + 1 << "); updates so far:";
      for (double u : res.updates) oss << " " << u;
      throw NoConvergenceError(oss.str());
    }
    res.updates.push_back(update);
    if (prev_update > 0.0) res.contraction_ratios.push_back(update / prev_update);
    prev_update = update > 0.0 ? update : -1.0;
    v = std::move(next);
    ++res.iterations;
    if (update < tol || gnorm == 0.0) break;
    if (res.contraction_ratios.size() >= 4 && res.iterations >= 5) {
      bool expanding = true;
      for (std::size_t i = res.contraction_ratios.size() - 4;
           i < res.contraction_ratios.size(); ++i)
        expanding = expanding && res.contraction_ratios[i] >= 1.0;
      if (expanding) {
        std::ostringstream oss;
        oss << "wave_operator_solve: no contraction after " << res.iterations
            << " iterations; updates:";
        for (double u : res.updates) oss << " " << u;
        throw NoConvergenceError(oss.str());
      }
    }
  }

  // residual of the returned iterate
  {
    std::vector<SpectralField> check =
        detail::apply_wave_map(ghat_t, v, times, cfg, nullptr);
    res.residual = detail::ct_l2_diff(check, v);
  }

  Trajectory traj;
  traj.grid = cfg.grid;
  traj.alpha = cfg.alpha;
  traj.lambda = cfg.lambda;
  const StrichartzSpec lqlr = StrichartzSpec::canonical(cfg.grid.dim, cfg.alpha);
  for (std::size_t i = 0; i < nt; ++i) {
    SpectralField sum = ghat_t[i];
    for (std::size_t j = 0; j < sum.coeffs.size(); ++j) sum.coeffs[j] += v[i].coeffs[j];
    Field ui = transform_inverse(sum);
    res.deviation.push_back(norm_l2(transform_inverse(v[i])));
    traj.times.push_back(times[i]);
    if (i + 1 < nt)
      traj.lqlr_partial += (times[i + 1] - times[i]) * std::pow(norm_lp(ui, lqlr.r), lqlr.q);
    ConservationSample cs = energy(ui, cfg.alpha, cfg.lambda, cfg.dealias, times[i]);
    traj.log.push_back({times[i], cs.mass, cs.energy, h_seminorm(ui, cfg.alpha),
                        std::pow(traj.lqlr_partial, 1.0 / lqlr.q), cfg.dt, ""});
    traj.states.push_back(std::move(ui));
  }
  traj.final_time = times.back();
  traj.steps = static_cast<long>(nt) - 1;
  res.traj = std::move(traj);
  return res;
}

}  // namespace frsh
