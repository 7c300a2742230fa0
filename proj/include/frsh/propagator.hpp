#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "frsh/grid.hpp"
#include "frsh/multipliers.hpp"
#include "frsh/observables.hpp"

namespace frsh {

// U(t) f with multiplier e^{+i t |xi|^alpha} (the propagator of
// i u_t + (-Delta)^{alpha/2} u = 0 in the forward-transform convention).
inline Field linear_propagate(const Field& f, double t, double alpha) {
  if (!(alpha > 1.0 && alpha <= 2.0))
    throw DomainError("linear_propagate: alpha must lie in (1, 2]");
  return apply_radial_multiplier(f, [=](double xi) {
    return std::polar(1.0, t * std::pow(xi, alpha));
  });
}

inline void linear_propagate_inplace(SpectralField& s, double t, double alpha) {
  apply_radial_multiplier_inplace(s, [=](double xi) {
    return std::polar(1.0, t * std::pow(xi, alpha));
  });
}

// F(u) = lambda (|x|^{-alpha} * |u|^2) u.
inline Field hartree_nonlinearity(const Field& u, double alpha, int lambda,
                                  bool dealias = false) {
  Field v = hartree_potential(u, alpha, dealias);
  Field out{u.grid, CVec(u.values.size())};
  const double lam = static_cast<double>(lambda);
  for (std::size_t i = 0; i < u.values.size(); ++i)
    out.values[i] = lam * v.values[i].real() * u.values[i];
  if (dealias) {
    SpectralField s = transform_forward(out);
    dealias_inplace(s);
    out = transform_inverse(s);
  }
  return out;
}

struct AdaptiveConfig {
  bool enabled = false;
  double growth_trigger = 0.10;  // halve dt when hsem grows by more than this per step
  int underflow_exponent = 20;   // blowup-trigger when dt < dt0 * 2^-exponent
};

struct SimConfig {
  double alpha = 1.8;
  int lambda = -1;
  Grid grid;
  double dt = 1e-3;
  double t_end = 1.0;
  bool dealias = true;
  AdaptiveConfig adaptive;
  long max_steps = 2'000'000;
  int snapshot_every = 0;  // 0: only first/last (plus requested times)
  int log_every = 1;
  std::vector<double> extra_snapshot_times;
  bool monitor_mass_leak = true;
  double mass_leak_tol = 1e-3;  // fraction of mass allowed outside |x| < L/2

  double admissible_lo() const {
    return 2.0 * grid.dim / (2.0 * grid.dim - 1.0);
  }

  void validate() const {
    if (!(dt > 0.0)) throw DomainError("SimConfig: dt must be positive");
    if (!(t_end >= 0.0)) throw DomainError("SimConfig: t_end must be nonnegative");
    if (lambda != 1 && lambda != -1) throw DomainError("SimConfig: lambda must be +1 or -1");
    // Theorem range (2d/(2d-1), 2); alpha = 2 permitted for oracle runs.
    if (!((alpha > admissible_lo() && alpha < 2.0) || alpha == 2.0))
      throw DomainError("SimConfig: alpha must lie in (2d/(2d-1), 2]");
    if (adaptive.enabled && adaptive.underflow_exponent < 1)
      throw DomainError("SimConfig: adaptive underflow exponent must be >= 1");
  }
};

enum class EventKind {
  kBlowupTrigger,
  kMassLeak,
  kMaxSteps,
  kIntegratorDiverged,
  kNonRadialInput,
};

inline const char* event_name(EventKind k) {
  switch (k) {
    case EventKind::kBlowupTrigger: return "blowup-trigger";
    case EventKind::kMassLeak: return "domain-too-small";
    case EventKind::kMaxSteps: return "max-steps";
    case EventKind::kIntegratorDiverged: return "integrator-diverged";
    case EventKind::kNonRadialInput: return "non-radial-input";
  }
  return "unknown";
}

struct Event {
  double t = 0.0;
  EventKind kind{};
  std::string detail;
};

struct StepLogRow {
  double t = 0.0;
  double mass = 0.0;
  double energy = 0.0;
  double hseminorm = 0.0;
  double lqlr_partial = 0.0;
  double dt = 0.0;
  std::string event;
};

struct Trajectory {
  Grid grid;
  double alpha = 0.0;
  int lambda = 0;
  std::vector<double> times;    // snapshot times, strictly increasing
  std::vector<Field> states;    // one per snapshot time
  std::vector<StepLogRow> log;  // conservation log at log_every cadence
  std::vector<Event> events;
  double lqlr_partial = 0.0;  // accumulator of dt * ||u||_{r0}^{q0}
  double final_time = 0.0;
  long steps = 0;

  const Field& final_state() const { return states.back(); }

  bool has_event(EventKind k) const {
    for (const auto& e : events)
      if (e.kind == k) return true;
    return false;
  }
};

// Strang step: U(dt/2), then the exact nonlinear sub-flow
// u -> e^{-i lambda dt V} u with V frozen at the sub-step entry state,
// then U(dt/2). Both sub-flows preserve |u| pointwise in the L2 sense,
// so mass is conserved to roundoff.
inline Field step_strang(const Field& u, double dt, const SimConfig& cfg) {
  cfg.validate();
  check_same_grid(u.grid, cfg.grid, "step_strang");
  if (dt == 0.0) return u;
  SpectralField s = transform_forward(u);
  linear_propagate_inplace(s, 0.5 * dt, cfg.alpha);
  Field mid = transform_inverse(s);
  Field v = hartree_potential(mid, cfg.alpha, cfg.dealias);
  const double lam = static_cast<double>(cfg.lambda);
  for (std::size_t i = 0; i < mid.values.size(); ++i)
    mid.values[i] *= std::polar(1.0, -lam * dt * v.values[i].real());
  s = transform_forward(mid);
  linear_propagate_inplace(s, 0.5 * dt, cfg.alpha);
  return transform_inverse(s);
}

using StepObserver = std::function<void(double t, const Field& u, const StepLogRow& row)>;

namespace detail {

// Cheap mass-containment monitor: lattice sum over |x| < L/2.
inline double contained_mass_fraction(const Field& u) {
  const auto& tab = grid_tables(u.grid);
  const double r2max = 0.25 * u.grid.half_width * u.grid.half_width / (u.grid.dx() * u.grid.dx());
  double inside = 0.0, total = 0.0;
  for (std::size_t i = 0; i < u.values.size(); ++i) {
    const double a = std::norm(u.values[i]);
    total += a;
    if (static_cast<double>(tab.r2[i]) < r2max) inside += a;
  }
  return total == 0.0 ? 1.0 : inside / total;
}

inline bool looks_radial(const Field& u) {
  // probe a handful of reflection pairs; exact radial data matches exactly
  const int n = u.grid.n;
  const auto at = [&](int i, int j) {
    return u.values[static_cast<std::size_t>(i) * n + j];
  };
  if (u.grid.dim != 2) return true;  // probe only implemented for d = 2
  for (int s = 1; s < 5; ++s) {
    const int i = n / 2 + s * n / 16;
    const int j = n / 2 - s * n / 16;
    if (i >= n || j < 0) continue;
    if (std::abs(at(i, n / 2) - at(j, n / 2)) > 1e-10 * (1.0 + std::abs(at(i, n / 2))))
      return false;
    if (std::abs(at(i, n / 2) - at(n / 2, i)) > 1e-10 * (1.0 + std::abs(at(i, n / 2))))
      return false;
  }
  return true;
}

}  // namespace detail

// Time-step u0 to t_end. All failure modes are recorded events, never
// exceptions. Accumulates the L^{q0}_t L^{r0}_x partial norm with
// left-endpoint rectangles at every accepted step.
inline Trajectory evolve(const Field& u0, const SimConfig& cfg,
                         const std::vector<StepObserver>& hooks = {}) {
  cfg.validate();
  check_same_grid(u0.grid, cfg.grid, "evolve");
  const StrichartzSpec lqlr = StrichartzSpec::canonical(cfg.grid.dim, cfg.alpha);

  Trajectory traj;
  traj.grid = cfg.grid;
  traj.alpha = cfg.alpha;
  traj.lambda = cfg.lambda;

  Field u = u0;
  double t = 0.0;
  double dt = cfg.dt;
  const double dt_min = cfg.dt * std::ldexp(1.0, -cfg.adaptive.underflow_exponent);
  double hsem = h_seminorm(u, cfg.alpha);

  if (!detail::looks_radial(u0))
    traj.events.push_back({0.0, EventKind::kNonRadialInput, "initial data failed radial probe"});

  auto snapshot = [&](double time, const Field& state) {
    if (!traj.times.empty() && time <= traj.times.back()) return;
    traj.times.push_back(time);
    traj.states.push_back(state);
  };
  auto log_row = [&](double time, const Field& state, double hs, const char* ev) {
    ConservationSample cs = energy(state, cfg.alpha, cfg.lambda, cfg.dealias, time);
    StepLogRow row{time, cs.mass, cs.energy, hs, std::pow(traj.lqlr_partial, 1.0 / lqlr.q),
                   dt, ev};
    traj.log.push_back(row);
    for (const auto& h : hooks) h(time, state, row);
  };

  snapshot(0.0, u);
  log_row(0.0, u, hsem, "");
  std::size_t next_extra = 0;
  std::vector<double> extra = cfg.extra_snapshot_times;
  std::sort(extra.begin(), extra.end());

  long steps = 0;
  const double t_eps = 1e-12 * std::max(1.0, cfg.t_end);
  while (t < cfg.t_end - t_eps) {
    if (steps >= cfg.max_steps) {
      traj.events.push_back({t, EventKind::kMaxSteps, ""});
      break;
    }
    const double dt_step = std::min(dt, cfg.t_end - t);
    Field trial = step_strang(u, dt_step, cfg);
    if (!all_finite(trial)) {
      traj.events.push_back({t, EventKind::kIntegratorDiverged, "NaN in state"});
      break;
    }
    const double hsem_trial = h_seminorm(trial, cfg.alpha);
    if (cfg.adaptive.enabled && hsem_trial > (1.0 + cfg.adaptive.growth_trigger) * hsem) {
      dt = 0.5 * dt_step;
      if (dt < dt_min) {
        traj.events.push_back(
            {t, EventKind::kBlowupTrigger,
             "dt underflow at exponent " + std::to_string(cfg.adaptive.underflow_exponent)});
        break;
      }
      continue;  // reject the trial step
    }
    // accept
    traj.lqlr_partial += dt_step * std::pow(norm_lp(u, lqlr.r), lqlr.q);
    u = std::move(trial);
    t += dt_step;
    hsem = hsem_trial;
    ++steps;

    bool want_snapshot = cfg.snapshot_every > 0 && steps % cfg.snapshot_every == 0;
    while (next_extra < extra.size() && t >= extra[next_extra] - 1e-14) {
      want_snapshot = true;
      ++next_extra;
    }
    if (want_snapshot) snapshot(t, u);
    if (steps % std::max(1, cfg.log_every) == 0) log_row(t, u, hsem, "");

    if (cfg.monitor_mass_leak &&
        detail::contained_mass_fraction(u) < 1.0 - cfg.mass_leak_tol) {
      traj.events.push_back({t, EventKind::kMassLeak, "mass outside |x| < L/2 above tolerance"});
      break;
    }
  }

  snapshot(t, u);
  if (traj.log.empty() || traj.log.back().t != t) {
    double hs = h_seminorm(u, cfg.alpha);
    log_row(t, u, hs, "");
  }
  if (!traj.events.empty()) traj.log.back().event = event_name(traj.events.back().kind);
  traj.final_time = t;
  traj.steps = steps;
  return traj;
}

// Strichartz norm of a trajectory's snapshot sequence.
inline double strichartz_norm(const Trajectory& traj, const StrichartzSpec& spec) {
  return strichartz_norm_samples(traj.times, traj.states, spec);
}

}  // namespace frsh
