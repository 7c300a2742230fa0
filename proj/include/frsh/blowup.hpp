#pragma once

#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "frsh/observables.hpp"
#include "frsh/propagator.hpp"
#include "frsh/radial.hpp"

namespace frsh {

// Radial Gaussian bump exp(-|x|^2 / (2 w^2)) normalized to the requested mass.
inline Field gaussian_bump(const Grid& g, double target_mass, double width) {
  const auto& tab = grid_tables(g);
  const double dx2 = g.dx() * g.dx();
  Field f{g, CVec(g.size())};
  for (std::size_t i = 0; i < f.values.size(); ++i)
    f.values[i] =
        Complex{std::exp(-0.5 * dx2 * static_cast<double>(tab.r2[i]) / (width * width)), 0.0};
  const double m = mass(f);
  const double scale = std::sqrt(target_mass / m);
  for (auto& v : f.values) v *= scale;
  return f;
}

// Negative-energy focusing data for the virial blowup route: a radial
// Gaussian of mass m and width w, with w halved until E < 0 (up to 10 times).
inline Field make_negative_energy_data(double target_mass, double width, const SimConfig& cfg) {
  cfg.validate();
  std::ostringstream table;
  double w = width;
  for (int attempt = 0; attempt <= 10; ++attempt) {
    Field f = gaussian_bump(cfg.grid, target_mass, w);
    ConservationSample cs = energy(f, cfg.alpha, cfg.lambda, cfg.dealias);
    table << "  w=" << w << "  E=" << cs.energy << "\n";
    if (cs.energy < 0.0) return f;
    w *= 0.5;
  }
  throw ParameterError(
      "make_negative_energy_data: E >= 0 for all widths tried (lambda=" +
      std::to_string(cfg.lambda) + ", mass=" + std::to_string(target_mass) +
      "); E(w) table:\n" + table.str());
}

struct BlowupReport {
  std::string verdict;  // "blowup-trigger" | "completed" | "domain-too-small"
  double trigger_time = 0.0;           // T* surrogate (dt-underflow time)
  double dt_min = 0.0;                 // underflow threshold the run used
  std::vector<std::pair<double, double>> hsem_history;  // (t, H^{alpha/2} seminorm)
  double hsem_growth = 0.0;            // max/initial
  double final_lqlr_partial = 0.0;
  std::vector<double> witness_times;
  std::vector<Field> witnesses;        // snapshots at the witness times
  Trajectory trajectory;               // the (second-pass) trajectory
};

// Classify a datum by running the adaptive integrator; on a blowup trigger,
// re-run deterministically to capture snapshots at the geometric witness
// times t_n = T* - (T* - t0) 2^{-n}, t0 = 0, n <= 12.
inline BlowupReport detect_blowup(const Field& u0, const SimConfig& cfg,
                                  int witness_count = 12) {
  SimConfig run = cfg;
  run.validate();
  if (!run.adaptive.enabled)
    throw DomainError("detect_blowup: cfg.adaptive must be enabled");
  BlowupReport rep;
  rep.dt_min = run.dt * std::ldexp(1.0, -run.adaptive.underflow_exponent);

  Trajectory first = evolve(u0, run);
  auto fill_common = [&](const Trajectory& tr) {
    rep.final_lqlr_partial = tr.log.empty() ? 0.0 : tr.log.back().lqlr_partial;
    rep.hsem_history.clear();
    for (const auto& row : tr.log) rep.hsem_history.emplace_back(row.t, row.hseminorm);
    double h0 = rep.hsem_history.empty() ? 0.0 : rep.hsem_history.front().second;
    double hmax = 0.0;
    for (const auto& [t, h] : rep.hsem_history) hmax = std::max(hmax, h);
    rep.hsem_growth = h0 > 0.0 ? hmax / h0 : 0.0;
  };

  if (first.has_event(EventKind::kBlowupTrigger)) {
    rep.verdict = "blowup-trigger";
    for (const auto& e : first.events)
      if (e.kind == EventKind::kBlowupTrigger) rep.trigger_time = e.t;
    std::vector<double> witness;
    for (int n = 0; n <= witness_count; ++n)
      witness.push_back(rep.trigger_time * (1.0 - std::ldexp(1.0, -n)));
    SimConfig second = run;
    second.extra_snapshot_times = witness;
    Trajectory tr = evolve(u0, second);
    fill_common(tr);
    // collect the snapshot at (or just past) each witness time
    for (double tw : witness) {
      std::size_t best = 0;
      while (best + 1 < tr.times.size() && tr.times[best] < tw - 1e-14) ++best;
      if (!rep.witness_times.empty() && tr.times[best] <= rep.witness_times.back()) continue;
      rep.witness_times.push_back(tr.times[best]);
      rep.witnesses.push_back(tr.states[best]);
    }
    rep.trajectory = std::move(tr);
  } else {
    rep.verdict = first.has_event(EventKind::kMassLeak) ? "domain-too-small" : "completed";
    fill_common(first);
    rep.trajectory = std::move(first);
  }
  return rep;
}

struct ProbeVerdict {
  double mass = 0.0;
  std::string verdict;
};

struct MinimalMassEstimate {
  double m_lo = 0.0;  // completed
  double m_hi = 0.0;  // blowup-trigger
  std::string family;
  std::vector<ProbeVerdict> probes;
};

// Bisect the blowup/global threshold of a fixed-shape family (monotone in
// mass). Family-relative bracket only; no claim about the true delta_0.
inline MinimalMassEstimate estimate_minimal_mass(
    const std::function<Field(double)>& family, double m_lo, double m_hi, int n_bisect,
    const SimConfig& cfg, const std::string& family_name = "") {
  if (!(m_lo < m_hi)) throw BracketError("estimate_minimal_mass: need m_lo < m_hi");
  MinimalMassEstimate est;
  est.family = family_name;
  auto verdict_of = [&](double m) {
    BlowupReport rep = detect_blowup(family(m), cfg);
    est.probes.push_back({m, rep.verdict});
    return rep.verdict;
  };
  const std::string v_lo = verdict_of(m_lo);
  const std::string v_hi = verdict_of(m_hi);
  if (v_lo != "completed" || v_hi != "blowup-trigger")
    throw BracketError("estimate_minimal_mass: endpoints do not bracket (lo=" + v_lo +
                       ", hi=" + v_hi + ")");
  for (int i = 0; i < n_bisect; ++i) {
    const double mid = 0.5 * (m_lo + m_hi);
    if (verdict_of(mid) == "blowup-trigger")
      m_hi = mid;
    else
      m_lo = mid;
  }
  est.m_lo = m_lo;
  est.m_hi = m_hi;
  return est;
}

struct ConcentrationRow {
  double t = 0.0;
  double radius = 0.0;       // lambda(t_n)
  double ratio = 0.0;        // (T* - t_n)^{1/alpha} / lambda(t_n)
  double concentrated = 0.0; // int_{|x| <= lambda(t_n)} |u|^2
  double fraction = 0.0;
  double running_max = 0.0;
};

struct ConcentrationReport {
  std::vector<ConcentrationRow> rows;
};

// Concentrated-mass sequence along the witnesses for a shrinking-window
// schedule lambda(t); the schedule must satisfy the vanishing-ratio condition
// (T* - t_n)^{1/alpha} / lambda(t_n) -> 0, checked numerically.
inline ConcentrationReport concentration_scan(
    const BlowupReport& report, const std::function<double(double)>& schedule, double alpha,
    double trigger_time_override = -1.0) {
  const double tstar = trigger_time_override > 0.0 ? trigger_time_override : report.trigger_time;
  if (report.witnesses.empty())
    throw ScheduleError("concentration_scan: report carries no witness snapshots");
  // validate the schedule first
  std::vector<double> ratios;
  for (double tn : report.witness_times) {
    const double lam = schedule(tn);
    if (!(lam > 0.0)) throw ScheduleError("concentration_scan: schedule must be positive");
    ratios.push_back(std::pow(std::max(tstar - tn, 0.0), 1.0 / alpha) / lam);
  }
  for (std::size_t i = 1; i < ratios.size(); ++i)
    if (ratios[i] > ratios[i - 1] * (1.0 + 1e-9)) {
      std::ostringstream oss;
      oss << "concentration_scan: ratio condition violated at t_n = "
          << report.witness_times[i] << " (ratio " << ratios[i] << " after "
          << ratios[i - 1] << ")";
      throw ScheduleError(oss.str());
    }
  if (ratios.size() >= 2 && ratios.back() > 0.5 * ratios.front())
    throw ScheduleError("concentration_scan: ratio does not vanish along the witnesses");

  ConcentrationReport rep;
  double run_max = 0.0;
  for (std::size_t i = 0; i < report.witnesses.size(); ++i) {
    ConcentrationRow row;
    row.t = report.witness_times[i];
    row.radius = schedule(row.t);
    row.ratio = ratios[i];
    row.concentrated = concentration_mass(report.witnesses[i], row.radius);
    const double m = mass(report.witnesses[i]);
    row.fraction = m > 0.0 ? row.concentrated / m : 0.0;
    run_max = std::max(run_max, row.concentrated);
    row.running_max = run_max;
    rep.rows.push_back(row);
  }
  return rep;
}

struct RescaledSnapshot {
  double t = 0.0;
  int band = 0;       // argmax dyadic band of u(t_n)
  double h = 0.0;     // h_n = 2^{-band}
  Field rescaled;     // h^{d/2} u(t_n, h .) on the band's frame grid
  bool at_nyquist = false;
};

struct RescalingProbeResult {
  std::vector<RescaledSnapshot> snapshots;
  std::vector<double> pairwise_distance;  // between consecutive rescaled snapshots
  std::vector<double> ratio_series;       // h_n / (T* - t_n)^{1/alpha}
  std::vector<std::string> warnings;
};

// Compactness-modulo-symmetries probe: pick h_n from the refined-Strichartz
// argmax band, rescale each witness to its unit frame, and report distances
// between consecutive rescaled snapshots plus the Theorem-1.6 ratio series.
inline RescalingProbeResult rescaling_probe(const BlowupReport& report, double alpha,
                                            const RefinedStrichartzParams& params = {}) {
  RescalingProbeResult res;
  if (report.witnesses.empty())
    throw StructuralError("rescaling_probe: report carries no witness snapshots");
  const Grid& g = report.witnesses.front().grid;
  const auto bands = resolved_bands(g);
  const int top_band = bands.empty() ? 0 : bands.back();
  for (std::size_t i = 0; i < report.witnesses.size(); ++i) {
    RefinedFunctionalResult rf = refined_strichartz_functional(report.witnesses[i], params);
    RescaledSnapshot snap;
    snap.t = report.witness_times[i];
    snap.band = rf.band == kNoBand ? 0 : rf.band;
    snap.h = std::ldexp(1.0, -snap.band);
    snap.at_nyquist = snap.band >= top_band - 1;
    if (snap.at_nyquist)
      res.warnings.push_back("rescaling_probe: argmax band at Nyquist near t = " +
                             std::to_string(snap.t));
    snap.rescaled = rescale_to_frame(report.witnesses[i], snap.band);
    const double denom = std::pow(std::max(report.trigger_time - snap.t, 0.0), 1.0 / alpha);
    res.ratio_series.push_back(denom > 0.0 ? snap.h / denom : 0.0);
    res.snapshots.push_back(std::move(snap));
  }
  for (std::size_t i = 0; i + 1 < res.snapshots.size(); ++i) {
    const auto& a = res.snapshots[i];
    const auto& b = res.snapshots[i + 1];
    // compare as box-supported functions on the larger of the two frames
    const int kwide = std::max(a.band, b.band);
    Field fa = embed_resample(a.rescaled, kwide - a.band);
    Field fb = embed_resample(b.rescaled, kwide - b.band);
    res.pairwise_distance.push_back(norm_l2(fa - fb));
  }
  return res;
}

}  // namespace frsh
