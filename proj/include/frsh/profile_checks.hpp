#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "frsh/profiles.hpp"

namespace frsh {

struct ReportWindow {
  double t_end = 1.0;
  int samples = 33;
};

struct PairOrthogonality {
  int j = 0;
  int k = 0;
  std::string relation;
  double bilinear = 0.0;     // ||U(t)Phi_j U(t)Phi_k||_{L^{q/2} L^{r/2}}
  double norm_j = 0.0;       // ||U(t)Phi_j||_{L^q L^r}
  double norm_k = 0.0;
  double ratio = 0.0;        // bilinear / (norm_j * norm_k)
};

struct OrthogonalityReport {
  StrichartzSpec spec;             // pair used for the bilinear norms
  StrichartzSpec canonical_spec;   // (q0, r0), always also reported
  std::vector<PairOrthogonality> pairs;
  std::vector<PairOrthogonality> pairs_canonical;
  double sum_of_squares = 0.0;     // sum_j ||U Phi_j||^2
  double square_of_sum = 0.0;      // ||U sum_j Phi_j||^2
  double almost_orth_defect = 0.0; // square_of_sum - sum_of_squares
};

// Orthogonality-report default pair: admissible with q at the dispersive end,
// so finite-box decorrelation of separated pairs is measurable.
inline StrichartzSpec report_pair(int dim, double alpha) {
  const double q = 8.0;
  const double r = dim / (0.5 * dim - alpha / q);
  return StrichartzSpec::make(dim, alpha, q, r);
}

namespace detail {

struct LinearFlowSamples {
  std::vector<std::vector<Field>> states;  // [component][time]
  std::vector<double> times;
};

inline LinearFlowSamples sample_linear_flows(const Decomposition& dec,
                                             const ReportWindow& window) {
  LinearFlowSamples out;
  const double dt = window.t_end / (window.samples - 1);
  for (int i = 0; i < window.samples; ++i) out.times.push_back(i * dt);
  for (const auto& c : dec.components) {
    Field gam = render_component(c, dec.grid, dec.alpha);
    SpectralField ghat = transform_forward(gam);
    std::vector<Field> flow;
    flow.reserve(window.samples);
    for (int i = 0; i < window.samples; ++i) {
      SpectralField s = ghat;
      linear_propagate_inplace(s, out.times[i], dec.alpha);
      flow.push_back(transform_inverse(s));
    }
    out.states.push_back(std::move(flow));
  }
  return out;
}

inline double bilinear_norm(const std::vector<Field>& a, const std::vector<Field>& b,
                            const std::vector<double>& times, const StrichartzSpec& spec) {
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < times.size(); ++i) {
    Field prod{a[i].grid, CVec(a[i].values.size())};
    for (std::size_t x = 0; x < prod.values.size(); ++x)
      prod.values[x] = a[i].values[x] * b[i].values[x];
    acc += (times[i + 1] - times[i]) * std::pow(norm_lp(prod, 0.5 * spec.r), 0.5 * spec.q);
  }
  return std::pow(acc, 2.0 / spec.q);
}

inline std::vector<PairOrthogonality> pair_table_for(
    const Decomposition& dec, const LinearFlowSamples& flows, const StrichartzSpec& spec,
    const ExtractionConfig& cfg) {
  std::vector<double> norms;
  for (const auto& flow : flows.states)
    norms.push_back(strichartz_norm_samples(flows.times, flow, spec));
  std::vector<PairOrthogonality> pairs;
  for (std::size_t a = 0; a < flows.states.size(); ++a) {
    for (std::size_t b = a; b < flows.states.size(); ++b) {
      PairOrthogonality po;
      po.j = dec.components[a].index;
      po.k = dec.components[b].index;
      po.relation = classify_pair(dec.components[a], dec.components[b], cfg).relation;
      po.bilinear = bilinear_norm(flows.states[a], flows.states[b], flows.times, spec);
      po.norm_j = norms[a];
      po.norm_k = norms[b];
      po.ratio = po.norm_j > 0.0 && po.norm_k > 0.0 ? po.bilinear / (po.norm_j * po.norm_k)
                                                    : 0.0;
      pairs.push_back(po);
    }
  }
  return pairs;
}

}  // namespace detail

// Classify every component pair by its finite-n orthogonality alternative and
// measure the discrete bilinear space-time norms plus the almost-orthogonality
// defect of the Strichartz square sum.
inline OrthogonalityReport orthogonality_report(const Decomposition& dec,
                                                const ReportWindow& window,
                                                const ExtractionConfig& cfg) {
  if (dec.components.empty())
    throw StructuralError("orthogonality_report: decomposition has no components");
  OrthogonalityReport rep;
  rep.spec = report_pair(dec.grid.dim, dec.alpha);
  rep.canonical_spec = StrichartzSpec::canonical(dec.grid.dim, dec.alpha);

  detail::LinearFlowSamples flows = detail::sample_linear_flows(dec, window);
  rep.pairs = detail::pair_table_for(dec, flows, rep.spec, cfg);
  rep.pairs_canonical = detail::pair_table_for(dec, flows, rep.canonical_spec, cfg);

  std::vector<Field> total;
  for (int i = 0; i < window.samples; ++i) {
    Field sum = Field::zeros(dec.grid);
    for (const auto& flow : flows.states)
      for (std::size_t x = 0; x < sum.values.size(); ++x)
        sum.values[x] += flow[i].values[x];
    total.push_back(std::move(sum));
  }
  double ss = 0.0;
  for (const auto& flow : flows.states) {
    const double n = strichartz_norm_samples(flows.times, flow, rep.spec);
    ss += n * n;
  }
  rep.sum_of_squares = ss;
  const double tn = strichartz_norm_samples(flows.times, total, rep.spec);
  rep.square_of_sum = tn * tn;
  rep.almost_orth_defect = rep.square_of_sum - rep.sum_of_squares;
  return rep;
}

// ---- nonlinear decomposition consistency (Prop. 1.4 surrogate) ---------------

struct NonlinearCheckReport {
  bool applicable = true;
  std::string inapplicable_reason;
  double e_ct_l2 = 0.0;     // ||e||_{C_t L2(I)}
  double e_lqlr = 0.0;      // ||e||_{L^{q0} L^{r0}(I)}
  double triple_norm = 0.0; // sum of both
  double beta = 0.0;        // || F(sum psi + U w) - sum F(psi) ||_{L1_t L2_x(I)}
  double u_mass = 0.0;
  std::vector<double> e_history;  // ||e(t_i)||_2
};

// Evolve the synthesized datum and every nonlinear profile (each in its own
// rescaled frame, data at frame time 0), form
// e = u - sum Gamma psi_j - U(.) omega, and measure the error functional and
// the cross-interaction norm beta of the cubic Hartree term.
inline NonlinearCheckReport nonlinear_decomposition_check(const Decomposition& dec,
                                                          const SimConfig& base_cfg,
                                                          double window_t_end) {
  NonlinearCheckReport rep;
  if (!(window_t_end > 0.0))
    throw DomainError("nonlinear_decomposition_check: window must be positive");

  SimConfig cfg = base_cfg;
  cfg.grid = dec.grid;
  cfg.alpha = dec.alpha;
  cfg.t_end = window_t_end;
  cfg.snapshot_every = 1;
  cfg.log_every = 1 << 20;  // conservation log not needed here
  cfg.extra_snapshot_times.clear();
  cfg.validate();

  Field u0 = synthesize(dec.components, dec.remainder, dec.alpha);
  rep.u_mass = norm_l2(u0);
  Trajectory traj_u = evolve(u0, cfg);
  if (traj_u.has_event(EventKind::kBlowupTrigger)) {
    rep.applicable = false;
    rep.inapplicable_reason = "synthesized datum hit blowup-trigger";
    return rep;
  }

  const std::size_t nt = traj_u.times.size();
  std::vector<Trajectory> profile_runs;
  for (const auto& c : dec.components) {
    SimConfig fcfg = cfg;
    fcfg.grid = c.phi.grid;
    const double hpow = std::pow(c.h, cfg.alpha);
    fcfg.dt = cfg.dt / hpow;
    fcfg.t_end = window_t_end / hpow;
    fcfg.monitor_mass_leak = false;  // frames are linear rescales; box is matched
    Field psi0 = linear_propagate(c.phi, c.t / hpow, cfg.alpha);
    Trajectory tr = evolve(psi0, fcfg);
    if (tr.has_event(EventKind::kBlowupTrigger)) {
      rep.applicable = false;
      rep.inapplicable_reason =
          "profile " + std::to_string(c.index) + " hit blowup-trigger";
      return rep;
    }
    if (tr.times.size() != nt) {
      rep.applicable = false;
      rep.inapplicable_reason =
          "profile " + std::to_string(c.index) + " run ended early (event)";
      return rep;
    }
    profile_runs.push_back(std::move(tr));
  }

  SpectralField what = transform_forward(dec.remainder);
  const StrichartzSpec lqlr = StrichartzSpec::canonical(dec.grid.dim, dec.alpha);
  double lqlr_acc = 0.0;
  double beta_acc = 0.0;
  for (std::size_t i = 0; i < nt; ++i) {
    const double t = traj_u.times[i];
    // U(t) omega
    SpectralField ws = what;
    linear_propagate_inplace(ws, t, dec.alpha);
    Field uw = transform_inverse(ws);
    // rendered nonlinear profiles at matched times
    std::vector<Field> gammas;
    for (std::size_t j = 0; j < profile_runs.size(); ++j) {
      const auto& c = dec.components[j];
      gammas.push_back(
          rescale_from_frame(profile_runs[j].states[i], dec.grid, -c.log2_h));
    }
    Field e = traj_u.states[i];
    Field w_sum = uw;  // sum Gamma psi + U(t) omega
    for (const auto& gam : gammas)
      for (std::size_t x = 0; x < e.values.size(); ++x) w_sum.values[x] += gam.values[x];
    for (std::size_t x = 0; x < e.values.size(); ++x) e.values[x] -= w_sum.values[x];
    const double el2 = norm_l2(e);
    rep.e_history.push_back(el2);
    rep.e_ct_l2 = std::max(rep.e_ct_l2, el2);
    if (i + 1 < nt) {
      const double dt = traj_u.times[i + 1] - traj_u.times[i];
      lqlr_acc += dt * std::pow(norm_lp(e, lqlr.r), lqlr.q);
      // beta integrand: F(sum psi + U w) - sum F(psi)
      Field fb = hartree_nonlinearity(w_sum, dec.alpha, cfg.lambda, cfg.dealias);
      for (const auto& gam : gammas) {
        Field fj = hartree_nonlinearity(gam, dec.alpha, cfg.lambda, cfg.dealias);
        for (std::size_t x = 0; x < fb.values.size(); ++x) fb.values[x] -= fj.values[x];
      }
      beta_acc += dt * norm_l2(fb);
    }
  }
  rep.e_lqlr = std::pow(lqlr_acc, 1.0 / lqlr.q);
  rep.triple_norm = rep.e_ct_l2 + rep.e_lqlr;
  rep.beta = beta_acc;
  return rep;
}

}  // namespace frsh
