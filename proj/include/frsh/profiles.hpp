#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "frsh/observables.hpp"
#include "frsh/propagator.hpp"

namespace frsh {

// One bubble of the decomposition: Gamma phi = U(t) [ h^{-d/2} phi(./h) ]
// with dyadic h = 2^m. phi lives on the scale-matched frame grid
// (same N, box h^{-1} * L_target), so the dilation is a bijective
// same-index spectral map and an exact L2 isometry.
struct ProfileComponent {
  Field phi;
  int log2_h = 0;  // m, h = 2^m
  double h = 1.0;
  double t = 0.0;
  int band = 0;   // dyadic band the scale was extracted from (= -m)
  int index = 0;
  double mass2 = 0.0;  // ||phi||_2^2
};

struct ExtractionConfig {
  double alpha = 1.8;

  // scale extraction (Prop. 3.1 surrogate)
  double delta_frac = 0.1;  // stop when the refined functional < delta_frac * ||u||_2
  std::optional<double> delta_abs;
  RefinedStrichartzParams refined{};
  double cap_c = 1.0;  // the proof's c1 in the amplitude cap
  int max_passes = 8;
  double rho_perp = 16.0;  // scales with ratio >= rho_perp are orthogonal

  // time-shift extraction (Prop. 3.2 surrogate)
  double t_sep = 10.0;
  int m_max = 4;
  int refine_sweeps = 2;  // re-fit each accepted (s, phi) with the others deflated
  double mu_floor_frac = 0.05;
  std::optional<double> mu_floor_abs;
  double shift_min = -32.0;
  double shift_max = 32.0;
  double shift_step = 0.25;
  double window_radius = 8.0;  // sharp radial window of the correlation surrogate
  double tail_fraction = 0.5;

  // remainder diagnostics
  double remainder_window = 1.0;
  int remainder_samples = 16;

  void validate() const {
    refined.validate();
    if (!(delta_frac > 0.0)) throw DomainError("ExtractionConfig: delta must be positive");
    if (!(rho_perp >= 4.0)) throw DomainError("ExtractionConfig: rho_perp must be >= 4");
    if (!(t_sep > 0.0)) throw DomainError("ExtractionConfig: t_sep must be positive");
    if (m_max < 1) throw DomainError("ExtractionConfig: m_max must be >= 1");
    if (!(shift_step > 0.0) || !(shift_max > shift_min))
      throw DomainError("ExtractionConfig: bad shift lattice");
    if (!(window_radius > 0.0)) throw DomainError("ExtractionConfig: window_radius must be positive");
    if (!(tail_fraction > 0.0 && tail_fraction <= 1.0))
      throw DomainError("ExtractionConfig: tail_fraction must lie in (0,1]");
  }

  double resolve_delta(double u_norm) const {
    return delta_abs ? *delta_abs : delta_frac * u_norm;
  }
  double resolve_mu_floor(double u_norm) const {
    return mu_floor_abs ? *mu_floor_abs : mu_floor_frac * u_norm;
  }
  // Amplitude cap of the Prop. 3.1 proof at scale rho = 2^k.
  double amplitude_cap(double delta, double rho, int dim) const {
    const double p = refined.p;
    return std::pow(0.5 * cap_c, p / (2.0 - p)) * std::pow(rho, -0.5 * dim) *
           std::pow(delta, p / (refined.theta * (p - 2.0)));
  }
};

// ---- rendering and synthesis ----------------------------------------------

// Gamma phi on the target grid. Requires phi's grid to be the scale-matched
// frame (L_phi = L_target / h).
inline Field render_component(const ProfileComponent& c, const Grid& target, double alpha) {
  const int k = -c.log2_h;
  Field dilated = rescale_from_frame(c.phi, target, k);
  if (c.t == 0.0) return dilated;
  return linear_propagate(dilated, c.t, alpha);
}

// sum_j Gamma phi_j + omega on omega's grid.
inline Field synthesize(const std::vector<ProfileComponent>& components, const Field& omega,
                        double alpha) {
  Field out = omega;
  for (const auto& c : components) {
    Field g = render_component(c, omega.grid, alpha);
    for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] += g.values[i];
  }
  return out;
}

// ---- scale extraction (Prop. 3.1 surrogate) --------------------------------

struct ScaleGroup {
  int rep_band = 0;                // band of the first (heaviest) extracted piece
  std::vector<int> member_bands;
  Field piece;                     // sum of the group's annulus pieces
  std::vector<std::uint8_t> mask;  // lattice points owned by this group
  double mass2 = 0.0;
};

struct ExtractScalesResult {
  std::vector<ScaleGroup> groups;
  Field leftover;  // q^N: exact telescoping u = sum f^j + q^N
  std::vector<double> functional_history;  // value before each pass
  bool converged = true;
  std::vector<std::string> warnings;
};

inline ExtractScalesResult extract_scales(const Field& u, const ExtractionConfig& cfg) {
  cfg.validate();
  const double unorm = norm_l2(u);
  if (unorm == 0.0) throw DomainError("extract_scales: input must be nonzero");
  const double delta = cfg.resolve_delta(unorm);
  const Grid& g = u.grid;
  const auto& tab = grid_tables(g);
  const double dxi = g.dxi();

  SpectralField residual = transform_forward(u);
  struct Piece {
    int band;
    CVec coeffs;
    std::vector<std::uint8_t> mask;
    double mass2;
  };
  std::vector<Piece> pieces;
  std::vector<int> dead_bands;
  ExtractScalesResult res;

  for (int pass = 0; pass < cfg.max_passes; ++pass) {
    RefinedFunctionalResult rf = refined_strichartz_functional_spectral(residual, cfg.refined);
    // skip bands that cannot yield a nonempty capped piece anymore
    double best = 0.0;
    int kbest = kNoBand;
    for (const auto& [k, w] : rf.weights) {
      if (std::find(dead_bands.begin(), dead_bands.end(), k) != dead_bands.end()) continue;
      if (w > best) {
        best = w;
        kbest = k;
      }
    }
    res.functional_history.push_back(best);
    if (best < delta || kbest == kNoBand) {
      res.converged = true;
      break;
    }
    res.converged = false;

    const double rho = std::ldexp(1.0, kbest);
    const double cap = cfg.amplitude_cap(delta, rho, g.dim);
    const double lo = std::ldexp(1.0, kbest - 1);
    const double hi = std::ldexp(1.0, kbest + 1);

    Piece piece;
    piece.band = kbest;
    piece.coeffs.assign(residual.coeffs.size(), Complex{0.0, 0.0});
    piece.mask.assign(residual.coeffs.size(), 0);
    piece.mass2 = 0.0;
    std::size_t taken = 0;
    for (std::size_t i = 0; i < residual.coeffs.size(); ++i) {
      const double xi = dxi * std::sqrt(static_cast<double>(tab.k2[i]));
      if (!(xi > lo && xi <= hi)) continue;
      const Complex cval = residual.coeffs[i];
      if (cval == Complex{0.0, 0.0}) continue;
      if (std::abs(cval) >= cap) continue;  // proof's capped-amplitude truncation
      piece.coeffs[i] = cval;
      piece.mask[i] = 1;
      residual.coeffs[i] = Complex{0.0, 0.0};
      ++taken;
    }
    if (taken == 0) {
      dead_bands.push_back(kbest);
      res.warnings.push_back("band " + std::to_string(kbest) +
                             " exhausted by the amplitude cap");
      continue;
    }
    SpectralField ps{g, piece.coeffs};
    piece.mass2 = norm_l2(ps);
    piece.mass2 *= piece.mass2;
    pieces.push_back(std::move(piece));
  }
  if (!res.converged)
    res.warnings.push_back("extract_scales: functional still above delta after max passes");

  // group pieces whose scales are non-orthogonal (ratio < rho_perp)
  const double log2_rho_perp = std::log2(cfg.rho_perp);
  for (auto& piece : pieces) {
    ScaleGroup* home = nullptr;
    for (auto& grp : res.groups)
      if (std::abs(piece.band - grp.rep_band) < log2_rho_perp - 1e-12) {
        home = &grp;
        break;
      }
    if (!home) {
      ScaleGroup grp;
      grp.rep_band = piece.band;
      grp.piece = Field::zeros(g);
      grp.mask.assign(g.size(), 0);
      res.groups.push_back(std::move(grp));
      home = &res.groups.back();
    }
    home->member_bands.push_back(piece.band);
    home->mass2 += piece.mass2;
    SpectralField ps{g, std::move(piece.coeffs)};
    Field pf = transform_inverse(ps);
    for (std::size_t i = 0; i < pf.values.size(); ++i) {
      home->piece.values[i] += pf.values[i];
      home->mask[i] |= piece.mask[i];
    }
  }
  res.leftover = transform_inverse(residual);
  return res;
}

// ---- time-shift extraction (Prop. 3.2 surrogate) ----------------------------

struct ShiftProfile {
  Field phi;    // on the frame grid
  double s = 0.0;
  double correlation = 0.0;
};

struct ExtractShiftsResult {
  std::vector<ShiftProfile> profiles;
  std::vector<Field> remainders;  // e^M_n, one per input field
  bool separation_conflict = false;
  std::vector<std::string> warnings;
};

namespace detail {

inline std::vector<std::uint8_t> radial_window_mask(const Grid& g, double radius) {
  const auto& tab = grid_tables(g);
  const double r2max = radius * radius / (g.dx() * g.dx());
  std::vector<std::uint8_t> w(g.size());
  for (std::size_t i = 0; i < w.size(); ++i)
    w[i] = static_cast<double>(tab.r2[i]) <= r2max ? 1 : 0;
  return w;
}

}  // namespace detail

// Surrogate of the weak-limit extraction: over the shift lattice, evaluate
// c(s) = || W . mean_tail U(-s) F_n ||_2 with W a sharp radial window; take
// the maximizer, deflate, repeat. Sharp W makes the deflation exact in the
// sense <U(-s*) F_deflated (tail mean), phi> = 0.
inline ExtractShiftsResult extract_time_shifts(const std::vector<Field>& fn,
                                               const ExtractionConfig& cfg,
                                               std::optional<double> mu_floor_override = {}) {
  cfg.validate();
  if (fn.empty()) throw StructuralError("extract_time_shifts: empty sequence");
  const Grid& g = fn.front().grid;
  for (const auto& f : fn) check_same_grid(f.grid, g, "extract_time_shifts");

  const std::size_t n_tail =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(cfg.tail_fraction * fn.size())));
  double mean_tail_norm = 0.0;
  Field avg = Field::zeros(g);
  for (std::size_t n = fn.size() - n_tail; n < fn.size(); ++n) {
    for (std::size_t i = 0; i < avg.values.size(); ++i) avg.values[i] += fn[n].values[i];
    mean_tail_norm += norm_l2(fn[n]);
  }
  mean_tail_norm /= static_cast<double>(n_tail);
  for (auto& v : avg.values) v /= static_cast<double>(n_tail);

  const double mu_floor = mu_floor_override ? *mu_floor_override
                                            : cfg.resolve_mu_floor(mean_tail_norm);
  const auto window = detail::radial_window_mask(g, cfg.window_radius);

  // candidate shifts ordered by |s| (ties toward the negative one) so that a
  // strict comparison realizes the smaller-|s| tie-break
  std::vector<double> candidates;
  for (double s = cfg.shift_min; s <= cfg.shift_max + 0.5 * cfg.shift_step;
       s += cfg.shift_step)
    candidates.push_back(s);
  std::sort(candidates.begin(), candidates.end(), [](double a, double b) {
    const double fa = std::abs(a), fb = std::abs(b);
    return fa != fb ? fa < fb : a < b;
  });

  ExtractShiftsResult res;

  // windowed-correlation search over the shift lattice; `exclude` lists
  // shifts whose t_sep neighborhoods are off limits
  struct SearchHit {
    double best_allowed = -1.0;
    double best_any = -1.0;
    double s = 0.0;
    Field phi;
  };
  auto search = [&](const Field& state, const std::vector<double>& exclude) {
    SearchHit hit;
    SpectralField state_hat = transform_forward(state);
    for (double s : candidates) {
      SpectralField shifted = state_hat;
      linear_propagate_inplace(shifted, -s, cfg.alpha);
      Field cand = transform_inverse(shifted);
      double c2 = 0.0;
      for (std::size_t i = 0; i < cand.values.size(); ++i) {
        if (!window[i])
          cand.values[i] = Complex{0.0, 0.0};
        else
          c2 += std::norm(cand.values[i]);
      }
      const double c = std::sqrt(c2 * g.cell_volume());
      hit.best_any = std::max(hit.best_any, c);
      bool allowed = true;
      for (double e : exclude)
        if (std::abs(s - e) < cfg.t_sep) {
          allowed = false;
          break;
        }
      if (allowed && c > hit.best_allowed) {
        hit.best_allowed = c;
        hit.s = s;
        hit.phi = std::move(cand);
      }
    }
    return hit;
  };
  auto propagated = [&](const ShiftProfile& p) {
    SpectralField phi_hat = transform_forward(p.phi);
    linear_propagate_inplace(phi_hat, p.s, cfg.alpha);
    return transform_inverse(phi_hat);
  };

  for (int pass = 0; pass < cfg.m_max; ++pass) {
    std::vector<double> exclude;
    for (const auto& p : res.profiles) exclude.push_back(p.s);
    SearchHit hit = search(avg, exclude);
    if (hit.best_allowed < mu_floor) {
      if (hit.best_any >= mu_floor) {
        res.separation_conflict = true;
        res.warnings.push_back(
            "extract_time_shifts: correlation above mu_floor only within t_sep of accepted shifts");
      }
      break;
    }
    res.profiles.push_back({hit.phi, hit.s, hit.best_allowed});
    Field up = propagated(res.profiles.back());
    for (std::size_t i = 0; i < avg.values.size(); ++i) avg.values[i] -= up.values[i];
  }

  // refinement: re-fit each accepted profile with every other one deflated;
  // removes the cross-interference bias of the greedy pass
  for (int sweep = 0; sweep < cfg.refine_sweeps && res.profiles.size() > 1; ++sweep) {
    for (auto& p : res.profiles) {
      Field up = propagated(p);
      for (std::size_t i = 0; i < avg.values.size(); ++i) avg.values[i] += up.values[i];
      std::vector<double> exclude;
      for (const auto& q : res.profiles)
        if (&q != &p) exclude.push_back(q.s);
      SearchHit hit = search(avg, exclude);
      if (hit.best_allowed >= mu_floor) {
        p.phi = hit.phi;
        p.s = hit.s;
        p.correlation = hit.best_allowed;
      }
      Field down = propagated(p);
      for (std::size_t i = 0; i < avg.values.size(); ++i) avg.values[i] -= down.values[i];
    }
  }

  // exact telescoping remainders per sequence element
  res.remainders = fn;
  for (const auto& p : res.profiles) {
    Field up = propagated(p);
    for (auto& f : res.remainders)
      for (std::size_t i = 0; i < f.values.size(); ++i) f.values[i] -= up.values[i];
  }
  return res;
}

// ---- assembled decomposition (Theorem 1.1 surrogate) ------------------------

struct PairClassification {
  int j = 0;
  int k = 0;
  std::string relation;     // "same" | "scale" | "time" | "none"
  double scale_ratio = 1.0; // max(h_j/h_k, h_k/h_j)
  double time_gap_scaled = 0.0;  // |t_j - t_k| / h^alpha at equal scale
};

struct Decomposition {
  Grid grid;
  double alpha = 0.0;
  std::vector<ProfileComponent> components;
  Field remainder;  // omega = u - sum Gamma phi, exact by construction
  double input_mass2 = 0.0;
  double pyth_defect = 0.0;  // ||u||^2 - (sum ||phi||^2 + ||omega||^2)
  double remainder_dispersive = 0.0;  // ||U(t) omega||_{Lq0 Lr0} over the declared window
  std::vector<PairClassification> pair_table;
  std::vector<std::string> warnings;
};

inline PairClassification classify_pair(const ProfileComponent& a, const ProfileComponent& b,
                                        const ExtractionConfig& cfg) {
  PairClassification pc;
  pc.j = a.index;
  pc.k = b.index;
  pc.scale_ratio = std::max(a.h / b.h, b.h / a.h);
  if (a.index == b.index) {
    pc.relation = "same";
    return pc;
  }
  if (pc.scale_ratio >= cfg.rho_perp * (1.0 - 1e-12)) {
    pc.relation = "scale";
    return pc;
  }
  if (a.log2_h == b.log2_h) {
    pc.time_gap_scaled = std::abs(a.t - b.t) / std::pow(a.h, cfg.alpha);
    pc.relation = pc.time_gap_scaled >= cfg.t_sep * (1.0 - 1e-12) ? "time" : "none";
    return pc;
  }
  pc.relation = "none";
  return pc;
}

// Pipeline: extract_scales on the sequence tail average, per-group per-n mask
// application, unit-frame rescale, extract_time_shifts, then the parameter
// back-map (h, t) = (rho^{-1}, rho^{-alpha} s). Components sorted by mass.
inline Decomposition decompose(const std::vector<Field>& u_seq, const ExtractionConfig& cfg) {
  cfg.validate();
  Decomposition dec;
  dec.alpha = cfg.alpha;
  if (u_seq.empty()) return dec;

  const Grid& g = u_seq.front().grid;
  for (const auto& u : u_seq) check_same_grid(u.grid, g, "decompose");
  dec.grid = g;

  const std::size_t n_tail = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(cfg.tail_fraction * u_seq.size())));
  Field ubar = Field::zeros(g);
  for (std::size_t n = u_seq.size() - n_tail; n < u_seq.size(); ++n)
    for (std::size_t i = 0; i < ubar.values.size(); ++i)
      ubar.values[i] += u_seq[n].values[i];
  for (auto& v : ubar.values) v /= static_cast<double>(n_tail);

  const double unorm = norm_l2(ubar);
  dec.input_mass2 = unorm * unorm;
  if (unorm == 0.0) {
    dec.remainder = ubar;
    return dec;
  }

  ExtractScalesResult es = extract_scales(ubar, cfg);
  dec.warnings = es.warnings;
  const double mu_abs = cfg.resolve_mu_floor(unorm);

  for (const auto& grp : es.groups) {
    const int k = grp.rep_band;
    // per-n group pieces via the group's spectral mask
    std::vector<Field> fn;
    fn.reserve(u_seq.size());
    for (const auto& u : u_seq) {
      SpectralField s = transform_forward(u);
      for (std::size_t i = 0; i < s.coeffs.size(); ++i)
        if (!grp.mask[i]) s.coeffs[i] = Complex{0.0, 0.0};
      fn.push_back(rescale_to_frame(transform_inverse(s), k));
    }
    ExtractShiftsResult sh = extract_time_shifts(fn, cfg, mu_abs);
    for (const auto& w : sh.warnings) dec.warnings.push_back(w);
    const double h = std::ldexp(1.0, -k);
    for (const auto& p : sh.profiles) {
      ProfileComponent comp;
      comp.phi = p.phi;
      comp.log2_h = -k;
      comp.h = h;
      comp.t = std::pow(h, cfg.alpha) * p.s;
      comp.band = k;
      const double m = norm_l2(p.phi);
      comp.mass2 = m * m;
      dec.components.push_back(std::move(comp));
    }
  }

  std::sort(dec.components.begin(), dec.components.end(),
            [](const ProfileComponent& a, const ProfileComponent& b) {
              return a.mass2 > b.mass2;
            });
  for (std::size_t j = 0; j < dec.components.size(); ++j)
    dec.components[j].index = static_cast<int>(j);

  // remainder by subtraction on the original grid: reconstruction is exact
  dec.remainder = ubar;
  for (const auto& c : dec.components) {
    Field gam = render_component(c, g, cfg.alpha);
    for (std::size_t i = 0; i < dec.remainder.values.size(); ++i)
      dec.remainder.values[i] -= gam.values[i];
  }

  double sum_mass2 = 0.0;
  for (const auto& c : dec.components) sum_mass2 += c.mass2;
  const double wn = norm_l2(dec.remainder);
  dec.pyth_defect = dec.input_mass2 - (sum_mass2 + wn * wn);

  // dispersive size of the remainder over the declared window
  if (cfg.remainder_samples >= 2 && cfg.remainder_window > 0.0) {
    std::vector<double> times;
    std::vector<Field> states;
    SpectralField whats = transform_forward(dec.remainder);
    const double dtw = cfg.remainder_window / (cfg.remainder_samples - 1);
    for (int i = 0; i < cfg.remainder_samples; ++i) {
      SpectralField s = whats;
      linear_propagate_inplace(s, i * dtw, cfg.alpha);
      times.push_back(i * dtw);
      states.push_back(transform_inverse(s));
    }
    dec.remainder_dispersive = strichartz_norm_samples(
        times, states, StrichartzSpec::canonical(g.dim, cfg.alpha));
  }

  for (std::size_t a = 0; a < dec.components.size(); ++a)
    for (std::size_t b = a; b < dec.components.size(); ++b)
      dec.pair_table.push_back(classify_pair(dec.components[a], dec.components[b], cfg));
  return dec;
}

}  // namespace frsh
