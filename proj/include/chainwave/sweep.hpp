#pragma once

// Grid scans over the ramp parameters and small local optimizers on top of
// them.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "chainwave/fidelity.hpp"
#include "chainwave/model.hpp"
#include "chainwave/parallel.hpp"

namespace chainwave {

enum class SweepQuantity { stationary, first_max };

/// How the sender bond is switched on in a Fermi sweep.
enum class OnRamp { fermi, instant };

struct SweepOptions {
  double t_i = 0.0;
  OnRamp on = OnRamp::fermi;
  unsigned threads = 0;
  std::optional<double> dt;
  FidelityMode mode = FidelityMode::phase_optimized;
};

struct SweepCell {
  double tau = 0.0;
  double t_f = 0.0;
  std::optional<double> first_max;
  std::optional<double> first_max_time;
  std::optional<double> stationary;

  [[nodiscard]] std::optional<double> get(SweepQuantity q) const {
    return q == SweepQuantity::stationary ? stationary : first_max;
  }
};

/// Row-major tau x t_f grid of cells.
struct SweepGrid {
  std::vector<double> taus;
  std::vector<double> tfs;
  std::vector<SweepCell> cells;

  [[nodiscard]] const SweepCell& at(std::size_t i_tau, std::size_t i_tf) const {
    return cells[i_tau * tfs.size() + i_tf];
  }

  [[nodiscard]] std::vector<std::vector<std::optional<double>>> matrix(SweepQuantity q) const {
    std::vector<std::vector<std::optional<double>>> m(taus.size());
    for (std::size_t i = 0; i < taus.size(); ++i)
      for (std::size_t j = 0; j < tfs.size(); ++j) m[i].push_back(at(i, j).get(q));
    return m;
  }

  /// Cell with the largest value of `q`; nullopt when every cell is missing.
  [[nodiscard]] std::optional<SweepCell> best(SweepQuantity q) const {
    const SweepCell* b = nullptr;
    for (const auto& c : cells)
      if (auto v = c.get(q); v && (!b || *v > *b->get(q))) b = &c;
    if (!b) return std::nullopt;
    return *b;
  }
};

/// Evenly spaced grid lo..hi with `count` points (count = 1 gives {lo}).
inline std::vector<double> linspace(double lo, double hi, std::size_t count) {
  std::vector<double> v(count);
  if (count == 1) {
    v[0] = lo;
    return v;
  }
  for (std::size_t i = 0; i < count; ++i)
    v[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  return v;
}

inline void require_increasing(const std::vector<double>& g, const char* name) {
  if (g.empty()) throw InvalidParameter(std::string(name) + " grid is empty");
  for (std::size_t i = 1; i < g.size(); ++i)
    if (!(g[i] > g[i - 1])) throw InvalidParameter(std::string(name) + " grid must be strictly increasing");
}

/// One Fermi-ramp simulation evaluated for both sweep quantities.
inline SweepCell evaluate_fermi_cell(const ChainSpec& spec, double tau, double t_f,
                                     const SweepOptions& opt = {}) {
  const CouplingSchedule first = opt.on == OnRamp::fermi ? CouplingSchedule(schedule::FermiOn{opt.t_i, tau})
                                                         : CouplingSchedule(schedule::InstantOn{opt.t_i});
  const CouplingSchedule last = schedule::FermiOff{t_f, tau};
  RunOptions run;
  run.t_end = stationary_end(last, run.t_start);
  run.dt = opt.dt;
  const auto summary = summarize(record_trace(spec, first, last, run), opt.mode);

  SweepCell c;
  c.tau = tau;
  c.t_f = t_f;
  if (summary.first_max) {
    c.first_max = summary.first_max->f;
    c.first_max_time = summary.first_max->t;
  }
  c.stationary = summary.f_stationary;
  return c;
}

/// Every (tau, t_f) pair simulated independently; cells without a maximum or
/// without a stationary value are left empty.
inline SweepGrid sweep_tau_tf(const ChainSpec& spec, const std::vector<double>& taus,
                              const std::vector<double>& tfs, const SweepOptions& opt = {}) {
  spec.validate();
  require_increasing(taus, "tau");
  require_increasing(tfs, "t_f");
  SweepGrid g{taus, tfs, std::vector<SweepCell>(taus.size() * tfs.size())};
  parallel_for(g.cells.size(), opt.threads, [&](std::size_t k) {
    const double tau = taus[k / tfs.size()];
    const double tf = tfs[k % tfs.size()];
    try {
      g.cells[k] = evaluate_fermi_cell(spec, tau, tf, opt);
    } catch (const NormDrift&) {
      g.cells[k] = SweepCell{tau, tf, {}, {}, {}};
    }
  });
  return g;
}

// ---------------------------------------------------------------------------
// Local refinement

struct Box {
  double tau_lo, tau_hi, tf_lo, tf_hi;
};

struct Optimum {
  double tau = 0.0;
  double t_f = 0.0;
  double value = -std::numeric_limits<double>::infinity();
  double coarse_value = -std::numeric_limits<double>::infinity();
};

using Objective = std::function<std::optional<double>(double tau, double t_f)>;

namespace detail {

inline double score(const Objective& f, double tau, double tf) {
  const auto v = f(tau, tf);
  return v ? *v : -std::numeric_limits<double>::infinity();
}

// One coordinate move: evaluate x - h, x + h, and the vertex of the parabola
// through the three points; keep the best of everything seen.
inline void refine_axis(double& x, double& best, double h, double lo, double hi,
                        const std::function<double(double)>& eval) {
  const double xl = std::max(lo, x - h);
  const double xr = std::min(hi, x + h);
  const double fl = xl < x ? eval(xl) : -HUGE_VAL;
  const double fr = xr > x ? eval(xr) : -HUGE_VAL;
  double cand_x = x;
  double cand_f = best;
  if (fl > cand_f) cand_x = xl, cand_f = fl;
  if (fr > cand_f) cand_x = xr, cand_f = fr;
  // Vertex only for a symmetric, finite stencil.
  if (xl == x - h && xr == x + h && std::isfinite(fl) && std::isfinite(fr) && std::isfinite(best)) {
    const double denom = fl - 2.0 * best + fr;
    if (denom < 0.0) {
      const double xv = std::clamp(x + 0.5 * h * (fl - fr) / denom, xl, xr);
      if (xv != x && xv != xl && xv != xr) {
        const double fv = eval(xv);
        if (fv > cand_f) cand_x = xv, cand_f = fv;
      }
    }
  }
  x = cand_x;
  best = cand_f;
}

}  // namespace detail

/// Coordinate-wise three-point parabolic refinement starting from a grid
/// optimum. The step starts at the grid spacing and halves every round; the
/// result is never worse than the starting point.
inline Optimum refine_optimum(const Objective& f, const Box& box, Optimum start, double h_tau, double h_tf,
                              int rounds = 2) {
  Optimum o = start;
  for (int r = 0; r < rounds; ++r) {
    detail::refine_axis(o.tau, o.value, h_tau, box.tau_lo, box.tau_hi,
                        [&](double tau) { return detail::score(f, tau, o.t_f); });
    detail::refine_axis(o.t_f, o.value, h_tf, box.tf_lo, box.tf_hi,
                        [&](double tf) { return detail::score(f, o.tau, tf); });
    h_tau *= 0.5;
    h_tf *= 0.5;
  }
  return o;
}

/// Coarse `points x points` grid over `box`, then refine_optimum(). With a
/// single point the box centre is evaluated and returned unrefined.
inline Optimum grid_then_refine(const Objective& f, const Box& box, std::size_t points, unsigned threads,
                                int rounds = 2) {
  if (points < 1) throw InvalidParameter("optimizer budget must be at least 1");
  const auto taus = points == 1 ? std::vector<double>{0.5 * (box.tau_lo + box.tau_hi)}
                                : linspace(box.tau_lo, box.tau_hi, points);
  const auto tfs = points == 1 ? std::vector<double>{0.5 * (box.tf_lo + box.tf_hi)}
                               : linspace(box.tf_lo, box.tf_hi, points);
  std::vector<double> vals(taus.size() * tfs.size());
  parallel_for(vals.size(), threads,
               [&](std::size_t k) { vals[k] = detail::score(f, taus[k / tfs.size()], tfs[k % tfs.size()]); });
  const auto k = static_cast<std::size_t>(std::max_element(vals.begin(), vals.end()) - vals.begin());
  Optimum o{taus[k / tfs.size()], tfs[k % tfs.size()], vals[k], vals[k]};
  if (points == 1) return o;
  return refine_optimum(f, box, o, taus[1] - taus[0], tfs[1] - tfs[0], rounds);
}

// ---------------------------------------------------------------------------
// Optimizations over ramp parameters

struct OptimizeOptions {
  Box box{0.05, 2.0, 4.0, 9.0};
  std::size_t points = 40;
  int rounds = 2;
  unsigned threads = 0;
  std::optional<double> dt;
  double t_i = 0.0;
};

/// Best (tau, t_f) for the Fermi family, or the instant-on variant where only
/// the receiver ramp is optimized.
inline Optimum optimize_fermi(const ChainSpec& spec, SweepQuantity q, OnRamp on,
                              const OptimizeOptions& opt = {}) {
  SweepOptions so;
  so.t_i = opt.t_i;
  so.on = on;
  so.dt = opt.dt;
  so.threads = 1;
  const Objective f = [&](double tau, double tf) -> std::optional<double> {
    try {
      return evaluate_fermi_cell(spec, tau, tf, so).get(q);
    } catch (const NormDrift&) {
      return std::nullopt;
    }
  };
  return grid_then_refine(f, opt.box, opt.points, opt.threads, opt.rounds);
}

/// First fidelity maximum for the power-law ramps with exponent `a`.
inline std::optional<double> powerlaw_first_max(const ChainSpec& spec, double a, double tau, double t_f,
                                                std::optional<double> dt = {}) {
  const CouplingSchedule first = schedule::PowerOn{tau, a};
  const CouplingSchedule last = schedule::PowerOff{t_f, tau, a};
  RunOptions run;
  run.t_end = last.decoupling_complete() + 0.5;
  run.dt = dt;
  try {
    return first_maximum(record_trace(spec, first, last, run)).f;
  } catch (const NoMaximum&) {
    return std::nullopt;
  } catch (const NormDrift&) {
    return std::nullopt;
  }
}

struct PowerlawPoint {
  double a = 0.0;
  double best_tau = 0.0;
  double best_tf = 0.0;
  double f_first_max = 0.0;
  double coarse_f = 0.0;
};

struct PowerlawOptions {
  Box box{0.2, 3.0, 3.0, 9.0};
  int rounds = 2;
  unsigned threads = 0;
  std::optional<double> dt;
};

/// For each exponent, (tau, t_f) chosen on a budget x budget grid and then
/// refined to maximize the first fidelity maximum.
inline std::vector<PowerlawPoint> sweep_powerlaw(const ChainSpec& spec, const std::vector<double>& a_grid,
                                                 std::size_t budget, const PowerlawOptions& opt = {}) {
  spec.validate();
  if (a_grid.empty()) throw InvalidParameter("exponent grid is empty");
  for (double a : a_grid)
    if (!(a > 0.0)) throw InvalidParameter("power-law exponent must be positive");
  std::vector<PowerlawPoint> out;
  out.reserve(a_grid.size());
  for (double a : a_grid) {
    const Objective f = [&](double tau, double tf) { return powerlaw_first_max(spec, a, tau, tf, opt.dt); };
    const auto o = grid_then_refine(f, opt.box, budget, opt.threads, opt.rounds);
    out.push_back({a, o.tau, o.t_f, o.value, o.coarse_value});
  }
  return out;
}

}  // namespace chainwave
