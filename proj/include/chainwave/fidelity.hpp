#pragma once

// Transfer fidelity averaged over all pure input states on the Bloch sphere,
// and the figures of merit read off a fidelity-vs-time trace.
//
// For the input a|0> + b|1> on the sender the receiver ends up in
//   rho_out = [[1 - |b|^2 |f|^2, a b* v f*], [a* b v* f, |b|^2 |f|^2]]
// with f the transfer amplitude and v the vacuum phase. Averaging
// <psi|rho_out|psi> over the sphere gives
//   F = 1/2 + |f|^2 / 6 + |f| cos(arg f - arg v) / 3.
// The phase-optimized variant drops the relative phase (cos -> 1), which is
// what a local z-rotation on the receiver achieves.

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "chainwave/evolve.hpp"
#include "chainwave/model.hpp"

namespace chainwave {

enum class FidelityMode { averaged, phase_optimized };

inline std::string to_string(FidelityMode m) {
  return m == FidelityMode::averaged ? "averaged" : "phase_optimized";
}

struct FidelitySample {
  double t = 0.0;
  double f_abs = 0.0;
  double rel_phase = 0.0;
  double f_avg = 0.5;
  double f_opt = 0.5;

  [[nodiscard]] double value(FidelityMode m) const {
    return m == FidelityMode::averaged ? f_avg : f_opt;
  }
};

/// Closed-form averaged fidelity for amplitude magnitude |f| and relative phase.
inline double averaged_fidelity(double f_abs, double rel_phase) {
  return 0.5 + f_abs * f_abs / 6.0 + f_abs * std::cos(rel_phase) / 3.0;
}

inline double phase_optimized_fidelity(double f_abs) {
  return 0.5 + f_abs * f_abs / 6.0 + f_abs / 3.0;
}

/// Fidelity sample for a normalized sector state. Throws InvalidParameter for
/// states whose norm differs from 1 by more than 1e-6.
inline FidelitySample fidelity_of_state(const SectorState& s) {
  if (std::abs(s.norm2() - 1.0) > 1e-6)
    throw InvalidParameter("fidelity needs a normalized state, norm^2 = " + std::to_string(s.norm2()));
  const cplx f = s.transfer_amplitude();
  FidelitySample out;
  out.t = s.t;
  out.f_abs = std::abs(f);
  double d = std::arg(f) - std::arg(s.vac_phase);
  d = std::remainder(d, 2.0 * std::numbers::pi);
  if (d <= -std::numbers::pi) d += 2.0 * std::numbers::pi;
  out.rel_phase = d;
  out.f_avg = averaged_fidelity(out.f_abs, d);
  out.f_opt = phase_optimized_fidelity(out.f_abs);
  return out;
}

// ---------------------------------------------------------------------------
// Traces

struct FidelityTrace {
  ChainSpec spec;
  CouplingSchedule first;
  CouplingSchedule last;
  IntegratorConfig integrator;
  std::vector<FidelitySample> samples;

  [[nodiscard]] std::vector<double> values(FidelityMode m) const {
    std::vector<double> v;
    v.reserve(samples.size());
    for (const auto& s : samples) v.push_back(s.value(m));
    return v;
  }
};

struct RunOptions {
  double t_start = 0.0;
  double t_end = 20.0;
  /// Overrides the default step from default_integrator() when set.
  std::optional<double> dt;
  double norm_tol = 1e-8;
};

inline IntegratorConfig integrator_for(const HamiltonianView& h, const RunOptions& opt) {
  IntegratorConfig cfg = default_integrator(h);
  if (opt.dt) cfg.dt = *opt.dt;
  cfg.norm_tol = opt.norm_tol;
  return cfg;
}

/// Injects the excitation on the sender at opt.t_start and records one sample
/// per integrator step (plus the initial one).
inline FidelityTrace record_trace(const ChainSpec& spec, const CouplingSchedule& first,
                                  const CouplingSchedule& last, const RunOptions& opt) {
  const HamiltonianView h(spec, first, last);
  FidelityTrace trace{spec, first, last, integrator_for(h, opt), {}};
  const auto initial = SectorState::sender(spec.n, opt.t_start);
  trace.samples.reserve(static_cast<std::size_t>((opt.t_end - opt.t_start) / trace.integrator.dt) + 2);
  trace.samples.push_back(fidelity_of_state(initial));
  evolve(h, initial, opt.t_end, trace.integrator,
         [&](const SectorState& s) { trace.samples.push_back(fidelity_of_state(s)); });
  return trace;
}

// ---------------------------------------------------------------------------
// Figures of merit

class NoMaximum : public std::runtime_error {
 public:
  NoMaximum() : std::runtime_error("fidelity trace has no local maximum above 0.55") {}
};

class NotStationary : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PeakInfo {
  std::size_t index = 0;
  double t = 0.0;
  double f = 0.5;
  /// Full width at F = (f + 1/2) / 2. +inf when the curve never falls back
  /// to that level after the peak (a localized state).
  double half_width = 0.0;
};

struct TransferSummary {
  std::optional<PeakInfo> first_max;
  std::optional<double> f_stationary;
};

inline constexpr double kPeakThreshold = 0.55;
/// How far the curve must fall after a candidate before it counts as a peak;
/// rejects round-off jitter on a post-decoupling plateau.
inline constexpr double kPeakMinDrop = 1e-6;

/// Earliest strict local maximum of the chosen curve above 0.55 that the
/// curve subsequently drops away from, refined by a parabola through the
/// neighbouring samples.
inline PeakInfo first_maximum(const FidelityTrace& trace,
                              FidelityMode mode = FidelityMode::phase_optimized) {
  const auto& s = trace.samples;
  const auto v = trace.values(mode);
  const std::size_t n = v.size();
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (!(v[i] > kPeakThreshold && v[i] > v[i - 1] && v[i] >= v[i + 1])) continue;

    bool falls = false;
    for (std::size_t k = i + 1; k < n; ++k) {
      if (v[k] > v[i]) break;
      if (v[k] < v[i] - kPeakMinDrop) {
        falls = true;
        break;
      }
    }
    if (!falls) continue;

    PeakInfo p;
    p.index = i;
    p.t = s[i].t;
    p.f = v[i];
    // Parabola through (t[i-1], v[i-1]), (t[i], v[i]), (t[i+1], v[i+1]).
    const double h1 = s[i].t - s[i - 1].t;
    const double h2 = s[i + 1].t - s[i].t;
    const double d1 = (v[i] - v[i - 1]) / h1;
    const double d2 = (v[i + 1] - v[i]) / h2;
    const double curv = (d2 - d1) / (0.5 * (h1 + h2));
    if (curv < 0.0) {
      const double slope_mid = (d1 * h2 + d2 * h1) / (h1 + h2);
      const double shift = -slope_mid / curv;
      if (std::abs(shift) <= std::max(h1, h2)) {
        p.t = s[i].t + shift;
        p.f = v[i] + slope_mid * shift + 0.5 * curv * shift * shift;
      }
    }

    const double level = 0.5 * (p.f + 0.5);
    double left = s.front().t;
    for (std::size_t k = i; k > 0; --k) {
      if (v[k - 1] < level) {
        left = s[k - 1].t + (level - v[k - 1]) / (v[k] - v[k - 1]) * (s[k].t - s[k - 1].t);
        break;
      }
    }
    double right = std::numeric_limits<double>::infinity();
    for (std::size_t k = i; k + 1 < n; ++k) {
      if (v[k + 1] < level) {
        right = s[k].t + (v[k] - level) / (v[k] - v[k + 1]) * (s[k + 1].t - s[k].t);
        break;
      }
    }
    p.half_width = right - left;
    return p;
  }
  throw NoMaximum();
}

/// Phase-optimized fidelity once `last` has fully decoupled the receiver.
/// Throws NotStationary when the schedule never decouples, the trace stops
/// too early, or |f| still moves by 1e-6 or more over the final 5% of it.
inline double stationary_fidelity(const FidelityTrace& trace, const CouplingSchedule& last) {
  const double done = last.decoupling_complete();
  if (!std::isfinite(done)) throw NotStationary("receiver bond is never decoupled");
  if (trace.samples.empty()) throw NotStationary("empty trace");
  const double t0 = trace.samples.front().t;
  const double t1 = trace.samples.back().t;
  if (t1 < done - 1e-9)
    throw NotStationary("trace ends at t=" + std::to_string(t1) + " before decoupling completes at t=" +
                        std::to_string(done));
  const double tail_start = t1 - 0.05 * (t1 - t0);
  double lo = HUGE_VAL;
  double hi = -HUGE_VAL;
  for (const auto& s : trace.samples) {
    if (s.t < tail_start) continue;
    lo = std::min(lo, s.f_abs);
    hi = std::max(hi, s.f_abs);
  }
  if (!(hi - lo < 1e-6))
    throw NotStationary("|f| still varies by " + std::to_string(hi - lo) + " at the end of the trace");
  return trace.samples.back().f_opt;
}

inline TransferSummary summarize(const FidelityTrace& trace,
                                 FidelityMode mode = FidelityMode::phase_optimized) {
  TransferSummary out;
  try {
    out.first_max = first_maximum(trace, mode);
  } catch (const NoMaximum&) {
  }
  try {
    out.f_stationary = stationary_fidelity(trace, trace.last);
  } catch (const NotStationary&) {
  }
  return out;
}

/// End time for a trace that is read out with stationary_fidelity(): past
/// decoupling completion by at least 4 ramp times, and far enough that the
/// final 5% of a trace started at `t_start` lies after completion.
inline double stationary_end(const CouplingSchedule& last, double t_start = 0.0) {
  const double done = last.decoupling_complete();
  if (!std::isfinite(done)) throw InvalidParameter("receiver bond is never decoupled");
  return done + std::max(4.0 * last.ramp_tau(), 0.06 * (done - t_start));
}

}  // namespace chainwave
