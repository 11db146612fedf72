#pragma once

// Fixed-step classical Runge-Kutta integration of i dc/dt = H(t) c in the
// single-excitation sector. The vacuum amplitude is decoupled from the sector
// and is advanced analytically.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "chainwave/model.hpp"

namespace chainwave {

using cplx = std::complex<double>;

struct SectorState {
  double t = 0.0;
  cplx vac_phase{1.0, 0.0};
  std::vector<cplx> amp;

  /// Excitation on site `site` at time t0, vacuum phase 1.
  static SectorState excitation_at(int n, int site, double t0 = 0.0) {
    SectorState s;
    s.t = t0;
    s.amp.assign(static_cast<std::size_t>(n), cplx{});
    s.amp.at(static_cast<std::size_t>(site)) = 1.0;
    return s;
  }

  /// The transfer initial condition |1, 0, ..., 0>.
  static SectorState sender(int n, double t0 = 0.0) { return excitation_at(n, 0, t0); }

  [[nodiscard]] double norm2() const {
    double s = 0.0;
    for (const auto& c : amp) s += std::norm(c);
    return s;
  }

  /// Amplitude on the receiver site.
  [[nodiscard]] cplx transfer_amplitude() const { return amp.back(); }
};

struct IntegratorConfig {
  double dt = 0.005;
  double norm_tol = 1e-8;

  void validate() const {
    if (!(dt > 0.0)) throw InvalidParameter("integrator dt must be positive");
    if (!(norm_tol > 0.0)) throw InvalidParameter("norm_tol must be positive");
  }
};

/// Default step: min(0.005, 0.036 tau / 4) for the finest ramp in `h`, then
/// shrunk so that a noise step is an integer number of integrator steps.
inline IntegratorConfig default_integrator(const HamiltonianView& h) {
  IntegratorConfig cfg;
  double dt = 0.005 / h.spec().j_xy;
  if (const double tau = h.finest_ramp(); std::isfinite(tau)) dt = std::min(dt, 0.036 * tau / 4.0);
  if (const double sw = h.noise_step(); sw > 0.0) dt = sw / std::ceil(sw / dt - 1e-9);
  cfg.dt = dt;
  return cfg;
}

/// Norm of the sector amplitudes drifted more than the configured tolerance.
class NormDrift : public std::runtime_error {
 public:
  NormDrift(double drift, double t)
      : std::runtime_error("norm drift " + std::to_string(drift) + " at t=" + std::to_string(t) +
                           " exceeds tolerance; reduce dt"),
        drift_(drift),
        t_(t) {}
  [[nodiscard]] double drift() const { return drift_; }
  [[nodiscard]] double time() const { return t_; }

 private:
  double drift_;
  double t_;
};

using StateObserver = std::function<void(const SectorState&)>;

namespace detail {

// out = -i * H * c for tridiagonal H.
inline void apply_minus_i_h(const std::vector<double>& diag, const std::vector<double>& off,
                            const std::vector<cplx>& c, std::vector<cplx>& out) {
  const std::size_t n = c.size();
  for (std::size_t j = 0; j < n; ++j) {
    cplx hc = diag[j] * c[j];
    if (j > 0) hc += off[j - 1] * c[j - 1];
    if (j + 1 < n) hc += off[j] * c[j + 1];
    out[j] = cplx(hc.imag(), -hc.real());
  }
}

}  // namespace detail

/// Largest change of an end-bond multiplier between neighbouring RK4 stages
/// before the step is bisected; catches instant switches and the unbounded
/// slope of power-law ramps with small exponents.
inline constexpr double kMaxRampJump = 0.01;
inline constexpr int kMaxBisections = 30;

/// Calls fn(a, b) for consecutive pieces covering [ta, tb]. A piece is split
/// in half while either end multiplier moves by more than kMaxRampJump from
/// its start to its midpoint or from its midpoint to its end. `segment_time`
/// is passed through unchanged so noise lookups stay fixed per outer step.
template <class Fn>
void for_each_substep(const CouplingSchedule& first, const CouplingSchedule& last, double ta, double tb,
                      double segment_time, Fn&& fn, int depth = 0) {
  const double tm = 0.5 * (ta + tb);
  bool split = false;
  if (depth < kMaxBisections) {
    for (const auto* g : {&first, &last}) {
      if (g->is_static()) continue;
      const double a = g->value(ta, segment_time);
      const double m = g->value(tm, segment_time);
      const double b = g->value(tb, segment_time);
      if (std::abs(m - a) > kMaxRampJump || std::abs(b - m) > kMaxRampJump) split = true;
    }
  }
  if (!split) {
    fn(ta, tb);
    return;
  }
  for_each_substep(first, last, ta, tm, segment_time, fn, depth + 1);
  for_each_substep(first, last, tm, tb, segment_time, fn, depth + 1);
}

/// Integrates `initial` up to `t_end`. The observer sees the state after every
/// step. Throws NormDrift when the sector norm leaves its initial value by
/// more than cfg.norm_tol.
inline SectorState evolve(const HamiltonianView& h, const SectorState& initial, double t_end,
                          const IntegratorConfig& cfg, const StateObserver& observer = {}) {
  cfg.validate();
  if (initial.amp.size() != static_cast<std::size_t>(h.size()))
    throw InvalidParameter("state dimension does not match the chain length");
  if (t_end < initial.t) throw InvalidParameter("t_end precedes the initial time");

  const std::size_t n = initial.amp.size();
  const double t0 = initial.t;
  const double norm0 = initial.norm2();
  const double span = t_end - t0;
  const auto full_steps = static_cast<long>(std::floor(span / cfg.dt + 1e-9));
  const double remainder = span - static_cast<double>(full_steps) * cfg.dt;
  const long steps = full_steps + (remainder > 1e-12 * std::max(1.0, span) ? 1 : 0);

  SectorState s = initial;
  std::vector<cplx> k1(n), k2(n), k3(n), k4(n), tmp(n);
  std::vector<double> off_a, off_m, off_b;
  const auto& diag = h.diag();

  auto rk4 = [&](double ta, double tb, double seg) {
    const double step = tb - ta;
    const double tm = ta + 0.5 * step;
    h.offdiag(ta, seg, off_a);
    h.offdiag(tm, seg, off_m);
    h.offdiag(tb, seg, off_b);

    detail::apply_minus_i_h(diag, off_a, s.amp, k1);
    for (std::size_t j = 0; j < n; ++j) tmp[j] = s.amp[j] + (0.5 * step) * k1[j];
    detail::apply_minus_i_h(diag, off_m, tmp, k2);
    for (std::size_t j = 0; j < n; ++j) tmp[j] = s.amp[j] + (0.5 * step) * k2[j];
    detail::apply_minus_i_h(diag, off_m, tmp, k3);
    for (std::size_t j = 0; j < n; ++j) tmp[j] = s.amp[j] + step * k3[j];
    detail::apply_minus_i_h(diag, off_b, tmp, k4);
    for (std::size_t j = 0; j < n; ++j)
      s.amp[j] += (step / 6.0) * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
  };

  for (long k = 0; k < steps; ++k) {
    const double ta = t0 + static_cast<double>(k) * cfg.dt;
    const double step = (k < full_steps) ? cfg.dt : remainder;
    const double tm = ta + 0.5 * step;
    for_each_substep(h.first(), h.last(), ta, ta + step, tm, [&](double a, double b) { rk4(a, b, tm); });

    s.t = (k + 1 == steps) ? t_end : t0 + static_cast<double>(k + 1) * cfg.dt;
    s.vac_phase = initial.vac_phase * std::polar(1.0, -h.vacuum_energy() * (s.t - t0));

    const double drift = std::abs(s.norm2() - norm0);
    if (!(drift <= cfg.norm_tol)) throw NormDrift(drift, s.t);
    if (observer) observer(s);
  }
  return s;
}

struct ConvergenceReport {
  /// max_j |c_j(dt) - c_j(dt/2)| at t_end.
  double discrepancy = 0.0;
  bool converged = false;
};

/// Runs `evolve` with cfg.dt and cfg.dt/2 and compares the end states.
/// `tolerance` decides the converged flag. NormDrift propagates.
inline ConvergenceReport convergence_check(const HamiltonianView& h, const SectorState& initial,
                                           double t_end, const IntegratorConfig& cfg,
                                           double tolerance = 1e-6) {
  IntegratorConfig half = cfg;
  half.dt = 0.5 * cfg.dt;
  const auto coarse = evolve(h, initial, t_end, cfg);
  const auto fine = evolve(h, initial, t_end, half);
  ConvergenceReport r;
  for (std::size_t j = 0; j < coarse.amp.size(); ++j)
    r.discrepancy = std::max(r.discrepancy, std::abs(coarse.amp[j] - fine.amp[j]));
  r.converged = r.discrepancy < tolerance;
  return r;
}

}  // namespace chainwave
