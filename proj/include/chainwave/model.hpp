#pragma once

// Chain parameters, coupling schedules, and the single-excitation
// Hamiltonian of a nearest-neighbour XXZ qubit chain whose first and last
// bonds are switched on and off in time.
//
// Conventions: hbar = 1, energies in units of the bulk coupling J_xy and
// times in units of 1/J_xy. An excitation is spin-up (sigma_z = +1); the
// vacuum |0...0> is all spins down. Site 0 is the sender, site n-1 the
// receiver.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace chainwave {

/// Thrown for parameter sets that violate a type invariant.
class InvalidParameter : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ChainSpec {
  int n = 10;
  double j_xy = 1.0;
  double j_z = 0.0;
  double b = 0.0;
  /// One multiplier offset per bond; bond i carries j_xy * (1 + bond_disorder[i]).
  std::vector<double> bond_disorder;

  /// Uniform chain of n sites with no disorder.
  static ChainSpec uniform(int n, double j_xy = 1.0, double j_z = 0.0, double b = 0.0) {
    ChainSpec s;
    s.n = n;
    s.j_xy = j_xy;
    s.j_z = j_z;
    s.b = b;
    s.bond_disorder.assign(n >= 2 ? static_cast<std::size_t>(n - 1) : 0U, 0.0);
    return s;
  }

  [[nodiscard]] std::size_t bonds() const { return static_cast<std::size_t>(n - 1); }

  void validate() const {
    if (n < 2) throw InvalidParameter("chain needs at least 2 sites, got " + std::to_string(n));
    if (!(j_xy > 0.0)) throw InvalidParameter("j_xy must be positive");
    if (bond_disorder.size() != bonds())
      throw InvalidParameter("bond_disorder must have n-1 = " + std::to_string(n - 1) +
                             " entries, got " + std::to_string(bond_disorder.size()));
    for (double r : bond_disorder)
      if (!(1.0 + r > 0.0)) throw InvalidParameter("bond multiplier 1+r must be positive");
  }
};

// ---------------------------------------------------------------------------
// Schedules

namespace schedule {

struct Static {};

/// 1 / (1 + exp((t_i - t)/tau)): switches the bond on around t_i.
struct FermiOn {
  double t_i = 0.0;
  double tau = 1.0;
};

/// 1 / (1 + exp((t - t_f)/tau)): switches the bond off around t_f.
struct FermiOff {
  double t_f = 6.2;
  double tau = 1.0;
};

/// 0 before t = 0, (t/tau)^a on [0, tau], 1 afterwards.
struct PowerOn {
  double tau = 1.0;
  double a = 1.0;
};

/// 1 before t_f, ((t_f - t)/tau + 1)^a on [t_f, t_f + tau], 0 afterwards.
struct PowerOff {
  double t_f = 6.2;
  double tau = 1.0;
  double a = 1.0;
};

/// tau -> 0 limit of FermiOn: 1 for t >= t_i, else 0.
struct InstantOn {
  double t_i = 0.0;
};

/// tau -> 0 limit of FermiOff: 1 for t <= t_f, else 0.
struct InstantOff {
  double t_f = 0.0;
};

}  // namespace schedule

class NoiseTrack;
struct Noisy;

/// Multiplier g(t) applied to one end bond. Value type; Noisy shares its
/// immutable payload.
class CouplingSchedule {
 public:
  using Variant = std::variant<schedule::Static, schedule::FermiOn, schedule::FermiOff,
                               schedule::PowerOn, schedule::PowerOff, schedule::InstantOn,
                               schedule::InstantOff, std::shared_ptr<const Noisy>>;

  CouplingSchedule() = default;
  CouplingSchedule(schedule::Static s) : v_(s) {}
  CouplingSchedule(schedule::FermiOn s) : v_(s) {}
  CouplingSchedule(schedule::FermiOff s) : v_(s) {}
  CouplingSchedule(schedule::PowerOn s) : v_(s) {}
  CouplingSchedule(schedule::PowerOff s) : v_(s) {}
  CouplingSchedule(schedule::InstantOn s) : v_(s) {}
  CouplingSchedule(schedule::InstantOff s) : v_(s) {}

  static CouplingSchedule noisy(CouplingSchedule inner, NoiseTrack track);

  [[nodiscard]] const Variant& variant() const { return v_; }
  [[nodiscard]] bool is_static() const { return std::holds_alternative<schedule::Static>(v_); }

  /// g(t).
  [[nodiscard]] double value(double t) const;

  /// g(t) where piecewise-constant noise is looked up at `segment_time`
  /// instead of `t`. Integrators pass the step midpoint so that a whole step
  /// sees a single noise height.
  [[nodiscard]] double value(double t, double segment_time) const;

  /// Smallest ramp time constant, 0 for schedules without a ramp.
  [[nodiscard]] double ramp_tau() const;

  /// Width of the piecewise-constant noise steps, 0 when noiseless.
  [[nodiscard]] double noise_step() const;

  /// Time after which a switch-off schedule is considered complete
  /// (g < 1e-5 for Fermi, exactly 0 for the others). +inf when the schedule
  /// never switches off.
  [[nodiscard]] double decoupling_complete() const;

  /// Short human-readable tag, e.g. "fermi_off(t_f=6.2,tau=1)".
  [[nodiscard]] std::string describe() const;

  void validate() const;

 private:
  Variant v_{schedule::Static{}};
};

// ---------------------------------------------------------------------------
// Noise track

/// Stepwise stochastic process r(t): heights[floor(t / step_width)] for
/// t >= 0, heights[0] for t < 0, the last height beyond the stored range.
class NoiseTrack {
 public:
  NoiseTrack() = default;
  NoiseTrack(double step_width, std::vector<double> heights, std::uint64_t seed = 0)
      : step_width_(step_width), heights_(std::move(heights)), seed_(seed) {
    if (!(step_width_ > 0.0)) throw InvalidParameter("noise step width must be positive");
    if (heights_.empty()) throw InvalidParameter("noise track needs at least one step");
  }

  [[nodiscard]] double operator()(double t) const {
    if (t < 0.0) return heights_.front();
    const double k = std::floor(t / step_width_);
    if (k >= static_cast<double>(heights_.size())) return heights_.back();
    return heights_[static_cast<std::size_t>(k)];
  }

  [[nodiscard]] double step_width() const { return step_width_; }
  [[nodiscard]] const std::vector<double>& heights() const { return heights_; }
  [[nodiscard]] std::uint64_t seed() const { return seed_; }

 private:
  double step_width_ = 1.0;
  std::vector<double> heights_{0.0};
  std::uint64_t seed_ = 0;
};

struct Noisy {
  CouplingSchedule inner;
  NoiseTrack track;
};

inline CouplingSchedule CouplingSchedule::noisy(CouplingSchedule inner, NoiseTrack track) {
  CouplingSchedule s;
  s.v_ = std::make_shared<const Noisy>(Noisy{std::move(inner), std::move(track)});
  return s;
}

namespace detail {

inline double logistic(double x) {
  // 1 / (1 + exp(x)) without overflow for large |x|.
  if (x > 0.0) {
    const double e = std::exp(-x);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(x));
}

template <class... Fs>
struct overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
overloaded(Fs...) -> overloaded<Fs...>;

inline std::string fmt_num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

}  // namespace detail

inline double CouplingSchedule::value(double t) const { return value(t, t); }

inline double CouplingSchedule::value(double t, double segment_time) const {
  using namespace schedule;
  return std::visit(
      detail::overloaded{
          [](const Static&) { return 1.0; },
          [t](const FermiOn& s) { return detail::logistic((s.t_i - t) / s.tau); },
          [t](const FermiOff& s) { return detail::logistic((t - s.t_f) / s.tau); },
          [t](const PowerOn& s) {
            if (t <= 0.0) return 0.0;
            if (t >= s.tau) return 1.0;
            return std::pow(t / s.tau, s.a);
          },
          [t](const PowerOff& s) {
            if (t <= s.t_f) return 1.0;
            if (t >= s.t_f + s.tau) return 0.0;
            return std::pow((s.t_f - t) / s.tau + 1.0, s.a);
          },
          [t](const InstantOn& s) { return t >= s.t_i ? 1.0 : 0.0; },
          [t](const InstantOff& s) { return t <= s.t_f ? 1.0 : 0.0; },
          [t, segment_time](const std::shared_ptr<const Noisy>& s) {
            return s->inner.value(t, segment_time) * (1.0 + s->track(segment_time));
          },
      },
      v_);
}

inline double CouplingSchedule::ramp_tau() const {
  using namespace schedule;
  return std::visit(detail::overloaded{
                        [](const FermiOn& s) { return s.tau; },
                        [](const FermiOff& s) { return s.tau; },
                        [](const PowerOn& s) { return s.tau; },
                        [](const PowerOff& s) { return s.tau; },
                        [](const std::shared_ptr<const Noisy>& s) { return s->inner.ramp_tau(); },
                        [](const auto&) { return 0.0; },
                    },
                    v_);
}

inline double CouplingSchedule::noise_step() const {
  if (const auto* p = std::get_if<std::shared_ptr<const Noisy>>(&v_)) return (*p)->track.step_width();
  return 0.0;
}

inline double CouplingSchedule::decoupling_complete() const {
  using namespace schedule;
  return std::visit(detail::overloaded{
                        [](const FermiOff& s) { return s.t_f + 12.0 * s.tau; },
                        [](const PowerOff& s) { return s.t_f + s.tau; },
                        [](const InstantOff& s) { return s.t_f; },
                        [](const std::shared_ptr<const Noisy>& s) {
                          return s->inner.decoupling_complete();
                        },
                        [](const auto&) { return HUGE_VAL; },
                    },
                    v_);
}

inline std::string CouplingSchedule::describe() const {
  using namespace schedule;
  using detail::fmt_num;
  return std::visit(
      detail::overloaded{
          [](const Static&) -> std::string { return "static"; },
          [](const FermiOn& s) {
            return "fermi_on(t_i=" + fmt_num(s.t_i) + ",tau=" + fmt_num(s.tau) + ")";
          },
          [](const FermiOff& s) {
            return "fermi_off(t_f=" + fmt_num(s.t_f) + ",tau=" + fmt_num(s.tau) + ")";
          },
          [](const PowerOn& s) {
            return "power_on(tau=" + fmt_num(s.tau) + ",a=" + fmt_num(s.a) + ")";
          },
          [](const PowerOff& s) {
            return "power_off(t_f=" + fmt_num(s.t_f) + ",tau=" + fmt_num(s.tau) +
                   ",a=" + fmt_num(s.a) + ")";
          },
          [](const InstantOn& s) { return "instant_on(t_i=" + fmt_num(s.t_i) + ")"; },
          [](const InstantOff& s) { return "instant_off(t_f=" + fmt_num(s.t_f) + ")"; },
          [](const std::shared_ptr<const Noisy>& s) {
            return "noisy(" + s->inner.describe() + ",step=" + fmt_num(s->track.step_width()) +
                   ",seed=" + std::to_string(s->track.seed()) + ")";
          },
      },
      v_);
}

inline void CouplingSchedule::validate() const {
  const auto check_tau = [](double tau) {
    if (!(tau > 0.0))
      throw InvalidParameter("ramp time constant tau must be positive (use an instant schedule for tau = 0)");
  };
  const auto check_a = [](double a) {
    if (!(a > 0.0)) throw InvalidParameter("power-law exponent a must be positive");
  };
  using namespace schedule;
  std::visit(detail::overloaded{
                 [&](const FermiOn& s) { check_tau(s.tau); },
                 [&](const FermiOff& s) { check_tau(s.tau); },
                 [&](const PowerOn& s) { check_tau(s.tau); check_a(s.a); },
                 [&](const PowerOff& s) { check_tau(s.tau); check_a(s.a); },
                 [](const std::shared_ptr<const Noisy>& s) { s->inner.validate(); },
                 [](const auto&) {},
             },
             v_);
}

// ---------------------------------------------------------------------------
// Hamiltonian

/// Real symmetric tridiagonal Hamiltonian restricted to the single-excitation
/// sector, plus the exactly known vacuum energy.
class HamiltonianView {
 public:
  HamiltonianView(ChainSpec spec, CouplingSchedule first, CouplingSchedule last)
      : spec_(std::move(spec)), first_(std::move(first)), last_(std::move(last)) {
    spec_.validate();
    first_.validate();
    last_.validate();

    const int n = spec_.n;
    diag_.resize(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
      const int touching = (j == 0 || j == n - 1) ? 1 : 2;
      diag_[static_cast<std::size_t>(j)] =
          -spec_.j_z * (n - 1 - 2 * touching) + spec_.b * (n - 2);
    }
    // n = 2: both sites touch the single bond once, which the formula above
    // already covers.
    vacuum_energy_ = -spec_.j_z * (n - 1) + spec_.b * n;

    bulk_.resize(spec_.bonds());
    for (std::size_t i = 0; i < bulk_.size(); ++i)
      bulk_[i] = -spec_.j_xy * (1.0 + spec_.bond_disorder[i]);
  }

  [[nodiscard]] int size() const { return spec_.n; }
  [[nodiscard]] const std::vector<double>& diag() const { return diag_; }
  [[nodiscard]] double vacuum_energy() const { return vacuum_energy_; }
  [[nodiscard]] const ChainSpec& spec() const { return spec_; }
  [[nodiscard]] const CouplingSchedule& first() const { return first_; }
  [[nodiscard]] const CouplingSchedule& last() const { return last_; }

  /// Writes the n-1 instantaneous off-diagonal elements -J_bond(t) into `out`.
  void offdiag(double t, std::vector<double>& out) const { offdiag(t, t, out); }

  void offdiag(double t, double segment_time, std::vector<double>& out) const {
    out = bulk_;
    // For n = 2 the single bond is both first and last; both multipliers apply.
    out.front() *= first_.value(t, segment_time);
    out.back() *= last_.value(t, segment_time);
  }

  [[nodiscard]] std::vector<double> offdiag(double t) const {
    std::vector<double> out;
    offdiag(t, out);
    return out;
  }

  /// Dense row-major copy of H(t), mostly for tests and diagnostics.
  [[nodiscard]] std::vector<std::vector<double>> dense(double t) const {
    const auto n = static_cast<std::size_t>(spec_.n);
    std::vector<std::vector<double>> m(n, std::vector<double>(n, 0.0));
    const auto off = offdiag(t);
    for (std::size_t j = 0; j < n; ++j) m[j][j] = diag_[j];
    for (std::size_t i = 0; i + 1 < n; ++i) m[i][i + 1] = m[i + 1][i] = off[i];
    return m;
  }

  /// Smallest time scale the integrator has to resolve from the schedules.
  [[nodiscard]] double finest_ramp() const {
    double tau = HUGE_VAL;
    for (const auto* s : {&first_, &last_})
      if (const double r = s->ramp_tau(); r > 0.0) tau = std::min(tau, r);
    return tau;
  }

  /// Common noise step of the schedules, 0 when both are noiseless.
  [[nodiscard]] double noise_step() const {
    const double a = first_.noise_step();
    const double b = last_.noise_step();
    if (a > 0.0 && b > 0.0 && std::abs(a - b) > 1e-12 * std::max(a, b))
      throw InvalidParameter("first and last noise tracks must share one step width");
    return a > 0.0 ? a : b;
  }

 private:
  ChainSpec spec_;
  CouplingSchedule first_;
  CouplingSchedule last_;
  std::vector<double> diag_;
  std::vector<double> bulk_;
  double vacuum_energy_ = 0.0;
};

inline HamiltonianView build_hamiltonian(const ChainSpec& spec, const CouplingSchedule& first,
                                         const CouplingSchedule& last) {
  return HamiltonianView(spec, first, last);
}

inline double schedule_value(const CouplingSchedule& s, double t) { return s.value(t); }

}  // namespace chainwave
