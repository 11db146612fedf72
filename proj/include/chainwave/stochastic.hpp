#pragma once

// Seeded static bond disorder, stepwise coupling noise, and the Monte Carlo
// ensembles built on them.
//
// Random numbers come from std::mt19937_64 (bit-exact across standard
// libraries) seeded through SplitMix64, and are mapped to [0, 1) with the
// top 53 bits. std::uniform_real_distribution is avoided because its output
// is implementation-defined. Sample i of an ensemble with base seed s uses
// seed s + i.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "chainwave/fidelity.hpp"
#include "chainwave/model.hpp"
#include "chainwave/parallel.hpp"

namespace chainwave {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Independent stream `stream` derived from `seed`.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(splitmix64(seed) ^ (stream * 0xD1B54A32D192ED03ULL));
}

class UniformSource {
 public:
  explicit UniformSource(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  /// Uniform on [0, 1).
  double next() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on [lo, hi).
  double next(double lo, double hi) { return lo + (hi - lo) * next(); }

 private:
  std::mt19937_64 engine_;
};

/// n-1 i.i.d. uniform bond offsets on [0, strength].
inline std::vector<double> draw_disorder(int n, double strength, std::uint64_t seed) {
  if (n < 2) throw InvalidParameter("chain needs at least 2 sites");
  if (!(strength >= 0.0)) throw InvalidParameter("disorder strength must be non-negative");
  UniformSource rng(seed);
  std::vector<double> r(static_cast<std::size_t>(n - 1));
  for (auto& x : r) x = rng.next(0.0, strength);
  return r;
}

/// Noise track with heights uniform on [0, amplitude] covering [0, t_end].
inline NoiseTrack draw_noise_track(double step_width, double t_end, double amplitude,
                                   std::uint64_t seed) {
  if (!(step_width > 0.0)) throw InvalidParameter("noise step width must be positive");
  if (!(amplitude >= 0.0)) throw InvalidParameter("noise amplitude must be non-negative");
  const auto steps = static_cast<std::size_t>(std::ceil(std::max(t_end, 0.0) / step_width)) + 1;
  UniformSource rng(seed);
  std::vector<double> h(steps);
  for (auto& x : h) x = rng.next(0.0, amplitude);
  return NoiseTrack(step_width, std::move(h), seed);
}

// ---------------------------------------------------------------------------
// Reports

struct SummaryStats {
  std::size_t count = 0;
  double mean = 0.0;
  double stddev = 0.0;
  double min = 0.0;
  double max = 0.0;

  [[nodiscard]] double standard_error() const {
    return count > 0 ? stddev / std::sqrt(static_cast<double>(count)) : 0.0;
  }
};

inline SummaryStats summary_stats(const std::vector<double>& x) {
  SummaryStats s;
  s.count = x.size();
  if (x.empty()) return s;
  s.mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  double ss = 0.0;
  for (double v : x) ss += (v - s.mean) * (v - s.mean);
  s.stddev = x.size() > 1 ? std::sqrt(ss / static_cast<double>(x.size() - 1)) : 0.0;
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  s.min = *lo;
  s.max = *hi;
  return s;
}

struct Histogram {
  std::vector<double> edges;
  std::vector<std::size_t> counts;
};

/// Equal-width bins spanning [min, max] of the data; the maximum falls into
/// the last bin.
inline Histogram make_histogram(const std::vector<double>& x, std::size_t bins) {
  Histogram h;
  if (bins == 0) throw InvalidParameter("histogram needs at least one bin");
  h.counts.assign(bins, 0);
  if (x.empty()) {
    h.edges.assign(bins + 1, 0.0);
    return h;
  }
  auto [lo_it, hi_it] = std::minmax_element(x.begin(), x.end());
  double lo = *lo_it;
  double hi = *hi_it;
  if (hi - lo < 1e-12) {
    lo -= 5e-4;
    hi += 5e-4;
  }
  const double w = (hi - lo) / static_cast<double>(bins);
  h.edges.resize(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i) h.edges[i] = lo + w * static_cast<double>(i);
  h.edges.back() = hi;
  for (double v : x) {
    auto k = static_cast<std::size_t>(std::floor((v - lo) / w));
    h.counts[std::min(k, bins - 1)]++;
  }
  return h;
}

struct SampleRecord {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  /// F_d of the chain with dynamical couplings.
  double dynamic = 0.0;
  /// Disorder: first maximum of the static chain with the same bonds.
  /// Fluctuation: noiseless F_d.
  double reference = 0.0;
  double difference = 0.0;
  bool failed = false;
  std::string error;
};

struct EnsembleReport {
  std::string mode;
  std::vector<SampleRecord> samples;
  Histogram histogram;             // of `dynamic`
  Histogram difference_histogram;  // of `difference`
  SummaryStats stats;              // of `dynamic`
  SummaryStats difference_stats;
  std::size_t failed = 0;

  [[nodiscard]] std::vector<double> column(double SampleRecord::*field) const {
    std::vector<double> out;
    for (const auto& s : samples)
      if (!s.failed) out.push_back(s.*field);
    return out;
  }
};

class EnsembleAborted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EnsembleOptions {
  unsigned threads = 0;
  std::size_t bins = 40;
  /// Window searched for the static chain's first maximum.
  double static_t_end = 20.0;
  std::optional<double> dt;
  double max_fail_fraction = 0.01;
  /// Stepwise noise: heights uniform on [0, noise_amplitude], step width
  /// noise_step_factor * tau of the ramp being perturbed.
  double noise_amplitude = 0.02;
  double noise_step_factor = 0.036;
};

namespace detail {

inline void finish_report(EnsembleReport& r, const EnsembleOptions& opt) {
  r.failed = static_cast<std::size_t>(
      std::count_if(r.samples.begin(), r.samples.end(), [](const SampleRecord& s) { return s.failed; }));
  if (static_cast<double>(r.failed) > opt.max_fail_fraction * static_cast<double>(r.samples.size())) {
    std::string first_error;
    for (const auto& s : r.samples)
      if (s.failed) {
        first_error = s.error;
        break;
      }
    throw EnsembleAborted(std::to_string(r.failed) + " of " + std::to_string(r.samples.size()) +
                          " samples failed (first: " + first_error + ")");
  }
  const auto values = r.column(&SampleRecord::dynamic);
  const auto diffs = r.column(&SampleRecord::difference);
  r.stats = summary_stats(values);
  r.difference_stats = summary_stats(diffs);
  r.histogram = make_histogram(values, opt.bins);
  r.difference_histogram = make_histogram(diffs, opt.bins);
}

template <class Body>
void run_samples(EnsembleReport& r, std::size_t n_samples, std::uint64_t seed,
                 const EnsembleOptions& opt, Body&& body) {
  if (n_samples < 1) throw InvalidParameter("ensemble needs at least one sample");
  r.samples.resize(n_samples);
  parallel_for(n_samples, opt.threads, [&](std::size_t i) {
    auto& rec = r.samples[i];
    rec.index = i;
    rec.seed = seed + i;
    try {
      body(rec);
    } catch (const NormDrift& e) {
      rec.failed = true;
      rec.error = e.what();
    } catch (const NotStationary& e) {
      rec.failed = true;
      rec.error = e.what();
    } catch (const NoMaximum& e) {
      rec.failed = true;
      rec.error = e.what();
    }
  });
  finish_report(r, opt);
}

}  // namespace detail

/// Paired static-vs-dynamic comparison under static bond disorder. Every
/// sample draws one disorder vector and evaluates both the dynamical chain
/// (F_d after decoupling) and the static chain with identical bonds (first
/// maximum).
inline EnsembleReport disorder_ensemble(const ChainSpec& spec, const CouplingSchedule& first,
                                        const CouplingSchedule& last, std::size_t n_samples,
                                        double strength, std::uint64_t seed,
                                        const EnsembleOptions& opt = {}) {
  spec.validate();
  first.validate();
  last.validate();
  if (!std::isfinite(last.decoupling_complete()))
    throw InvalidParameter("disorder ensemble needs a receiver schedule that decouples");

  EnsembleReport r;
  r.mode = "disorder";
  detail::run_samples(r, n_samples, seed, opt, [&](SampleRecord& rec) {
    ChainSpec s = spec;
    s.bond_disorder = draw_disorder(spec.n, strength, rec.seed);

    RunOptions dyn;
    dyn.t_end = stationary_end(last, dyn.t_start);
    dyn.dt = opt.dt;
    rec.dynamic = stationary_fidelity(record_trace(s, first, last, dyn), last);

    RunOptions stat;
    stat.t_end = opt.static_t_end;
    stat.dt = opt.dt;
    rec.reference = first_maximum(record_trace(s, schedule::Static{}, schedule::Static{}, stat)).f;
    rec.difference = rec.dynamic - rec.reference;
  });
  return r;
}

/// F_d under stepwise multiplicative noise (1 + r(t)) on both Fermi ramps,
/// compared with the noiseless F_d computed at the same step size.
inline EnsembleReport fluctuation_ensemble(const ChainSpec& spec, const CouplingSchedule& first,
                                           const CouplingSchedule& last, std::size_t n_samples,
                                           std::uint64_t seed, const EnsembleOptions& opt = {}) {
  spec.validate();
  const auto* on = std::get_if<schedule::FermiOn>(&first.variant());
  const auto* off = std::get_if<schedule::FermiOff>(&last.variant());
  if (!on || !off) throw InvalidParameter("fluctuation ensemble wraps FermiOn / FermiOff schedules");
  first.validate();
  last.validate();
  for (double r : spec.bond_disorder)
    if (r != 0.0) throw InvalidParameter("fluctuation ensemble runs on a clean chain");

  const double t_end = stationary_end(last);
  const double step_first = opt.noise_step_factor * on->tau;
  const double step_last = opt.noise_step_factor * off->tau;
  if (std::abs(step_first - step_last) > 1e-12 * std::max(step_first, step_last))
    throw InvalidParameter("fluctuation ensemble needs equal ramp times on both ends");

  // One step size for every run so the noiseless reference is directly comparable.
  double dt = opt.dt.value_or(std::min(0.005 / spec.j_xy, 0.036 * std::min(on->tau, off->tau) / 4.0));
  dt = step_first / std::ceil(step_first / dt - 1e-9);

  RunOptions run;
  run.t_end = t_end;
  run.dt = dt;
  const double reference = stationary_fidelity(record_trace(spec, first, last, run), last);

  EnsembleReport r;
  r.mode = "fluctuation";
  detail::run_samples(r, n_samples, seed, opt, [&](SampleRecord& rec) {
    const auto noisy_first = CouplingSchedule::noisy(
        first, draw_noise_track(step_first, t_end, opt.noise_amplitude, derive_seed(rec.seed, 0)));
    const auto noisy_last = CouplingSchedule::noisy(
        last, draw_noise_track(step_last, t_end, opt.noise_amplitude, derive_seed(rec.seed, 1)));
    rec.dynamic = stationary_fidelity(record_trace(spec, noisy_first, noisy_last, run), noisy_last);
    rec.reference = reference;
    rec.difference = rec.dynamic - reference;
  });
  return r;
}

}  // namespace chainwave
