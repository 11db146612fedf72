#pragma once

// Plain-text artifacts: CSV series and matrices (header row, '.' decimal
// separator, '\n' line ends) and JSON metadata.

#include <cstdio>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "chainwave/fidelity.hpp"
#include "chainwave/model.hpp"
#include "chainwave/stochastic.hpp"
#include "chainwave/sweep.hpp"

namespace chainwave::io {

/// Shortest round-trip decimal form of x.
inline std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  double back = 0.0;
  for (int prec = 6; prec < 17; ++prec) {
    char tmp[40];
    std::snprintf(tmp, sizeof tmp, "%.*g", prec, x);
    if (std::sscanf(tmp, "%lf", &back) == 1 && back == x) return tmp;
  }
  return buf;
}

struct Range {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 1;

  [[nodiscard]] std::vector<double> values() const { return linspace(lo, hi, count); }
};

/// Parses "lo:hi:count"; a bare number is a one-point range.
inline Range parse_range(const std::string& text) {
  Range r;
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
  try {
    if (parts.size() == 1) {
      r.lo = r.hi = std::stod(parts[0]);
      r.count = 1;
      return r;
    }
    if (parts.size() != 3) throw InvalidParameter("");
    r.lo = std::stod(parts[0]);
    r.hi = std::stod(parts[1]);
    const long c = std::stol(parts[2]);
    if (c < 1) throw InvalidParameter("");
    r.count = static_cast<std::size_t>(c);
  } catch (const std::exception&) {
    throw InvalidParameter("range must look like lo:hi:count, got '" + text + "'");
  }
  if (r.count > 1 && !(r.hi > r.lo)) throw InvalidParameter("range needs hi > lo, got '" + text + "'");
  return r;
}

inline void write_trace_csv(std::ostream& os, const FidelityTrace& trace) {
  os << "t,f_abs,rel_phase,f_avg,f_opt\n";
  for (const auto& s : trace.samples)
    os << num(s.t) << ',' << num(s.f_abs) << ',' << num(s.rel_phase) << ',' << num(s.f_avg) << ','
       << num(s.f_opt) << '\n';
}

/// Heatmap: first header cell "tau\t_f", then one column per t_f; one row per
/// tau. Missing cells are empty.
inline void write_heatmap_csv(std::ostream& os, const SweepGrid& grid, SweepQuantity q) {
  os << "tau\\t_f";
  for (double tf : grid.tfs) os << ',' << num(tf);
  os << '\n';
  const auto m = grid.matrix(q);
  for (std::size_t i = 0; i < grid.taus.size(); ++i) {
    os << num(grid.taus[i]);
    for (const auto& v : m[i]) {
      os << ',';
      if (v) os << num(*v);
    }
    os << '\n';
  }
}

inline void write_powerlaw_csv(std::ostream& os, const std::vector<PowerlawPoint>& pts) {
  os << "a,best_tau,best_tf,f_first_max,coarse_f\n";
  for (const auto& p : pts)
    os << num(p.a) << ',' << num(p.best_tau) << ',' << num(p.best_tf) << ',' << num(p.f_first_max) << ','
       << num(p.coarse_f) << '\n';
}

/// One row per sample; failed samples keep their row with empty values.
inline void write_samples_csv(std::ostream& os, const EnsembleReport& r) {
  os << "sample_index,seed,f_dynamic,f_reference,difference,failed\n";
  for (const auto& s : r.samples) {
    os << s.index << ',' << s.seed << ',';
    if (s.failed)
      os << ",,,1\n";
    else
      os << num(s.dynamic) << ',' << num(s.reference) << ',' << num(s.difference) << ",0\n";
  }
}

inline void write_histogram_csv(std::ostream& os, const Histogram& h) {
  os << "bin_lo,bin_hi,count\n";
  for (std::size_t i = 0; i < h.counts.size(); ++i)
    os << num(h.edges[i]) << ',' << num(h.edges[i + 1]) << ',' << h.counts[i] << '\n';
}

// ---------------------------------------------------------------------------
// JSON metadata

inline nlohmann::json to_json(const ChainSpec& s) {
  return {{"n", s.n}, {"j_xy", s.j_xy}, {"j_z", s.j_z}, {"b", s.b}, {"bond_disorder", s.bond_disorder}};
}

inline nlohmann::json to_json(const SummaryStats& s) {
  return {{"count", s.count}, {"mean", s.mean},         {"stddev", s.stddev},
          {"min", s.min},     {"max", s.max},           {"standard_error", s.standard_error()}};
}

inline nlohmann::json to_json(const TransferSummary& s) {
  nlohmann::json j = nlohmann::json::object();
  if (s.first_max) {
    j["t_first_max"] = s.first_max->t;
    j["f_first_max"] = s.first_max->f;
    if (std::isfinite(s.first_max->half_width))
      j["half_width"] = s.first_max->half_width;
    else
      j["half_width"] = nullptr;
  }
  if (s.f_stationary) j["f_stationary"] = *s.f_stationary;
  return j;
}

}  // namespace chainwave::io
