#pragma once

// Brute-force reference: the full 2^N Hilbert space of the chain built from
// explicit Pauli operators, integrated with the same Runge-Kutta scheme, and
// reduced to the receiver qubit by a partial trace. Only meant for spot
// checks of the sector solver (N <= 12).
//
// Qubit ordering: site 0 is the leftmost Kronecker factor, so the receiver
// (site N-1) is the least significant bit of a basis index. Basis per qubit
// is {|0>, |1>} with sigma_z = diag(-1, +1).

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "chainwave/evolve.hpp"
#include "chainwave/fidelity.hpp"
#include "chainwave/model.hpp"

namespace chainwave::oracle {

using Sparse = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXcd;
using Mat2 = Eigen::Matrix2cd;

inline constexpr int kMaxSites = 12;

namespace detail {

inline Sparse single(double a00, double a01, double a10, double a11) {
  Sparse m(2, 2);
  std::vector<Eigen::Triplet<double>> t;
  if (a00 != 0.0) t.emplace_back(0, 0, a00);
  if (a01 != 0.0) t.emplace_back(0, 1, a01);
  if (a10 != 0.0) t.emplace_back(1, 0, a10);
  if (a11 != 0.0) t.emplace_back(1, 1, a11);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

inline Sparse identity2() { return single(1, 0, 0, 1); }
inline Sparse sigma_z() { return single(-1, 0, 0, 1); }
inline Sparse sigma_plus() { return single(0, 0, 1, 0); }   // |1><0|
inline Sparse sigma_minus() { return single(0, 1, 0, 0); }  // |0><1|

/// Kronecker product over all sites, `ops[k]` acting on site k.
inline Sparse chain_product(const std::vector<Sparse>& ops) {
  Sparse acc = ops.front();
  for (std::size_t k = 1; k < ops.size(); ++k) {
    Sparse next = Eigen::kroneckerProduct(acc, ops[k]);
    acc = std::move(next);
  }
  return acc;
}

inline Sparse site_op(int n, std::initializer_list<std::pair<int, Sparse>> factors) {
  std::vector<Sparse> ops(static_cast<std::size_t>(n), identity2());
  for (const auto& [site, op] : factors) ops[static_cast<std::size_t>(site)] = op;
  return chain_product(ops);
}

}  // namespace detail

/// H(t) = H_zz_field + sum_i c_i(t) X_i with X_i the unit hopping operator
/// sigma+_{i+1} sigma-_i + sigma-_{i+1} sigma+_i.
class FullSpaceHamiltonian {
 public:
  FullSpaceHamiltonian(ChainSpec spec, CouplingSchedule first, CouplingSchedule last)
      : spec_(std::move(spec)), first_(std::move(first)), last_(std::move(last)) {
    spec_.validate();
    first_.validate();
    last_.validate();
    if (spec_.n > kMaxSites)
      throw InvalidParameter("full-space oracle supports at most " + std::to_string(kMaxSites) + " sites");
    using namespace detail;
    const int n = spec_.n;
    dim_ = Eigen::Index{1} << n;
    fixed_ = Sparse(dim_, dim_);
    for (int i = 1; i < n; ++i)
      fixed_ -= spec_.j_z * site_op(n, {{i, sigma_z()}, {i - 1, sigma_z()}});
    for (int i = 0; i < n; ++i) fixed_ -= spec_.b * site_op(n, {{i, sigma_z()}});
    for (int i = 1; i < n; ++i) {
      hop_.push_back(site_op(n, {{i, sigma_plus()}, {i - 1, sigma_minus()}}) +
                     site_op(n, {{i, sigma_minus()}, {i - 1, sigma_plus()}}));
    }
  }

  [[nodiscard]] Eigen::Index dim() const { return dim_; }
  [[nodiscard]] const ChainSpec& spec() const { return spec_; }
  [[nodiscard]] const CouplingSchedule& first() const { return first_; }
  [[nodiscard]] const CouplingSchedule& last() const { return last_; }

  /// Coefficient multiplying hopping operator `bond` at time t.
  [[nodiscard]] double coupling(std::size_t bond, double t, double segment_time) const {
    double c = -spec_.j_xy * (1.0 + spec_.bond_disorder[bond]);
    if (bond == 0) c *= first_.value(t, segment_time);
    if (bond + 1 == hop_.size()) c *= last_.value(t, segment_time);
    return c;
  }

  /// out = -i H(t) v
  void apply_minus_i_h(double t, double segment_time, const Vec& v, Vec& out) const {
    Vec hv = fixed_ * v;
    for (std::size_t b = 0; b < hop_.size(); ++b) hv += coupling(b, t, segment_time) * (hop_[b] * v);
    out = std::complex<double>(0.0, -1.0) * hv;
  }

  /// Dense H(t) for small-n inspection.
  [[nodiscard]] Eigen::MatrixXd dense(double t) const {
    Eigen::MatrixXd m = Eigen::MatrixXd(fixed_);
    for (std::size_t b = 0; b < hop_.size(); ++b) m += coupling(b, t, t) * Eigen::MatrixXd(hop_[b]);
    return m;
  }

 private:
  ChainSpec spec_;
  CouplingSchedule first_;
  CouplingSchedule last_;
  Eigen::Index dim_ = 0;
  Sparse fixed_;
  std::vector<Sparse> hop_;
};

/// Index of the product state with the given sites excited.
inline Eigen::Index basis_index(int n, std::initializer_list<int> excited) {
  Eigen::Index idx = 0;
  for (int k : excited) idx |= Eigen::Index{1} << (n - 1 - k);
  return idx;
}

/// <sum_k sigma_z^k> of a full-space state.
inline double total_magnetization(const Vec& psi, int n) {
  double m = 0.0;
  for (Eigen::Index i = 0; i < psi.size(); ++i)
    m += std::norm(psi[i]) * (2.0 * std::popcount(static_cast<unsigned long long>(i)) - n);
  return m;
}

/// Receiver block Tr_{all but N-1} |a><b|.
inline Mat2 receiver_block(const Vec& a, const Vec& b) {
  Mat2 r = Mat2::Zero();
  for (Eigen::Index rest = 0; rest < a.size() / 2; ++rest)
    for (int x = 0; x < 2; ++x)
      for (int y = 0; y < 2; ++y) r(x, y) += a[2 * rest + x] * std::conj(b[2 * rest + y]);
  return r;
}

/// The receiver's reduced state as a linear map of the sender input
/// alpha|0> + beta|1>, fixed by evolving |0...0> and |1,0...0>.
struct ReceiverChannel {
  double t = 0.0;
  Mat2 r00 = Mat2::Zero();  // from |vac><vac|
  Mat2 r11 = Mat2::Zero();  // from |e1><e1|
  Mat2 r01 = Mat2::Zero();  // from |vac><e1|

  [[nodiscard]] Mat2 rho(std::complex<double> alpha, std::complex<double> beta) const {
    return std::norm(alpha) * r00 + std::norm(beta) * r11 + alpha * std::conj(beta) * r01 +
           std::conj(alpha) * beta * r01.adjoint();
  }
};

using ChannelObserver = std::function<void(const ReceiverChannel&, const Vec& vac, const Vec& excited)>;

/// Integrates the vacuum and the sender excitation from t_start to t_end in
/// the full space, classical RK4 with the sector solver's step layout.
/// `observer` sees the channel after every step.
inline ReceiverChannel full_space_channel(const FullSpaceHamiltonian& h, double t_start, double t_end,
                                          double dt, const ChannelObserver& observer = {}) {
  if (!(dt > 0.0)) throw InvalidParameter("dt must be positive");
  const int n = h.spec().n;
  Vec vac = Vec::Zero(h.dim());
  Vec exc = Vec::Zero(h.dim());
  vac[0] = 1.0;
  exc[basis_index(n, {0})] = 1.0;

  const double span = t_end - t_start;
  const auto full_steps = static_cast<long>(std::floor(span / dt + 1e-9));
  const double remainder = span - static_cast<double>(full_steps) * dt;
  const long steps = full_steps + (remainder > 1e-12 * std::max(1.0, span) ? 1 : 0);

  Vec k1, k2, k3, k4;
  auto rk4 = [&](Vec& v, double ta, double tb, double seg) {
    const double step = tb - ta;
    const double tm = ta + 0.5 * step;
    h.apply_minus_i_h(ta, seg, v, k1);
    h.apply_minus_i_h(tm, seg, v + 0.5 * step * k1, k2);
    h.apply_minus_i_h(tm, seg, v + 0.5 * step * k2, k3);
    h.apply_minus_i_h(tb, seg, v + step * k3, k4);
    v += (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  };

  ReceiverChannel ch;
  auto snapshot = [&](double t) {
    ch.t = t;
    ch.r00 = receiver_block(vac, vac);
    ch.r11 = receiver_block(exc, exc);
    ch.r01 = receiver_block(vac, exc);
  };
  snapshot(t_start);
  for (long k = 0; k < steps; ++k) {
    const double ta = t_start + static_cast<double>(k) * dt;
    const double step = (k < full_steps) ? dt : remainder;
    const double seg = ta + 0.5 * step;
    for_each_substep(h.first(), h.last(), ta, ta + step, seg, [&](double a, double b) {
      rk4(vac, a, b, seg);
      rk4(exc, a, b, seg);
    });
    snapshot((k + 1 == steps) ? t_end : t_start + static_cast<double>(k + 1) * dt);
    if (observer) observer(ch, vac, exc);
  }
  return ch;
}

/// rho_out of the receiver for input alpha|0> + beta|1> on the sender.
inline Mat2 full_space_evolve(const ChainSpec& spec, const CouplingSchedule& first,
                              const CouplingSchedule& last, std::complex<double> alpha,
                              std::complex<double> beta, double t_end, double dt, double t_start = 0.0) {
  if (std::abs(std::norm(alpha) + std::norm(beta) - 1.0) > 1e-12)
    throw InvalidParameter("input state must be normalized");
  const FullSpaceHamiltonian h(spec, first, last);
  return full_space_channel(h, t_start, t_end, dt).rho(alpha, beta);
}

// ---------------------------------------------------------------------------
// Bloch-sphere averages

using RhoMap = std::function<Mat2(std::complex<double>, std::complex<double>)>;

inline double overlap(const Mat2& rho, std::complex<double> alpha, std::complex<double> beta) {
  const Eigen::Vector2cd psi(alpha, beta);
  return (psi.adjoint() * rho * psi)(0, 0).real();
}

/// Mean of <psi|rho_out(psi)|psi> over `n_points` Fibonacci-lattice points
/// on the Bloch sphere.
inline double bloch_average_quadrature(const RhoMap& rho_map, int n_points) {
  if (n_points < 100) throw InvalidParameter("quadrature needs at least 100 points");
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  double sum = 0.0;
  for (int k = 0; k < n_points; ++k) {
    const double z = 1.0 - (2.0 * k + 1.0) / n_points;
    const double theta = std::acos(z);
    const double phi = golden * k;
    const std::complex<double> alpha = std::cos(0.5 * theta);
    const std::complex<double> beta = std::polar(std::sin(0.5 * theta), phi);
    sum += overlap(rho_map(alpha, beta), alpha, beta);
  }
  return sum / n_points;
}

/// Exact average for maps that are linear in |psi><psi| (such as a quantum
/// channel): the six Pauli eigenstates form a spherical 3-design.
inline double bloch_average_exact(const RhoMap& rho_map) {
  const double s = 1.0 / std::sqrt(2.0);
  using C = std::complex<double>;
  const C pts[6][2] = {{1.0, 0.0},        {0.0, 1.0},         {s, s},
                       {s, -s},           {s, C(0.0, s)},     {s, C(0.0, -s)}};
  double sum = 0.0;
  for (const auto& p : pts) sum += overlap(rho_map(p[0], p[1]), p[0], p[1]);
  return sum / 6.0;
}

inline double channel_fidelity(const ReceiverChannel& ch) {
  return bloch_average_exact([&](std::complex<double> a, std::complex<double> b) { return ch.rho(a, b); });
}

/// Largest pointwise gap between the sector solver's averaged fidelity and
/// the full-space channel fidelity over a whole run.
struct TraceComparison {
  double max_deviation = 0.0;
  std::size_t points = 0;
};

inline TraceComparison compare_with_sector(const ChainSpec& spec, const CouplingSchedule& first,
                                           const CouplingSchedule& last, const RunOptions& run) {
  const auto trace = record_trace(spec, first, last, run);
  const FullSpaceHamiltonian h(spec, first, last);
  TraceComparison c;
  c.points = 1;
  full_space_channel(h, run.t_start, run.t_end, trace.integrator.dt,
                     [&](const ReceiverChannel& ch, const Vec&, const Vec&) {
                       const auto& s = trace.samples.at(c.points);
                       if (std::abs(ch.t - s.t) > 1e-12) throw std::logic_error("time grids differ");
                       c.max_deviation = std::max(c.max_deviation, std::abs(channel_fidelity(ch) - s.f_avg));
                       ++c.points;
                     });
  return c;
}

}  // namespace chainwave::oracle
