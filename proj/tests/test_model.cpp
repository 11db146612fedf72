#include "chainwave/model.hpp"

#include <cmath>
#include <random>

#include "gtest/gtest.h"

using namespace chainwave;
using namespace chainwave::schedule;

TEST(schedule, fermi_midpoint_and_limits) {
  EXPECT_DOUBLE_EQ(schedule_value(FermiOn{0.0, 1.0}, 0.0), 0.5);
  EXPECT_DOUBLE_EQ(schedule_value(FermiOff{6.2, 1.0}, 6.2), 0.5);

  const CouplingSchedule on = FermiOn{1.5, 0.7};
  EXPECT_NEAR(on.value(1.5 + 40 * 0.7), 1.0, 1e-15);
  EXPECT_NEAR(on.value(1.5 - 40 * 0.7), 0.0, 1e-15);
  const CouplingSchedule off = FermiOff{1.5, 0.7};
  EXPECT_NEAR(off.value(1.5 + 40 * 0.7), 0.0, 1e-15);
  EXPECT_NEAR(off.value(1.5 - 40 * 0.7), 1.0, 1e-15);
  // No overflow far from the ramp.
  EXPECT_EQ(on.value(-1e6), 0.0);
  EXPECT_EQ(off.value(1e6), 0.0);
}

TEST(schedule, fermi_off_tail_matches_high_precision) {
  // 1/(1+e^10) evaluated with 40-digit arithmetic.
  const double expected = 4.539786870243439450e-05;
  EXPECT_NEAR(schedule_value(FermiOff{6.2, 0.325}, 6.2 + 10 * 0.325), expected, 1e-17);
}

TEST(schedule, fermi_monotone) {
  const CouplingSchedule on = FermiOn{0.0, 0.325};
  const CouplingSchedule off = FermiOff{6.2, 0.325};
  double prev_on = -1.0;
  double prev_off = 2.0;
  for (int k = 0; k <= 2000; ++k) {
    const double t = -5.0 + 0.01 * k;
    EXPECT_GE(on.value(t), prev_on);
    EXPECT_LE(off.value(t + 6.2), prev_off);
    prev_on = on.value(t);
    prev_off = off.value(t + 6.2);
  }
}

TEST(schedule, power_law_shape) {
  EXPECT_DOUBLE_EQ(schedule_value(PowerOn{2.0, 0.5}, 0.5), 0.5);
  const CouplingSchedule on = PowerOn{1.3, 0.25};
  EXPECT_EQ(on.value(-1.0), 0.0);
  EXPECT_EQ(on.value(0.0), 0.0);
  EXPECT_EQ(on.value(1.3), 1.0);
  EXPECT_EQ(on.value(5.0), 1.0);
  // Continuity at the ramp end points.
  EXPECT_NEAR(on.value(1.3 - 1e-12), 1.0, 1e-11);
  EXPECT_NEAR(on.value(1e-300), 0.0, 1e-70);

  const CouplingSchedule off = PowerOff{6.0, 1.2, 0.5};
  EXPECT_EQ(off.value(6.0), 1.0);
  EXPECT_EQ(off.value(7.2), 0.0);
  EXPECT_EQ(off.value(2.0), 1.0);
  EXPECT_EQ(off.value(9.0), 0.0);
  EXPECT_NEAR(off.value(6.6), std::sqrt(0.5), 1e-15);
  EXPECT_NEAR(off.value(7.2 - 1e-12), 0.0, 1e-5);
}

TEST(schedule, instant_steps) {
  const CouplingSchedule on = InstantOn{0.0};
  EXPECT_EQ(on.value(-1e-9), 0.0);
  EXPECT_EQ(on.value(0.0), 1.0);
  const CouplingSchedule off = InstantOff{3.0};
  EXPECT_EQ(off.value(3.0), 1.0);
  EXPECT_EQ(off.value(3.0 + 1e-9), 0.0);
}

TEST(schedule, noisy_wraps_inner) {
  NoiseTrack track(0.5, {0.01, 0.02, 0.0});
  const auto s = CouplingSchedule::noisy(FermiOn{0.0, 1.0}, track);
  EXPECT_DOUBLE_EQ(s.value(0.0), 0.5 * 1.01);
  EXPECT_DOUBLE_EQ(s.value(0.75), 1.02 / (1.0 + std::exp(-0.75)));
  EXPECT_DOUBLE_EQ(s.value(1.2), 1.0 / (1.0 + std::exp(-1.2)));
  EXPECT_DOUBLE_EQ(s.value(-3.0), 1.01 / (1.0 + std::exp(3.0)));
  // Segment lookup decouples noise index from the ramp argument.
  EXPECT_DOUBLE_EQ(s.value(0.5, 0.25), 1.01 / (1.0 + std::exp(-0.5)));
  EXPECT_DOUBLE_EQ(s.noise_step(), 0.5);
  EXPECT_DOUBLE_EQ(s.ramp_tau(), 1.0);
}

TEST(schedule, validation) {
  EXPECT_THROW(CouplingSchedule(FermiOn{0.0, 0.0}).validate(), InvalidParameter);
  EXPECT_THROW(CouplingSchedule(FermiOff{0.0, -1.0}).validate(), InvalidParameter);
  EXPECT_THROW(CouplingSchedule(PowerOn{0.0, 1.0}).validate(), InvalidParameter);
  EXPECT_THROW(CouplingSchedule(PowerOff{1.0, 1.0, 0.0}).validate(), InvalidParameter);
  EXPECT_NO_THROW(CouplingSchedule(InstantOn{0.0}).validate());
}

TEST(schedule, decoupling_completion) {
  EXPECT_DOUBLE_EQ(CouplingSchedule(FermiOff{6.2, 0.5}).decoupling_complete(), 12.2);
  EXPECT_DOUBLE_EQ(CouplingSchedule(PowerOff{6.2, 0.5, 1.0}).decoupling_complete(), 6.7);
  EXPECT_TRUE(std::isinf(CouplingSchedule(Static{}).decoupling_complete()));
  EXPECT_LT(CouplingSchedule(FermiOff{6.2, 0.5}).value(12.2), 1e-5);
}

TEST(hamiltonian, two_site_uniform) {
  const auto h = build_hamiltonian(ChainSpec::uniform(2), Static{}, Static{});
  const auto m = h.dense(0.0);
  EXPECT_EQ(m[0][0], 0.0);
  EXPECT_EQ(m[1][1], 0.0);
  EXPECT_EQ(m[0][1], -1.0);
  EXPECT_EQ(m[1][0], -1.0);
}

TEST(hamiltonian, fermi_midpoint_on_last_bond) {
  const auto h = build_hamiltonian(ChainSpec::uniform(10), Static{}, FermiOff{6.2, 1.0});
  const auto off = h.offdiag(6.2);
  EXPECT_EQ(off.back(), -0.5);
  for (std::size_t i = 0; i + 1 < off.size(); ++i) EXPECT_EQ(off[i], -1.0);
}

// Diagonal energies from direct enumeration of the Ising and field terms on
// each one-excitation product state.
static std::vector<double> brute_force_diag(int n, double jz, double b) {
  std::vector<double> d;
  for (int j = 0; j < n; ++j) {
    std::vector<int> s(static_cast<std::size_t>(n), -1);
    s[static_cast<std::size_t>(j)] = +1;
    double e = 0.0;
    for (int i = 1; i < n; ++i) e -= jz * s[i] * s[i - 1];
    for (int i = 0; i < n; ++i) e -= b * s[i];
    d.push_back(e);
  }
  return d;
}

TEST(hamiltonian, diagonal_n4_jz1) {
  const auto h = build_hamiltonian(ChainSpec::uniform(4, 1.0, 1.0, 0.0), Static{}, Static{});
  const std::vector<double> expected{-1.0, 1.0, 1.0, -1.0};
  EXPECT_EQ(h.diag(), expected);
  EXPECT_EQ(h.diag(), brute_force_diag(4, 1.0, 0.0));
  EXPECT_DOUBLE_EQ(h.vacuum_energy(), -3.0);
}

TEST(hamiltonian, diagonal_matches_enumeration) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int n = 2; n <= 9; ++n) {
    const double jz = u(rng), b = u(rng);
    const auto h = build_hamiltonian(ChainSpec::uniform(n, 1.0, jz, b), Static{}, Static{});
    const auto ref = brute_force_diag(n, jz, b);
    for (int j = 0; j < n; ++j) EXPECT_NEAR(h.diag()[j], ref[j], 1e-13) << "n=" << n << " j=" << j;
    EXPECT_NEAR(h.vacuum_energy(), -jz * (n - 1) + b * n, 1e-13);
  }
}

TEST(hamiltonian, disorder_and_schedules) {
  ChainSpec s = ChainSpec::uniform(5, 2.0);
  s.bond_disorder = {0.1, 0.0, 0.05, 0.2};
  const auto h = build_hamiltonian(s, FermiOn{0.0, 1.0}, PowerOff{3.0, 1.0, 0.5});
  const auto off = h.offdiag(3.25);
  EXPECT_DOUBLE_EQ(off[0], -2.0 * 1.1 / (1.0 + std::exp(-3.25)));
  EXPECT_DOUBLE_EQ(off[1], -2.0);
  EXPECT_DOUBLE_EQ(off[2], -2.0 * 1.05);
  EXPECT_DOUBLE_EQ(off[3], -2.0 * 1.2 * std::sqrt(0.75));
}

TEST(hamiltonian, symmetric_and_mirror_invariant) {
  const auto h = build_hamiltonian(ChainSpec::uniform(7, 1.0, 0.4, 0.3), Static{}, Static{});
  const auto m = h.dense(1.0);
  const std::size_t n = m.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      EXPECT_EQ(m[i][j], m[j][i]);
      EXPECT_EQ(m[i][j], m[n - 1 - i][n - 1 - j]);
    }
}

TEST(hamiltonian, static_end_bonds_equal_bulk) {
  const auto h = build_hamiltonian(ChainSpec::uniform(6, 1.7), Static{}, Static{});
  for (double x : h.offdiag(3.0)) EXPECT_EQ(x, -1.7);
}

TEST(hamiltonian, rejects_bad_parameters) {
  EXPECT_THROW(build_hamiltonian(ChainSpec::uniform(1), Static{}, Static{}), InvalidParameter);
  ChainSpec s = ChainSpec::uniform(4);
  s.bond_disorder.pop_back();
  EXPECT_THROW(build_hamiltonian(s, Static{}, Static{}), InvalidParameter);
  s = ChainSpec::uniform(4);
  s.bond_disorder[1] = -1.0;
  EXPECT_THROW(build_hamiltonian(s, Static{}, Static{}), InvalidParameter);
  EXPECT_THROW(build_hamiltonian(ChainSpec::uniform(4), FermiOn{0.0, 0.0}, Static{}), InvalidParameter);
  EXPECT_THROW(build_hamiltonian(ChainSpec::uniform(4), Static{}, PowerOff{1.0, -2.0, 1.0}), InvalidParameter);
}
