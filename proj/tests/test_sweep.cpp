#include "chainwave/sweep.hpp"

#include <cmath>

#include "gtest/gtest.h"

using namespace chainwave;
using namespace chainwave::schedule;

namespace {

const ChainSpec kSpec = ChainSpec::uniform(6);

SweepOptions quick() {
  SweepOptions o;
  o.dt = 0.01;
  o.threads = 4;
  return o;
}

}  // namespace

TEST(linspace, endpoints_and_single_point) {
  const auto v = linspace(1.0, 2.0, 5);
  ASSERT_EQ(v.size(), 5U);
  EXPECT_EQ(v.front(), 1.0);
  EXPECT_EQ(v.back(), 2.0);
  EXPECT_DOUBLE_EQ(v[1], 1.25);
  EXPECT_EQ(linspace(3.0, 9.0, 1), std::vector<double>{3.0});
}

TEST(sweep_tau_tf, single_cell_matches_direct_run) {
  const auto g = sweep_tau_tf(kSpec, {0.5}, {3.6}, quick());
  ASSERT_EQ(g.cells.size(), 1U);
  const CouplingSchedule on = FermiOn{0.0, 0.5};
  const CouplingSchedule off = FermiOff{3.6, 0.5};
  RunOptions run;
  run.t_end = stationary_end(off);
  run.dt = 0.01;
  const auto trace = record_trace(kSpec, on, off, run);
  ASSERT_TRUE(g.at(0, 0).stationary.has_value());
  EXPECT_EQ(*g.at(0, 0).stationary, stationary_fidelity(trace, off));
  ASSERT_TRUE(g.at(0, 0).first_max.has_value());
  EXPECT_EQ(*g.at(0, 0).first_max, first_maximum(trace).f);
}

TEST(sweep_tau_tf, layout_and_best) {
  const std::vector<double> taus{0.3, 0.6};
  const std::vector<double> tfs{3.0, 3.5, 4.0};
  const auto g = sweep_tau_tf(kSpec, taus, tfs, quick());
  ASSERT_EQ(g.cells.size(), 6U);
  for (std::size_t i = 0; i < taus.size(); ++i)
    for (std::size_t j = 0; j < tfs.size(); ++j) {
      EXPECT_EQ(g.at(i, j).tau, taus[i]);
      EXPECT_EQ(g.at(i, j).t_f, tfs[j]);
    }
  const auto best = g.best(SweepQuantity::stationary);
  ASSERT_TRUE(best.has_value());
  for (const auto& c : g.cells)
    if (c.stationary) {
      EXPECT_LE(*c.stationary, *best->stationary);
    }
  const auto m = g.matrix(SweepQuantity::first_max);
  EXPECT_EQ(m.size(), 2U);
  EXPECT_EQ(m[1].size(), 3U);
}

TEST(sweep_tau_tf, deterministic_across_thread_counts) {
  auto a_opt = quick();
  a_opt.threads = 1;
  const auto a = sweep_tau_tf(kSpec, {0.3, 0.5}, {3.0, 4.0}, a_opt);
  const auto b = sweep_tau_tf(kSpec, {0.3, 0.5}, {3.0, 4.0}, quick());
  for (std::size_t k = 0; k < a.cells.size(); ++k) {
    EXPECT_EQ(a.cells[k].stationary, b.cells[k].stationary);
    EXPECT_EQ(a.cells[k].first_max, b.cells[k].first_max);
  }
}

TEST(sweep_tau_tf, rejects_bad_grids) {
  EXPECT_THROW(sweep_tau_tf(kSpec, {}, {3.0}, quick()), InvalidParameter);
  EXPECT_THROW(sweep_tau_tf(kSpec, {0.5, 0.4}, {3.0}, quick()), InvalidParameter);
  EXPECT_THROW(sweep_tau_tf(kSpec, {0.5}, {3.0, 3.0}, quick()), InvalidParameter);
  EXPECT_THROW(sweep_tau_tf(kSpec, {-0.5}, {3.0}, quick()), InvalidParameter);
}

TEST(sweep_tau_tf, ten_site_reference_cell) {
  SweepOptions o;
  const auto c = evaluate_fermi_cell(ChainSpec::uniform(10), 1.0, 6.2, o);
  ASSERT_TRUE(c.stationary.has_value());
  EXPECT_GT(*c.stationary, 0.94);
  EXPECT_LT(*c.stationary, 0.97);
}

TEST(refine_optimum, climbs_a_smooth_hill) {
  const Objective f = [](double x, double y) -> std::optional<double> {
    return 1.0 - (x - 0.37) * (x - 0.37) - 2.0 * (y - 5.3) * (y - 5.3);
  };
  const Box box{0.0, 1.0, 4.0, 7.0};
  const auto o = grid_then_refine(f, box, 7, 2, 3);
  EXPECT_GE(o.value, o.coarse_value);
  EXPECT_NEAR(o.tau, 0.37, 1e-9);
  EXPECT_NEAR(o.t_f, 5.3, 1e-9);
}

TEST(refine_optimum, never_worse_than_start_and_stays_in_box) {
  const Objective f = [](double x, double y) -> std::optional<double> {
    if (x > 0.8) return std::nullopt;
    return std::sin(7.0 * x) * std::cos(3.0 * y);
  };
  const Box box{0.0, 1.0, 0.0, 2.0};
  const auto o = grid_then_refine(f, box, 6, 1, 4);
  EXPECT_GE(o.value, o.coarse_value);
  EXPECT_GE(o.tau, box.tau_lo);
  EXPECT_LE(o.tau, 0.8);
  EXPECT_GE(o.t_f, box.tf_lo);
  EXPECT_LE(o.t_f, box.tf_hi);
  EXPECT_EQ(*f(o.tau, o.t_f), o.value);
}

TEST(refine_optimum, single_point_budget_evaluates_centre) {
  int calls = 0;
  const Objective f = [&](double x, double y) -> std::optional<double> {
    ++calls;
    return x + y;
  };
  const auto o = grid_then_refine(f, Box{0.0, 1.0, 2.0, 4.0}, 1, 1);
  EXPECT_EQ(calls, 1);
  EXPECT_EQ(o.tau, 0.5);
  EXPECT_EQ(o.t_f, 3.0);
  EXPECT_EQ(o.value, 3.5);
  EXPECT_THROW(grid_then_refine(f, Box{0.0, 1.0, 2.0, 4.0}, 0, 1), InvalidParameter);
}

TEST(optimize_fermi, refined_beats_coarse) {
  OptimizeOptions o;
  o.box = Box{0.3, 0.9, 3.0, 4.5};
  o.points = 4;
  o.dt = 0.01;
  const auto best = optimize_fermi(kSpec, SweepQuantity::stationary, OnRamp::fermi, o);
  EXPECT_GE(best.value, best.coarse_value);
  EXPECT_GT(best.value, 0.9);
}

TEST(sweep_powerlaw, unit_budget_equals_direct_simulation) {
  PowerlawOptions o;
  o.dt = 0.01;
  const auto pts = sweep_powerlaw(kSpec, {0.5}, 1, o);
  ASSERT_EQ(pts.size(), 1U);
  const double tau = 0.5 * (o.box.tau_lo + o.box.tau_hi);
  const double tf = 0.5 * (o.box.tf_lo + o.box.tf_hi);
  EXPECT_EQ(pts[0].best_tau, tau);
  EXPECT_EQ(pts[0].best_tf, tf);

  const CouplingSchedule first = PowerOn{tau, 0.5};
  const CouplingSchedule last = PowerOff{tf, tau, 0.5};
  RunOptions run;
  run.t_end = last.decoupling_complete() + 0.5;
  run.dt = 0.01;
  EXPECT_EQ(pts[0].f_first_max, first_maximum(record_trace(kSpec, first, last, run)).f);
}

TEST(sweep_powerlaw, deterministic_and_validated) {
  PowerlawOptions o;
  o.dt = 0.02;
  o.rounds = 1;
  const auto a = sweep_powerlaw(kSpec, {0.5, 1.0}, 3, o);
  o.threads = 1;
  const auto b = sweep_powerlaw(kSpec, {0.5, 1.0}, 3, o);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].f_first_max, b[i].f_first_max);
    EXPECT_EQ(a[i].best_tau, b[i].best_tau);
    EXPECT_GE(a[i].f_first_max, a[i].coarse_f);
  }
  EXPECT_THROW(sweep_powerlaw(kSpec, {}, 3, o), InvalidParameter);
  EXPECT_THROW(sweep_powerlaw(kSpec, {0.0}, 3, o), InvalidParameter);
}
