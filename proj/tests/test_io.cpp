#include "chainwave/io.hpp"

#include <sstream>

#include "gtest/gtest.h"

using namespace chainwave;

TEST(parse_range, triple_and_scalar) {
  const auto r = io::parse_range("0.05:2:40");
  EXPECT_EQ(r.lo, 0.05);
  EXPECT_EQ(r.hi, 2.0);
  EXPECT_EQ(r.count, 40U);
  EXPECT_EQ(r.values().size(), 40U);
  EXPECT_EQ(r.values().back(), 2.0);
  const auto s = io::parse_range("6.2");
  EXPECT_EQ(s.count, 1U);
  EXPECT_EQ(s.values(), std::vector<double>{6.2});
}

TEST(parse_range, rejects_malformed) {
  EXPECT_THROW(io::parse_range(""), InvalidParameter);
  EXPECT_THROW(io::parse_range("1:2"), InvalidParameter);
  EXPECT_THROW(io::parse_range("a:2:3"), InvalidParameter);
  EXPECT_THROW(io::parse_range("1:2:0"), InvalidParameter);
  EXPECT_THROW(io::parse_range("2:1:5"), InvalidParameter);
}

TEST(num, round_trips) {
  for (double x : {0.1, 1.0 / 3.0, 6.2, 1e-17, -2.5e300, 0.0}) EXPECT_EQ(std::stod(io::num(x)), x);
  EXPECT_EQ(io::num(0.5), "0.5");
}

TEST(csv, trace_header_and_rows) {
  FidelityTrace t;
  t.samples.push_back({0.0, 0.0, 0.0, 0.5, 0.5});
  t.samples.push_back({0.25, 0.5, 1.0, 0.6, 0.7});
  std::ostringstream os;
  io::write_trace_csv(os, t);
  EXPECT_EQ(os.str(), "t,f_abs,rel_phase,f_avg,f_opt\n0,0,0,0.5,0.5\n0.25,0.5,1,0.6,0.7\n");
}

TEST(csv, heatmap_leaves_missing_cells_empty) {
  SweepGrid g{{0.5, 1.0}, {4.0, 5.0}, {}};
  g.cells = {SweepCell{0.5, 4.0, 0.9, 3.0, 0.95}, SweepCell{0.5, 5.0, {}, {}, 0.96},
             SweepCell{1.0, 4.0, 0.8, 3.0, {}}, SweepCell{1.0, 5.0, {}, {}, {}}};
  std::ostringstream st;
  io::write_heatmap_csv(st, g, SweepQuantity::stationary);
  EXPECT_EQ(st.str(), "tau\\t_f,4,5\n0.5,0.95,0.96\n1,,\n");
  std::ostringstream fm;
  io::write_heatmap_csv(fm, g, SweepQuantity::first_max);
  EXPECT_EQ(fm.str(), "tau\\t_f,4,5\n0.5,0.9,\n1,0.8,\n");
}

TEST(csv, samples_keep_failed_rows) {
  EnsembleReport r;
  r.samples.push_back({0, 7, 0.95, 0.93, 0.02, false, ""});
  r.samples.push_back({1, 8, 0.0, 0.0, 0.0, true, "norm drift"});
  std::ostringstream os;
  io::write_samples_csv(os, r);
  EXPECT_EQ(os.str(),
            "sample_index,seed,f_dynamic,f_reference,difference,failed\n0,7,0.95,0.93,0.02,0\n1,8,,,,1\n");
}

TEST(csv, histogram_and_powerlaw) {
  std::ostringstream h;
  io::write_histogram_csv(h, Histogram{{0.0, 0.5, 1.0}, {3, 4}});
  EXPECT_EQ(h.str(), "bin_lo,bin_hi,count\n0,0.5,3\n0.5,1,4\n");
  std::ostringstream p;
  io::write_powerlaw_csv(p, {PowerlawPoint{0.5, 1.2, 6.1, 0.97, 0.96}});
  EXPECT_EQ(p.str(), "a,best_tau,best_tf,f_first_max,coarse_f\n0.5,1.2,6.1,0.97,0.96\n");
}

TEST(json, summaries) {
  TransferSummary s;
  s.first_max = PeakInfo{10, 6.1, 0.93, std::numeric_limits<double>::infinity()};
  s.f_stationary = 0.95;
  const auto j = io::to_json(s);
  EXPECT_EQ(j["f_first_max"].get<double>(), 0.93);
  EXPECT_TRUE(j["half_width"].is_null());
  EXPECT_EQ(j["f_stationary"].get<double>(), 0.95);
  const auto c = io::to_json(ChainSpec::uniform(4));
  EXPECT_EQ(c["n"].get<int>(), 4);
  EXPECT_EQ(c["bond_disorder"].size(), 3U);
}
