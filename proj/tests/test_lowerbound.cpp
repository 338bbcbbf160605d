#include <cvasreg/lowerbound.hpp>

#include <gtest/gtest.h>

#include <map>

#include "common.hpp"

using namespace cvasreg;
using namespace testing_support;

namespace {

// Effect vectors written from the transition formulas with named counters.
std::map<std::string, std::vector<long>> expected_effects(int h) {
  auto idx = [h](const std::string& kind, int i) {
    static const std::map<std::string, int> block{{"x", 0}, {"y", 1}, {"xb", 2}, {"yb", 3}, {"s", 4}};
    return block.at(kind) * h + (i - 1);
  };
  std::map<std::string, std::vector<long>> out;
  auto vec = [&] { return std::vector<long>(5 * h, 0); };
  auto xh = [&](std::vector<long>& v, int i, long c) {
    v[idx("x", i)] += c;
    v[idx("xb", i)] -= c;
  };
  auto yh = [&](std::vector<long>& v, int i, long c) {
    v[idx("y", i)] += c;
    v[idx("yb", i)] -= c;
  };
  for (int i = 1; i <= h; ++i) {
    std::string p = "t_" + std::to_string(i) + "_";
    auto v1 = vec();
    xh(v1, i, -2);
    yh(v1, i, -1);
    for (int j = i + 1; j <= h; ++j) xh(v1, j, -2), yh(v1, j, -2);
    out[p + "1"] = v1;
    auto v2 = vec();
    xh(v2, i, 1);
    v2[idx("s", i)] += 1;
    out[p + "2"] = v2;
    auto v3 = vec();
    xh(v3, i, -1);
    v3[idx("s", i)] += 1;
    out[p + "3"] = v3;
    auto v4 = vec();
    for (int j = i; j <= h; ++j) xh(v4, j, 1), yh(v4, j, 1);
    out[p + "4"] = v4;
    auto v5 = vec();
    yh(v5, i, -1);
    v5[idx("s", i)] += 1;
    out[p + "5"] = v5;
    auto v6 = vec();
    yh(v6, i, 1);
    v6[idx("s", i)] += 1;
    out[p + "6"] = v6;
    auto r = vec();
    r[idx("xb", i)] = -1;
    for (int j = i + 1; j <= h; ++j) r[idx("xb", j)] = -1, r[idx("yb", j)] = -1;
    out["r_" + std::to_string(i)] = r;
    auto f = vec(), g = vec();
    f[idx("x", i)] = -1;
    g[idx("y", i)] = -1;
    out["f_" + std::to_string(i)] = f;
    out["g_" + std::to_string(i)] = g;
  }
  return out;
}

}  // namespace

TEST(LowerBound, SizesAndGoldenVectors) {
  EXPECT_EQ(generate_lower_bound(1).cvas.dimension(), 5);
  EXPECT_EQ(generate_lower_bound(1).cvas.size(), 9);
  EXPECT_EQ(generate_lower_bound(2).cvas.dimension(), 10);
  EXPECT_EQ(generate_lower_bound(2).cvas.size(), 18);
  EXPECT_THROW(generate_lower_bound(0), std::invalid_argument);
  for (int h = 1; h <= 3; ++h) {
    auto inst = generate_lower_bound(h);
    auto expect = expected_effects(h);
    ASSERT_EQ(static_cast<std::size_t>(inst.cvas.size()), expect.size());
    for (const auto& [label, v] : expect) EXPECT_EQ(inst.cvas.effect(inst.cvas.index_of(label)), v) << label;
  }
}

TEST(LowerBound, LaterStagesLeaveEarlierCountersAlone) {
  auto inst = generate_lower_bound(3);
  for (int i = 1; i <= 3; ++i) {
    Word ws = inst.w(i);
    ws.push_back(inst.r(i));
    for (int letter : ws)
      for (int j = 1; j < i; ++j)
        for (int c : {inst.x(j), inst.y(j), inst.xbar(j), inst.ybar(j), inst.step(j)})
          EXPECT_EQ(inst.cvas.effect(letter)[c], 0);
  }
}

TEST(LowerBound, Configurations) {
  auto [x, y] = lower_bound_configs(1, 2);
  EXPECT_EQ(x, (Configuration{q(1, 2), q(1, 2), 0, 0, 0}));
  EXPECT_EQ(y, (Configuration{0, 0, 0, 0, 4}));
  auto [x3, y3] = lower_bound_configs(2, 3);
  int thirds = 0, fours = 0;
  for (const auto& v : x3) thirds += v == q(1, 3);
  for (const auto& v : y3) fours += v == 4;
  EXPECT_EQ(thirds, 4);
  EXPECT_EQ(fours, 2);
  EXPECT_THROW(lower_bound_configs(1, 0), std::invalid_argument);
}

TEST(LowerBound, MaxedOutRuns) {
  for (auto [h, n] : {std::pair{1, 2L}, {1, 3L}, {2, 2L}}) {
    auto inst = generate_lower_bound(h);
    auto run = maxed_out_run(inst, n);
    EXPECT_TRUE(run_reaches(inst.cvas, run, lower_bound_configs(h, n).second)) << h << "," << n;
  }
  auto inst = generate_lower_bound(2);
  EXPECT_EQ(maxed_out_run(inst, 2).steps.size(), 66u);
  // before the reset word, x_1 holds 1/(3 * 2^3)
  auto one = generate_lower_bound(1);
  auto run = maxed_out_run(one, 3);
  auto cfg = simulate(one.cvas, run);
  EXPECT_EQ(cfg[cfg.size() - 3][one.x(1)], q(1, 24));
}

TEST(LowerBound, ExponentialRuns) {
  for (auto [h, n] : {std::pair{1, 2L}, {1, 3L}, {2, 2L}}) {
    auto inst = generate_lower_bound(h);
    auto run = exponential_run(inst, n);
    EXPECT_TRUE(run_reaches(inst.cvas, run, lower_bound_configs(h, n).second)) << h << "," << n;
  }
  // halving: after w_1^{2k} the x_1 counter holds 1/(2k)
  auto inst = generate_lower_bound(1);
  auto run = exponential_run(inst, 2);
  auto cfg = simulate(inst.cvas, run);
  EXPECT_EQ(cfg[24][inst.x(1)], q(1, 4));
  EXPECT_EQ(cfg[24][inst.y(1)], q(1, 2));
  EXPECT_EQ(cfg[24][inst.step(1)], 4);
  EXPECT_EQ(exponential_gamma(2), q(4, 5));
}

// With 16/17 in place of the scaling the step counter misses 4.
TEST(LowerBound, AlternativeScalingMissesTarget) {
  const long k = 2;
  Rational gamma = q(16, 17);
  Rational total = 2 * k * 2 * gamma * (q(1, 2 * k * k) + q(1, k));
  EXPECT_NE(total, 4);
  EXPECT_EQ(2 * k * 2 * exponential_gamma(k) * (q(1, 2 * k * k) + q(1, k)), 4);
}

TEST(LowerBound, UniqueShortRuns) {
  EXPECT_EQ(brute_force_short_runs(generate_lower_bound(1), 2), (std::vector<std::vector<long>>{{2}}));
  EXPECT_EQ(brute_force_short_runs(generate_lower_bound(1), 3), (std::vector<std::vector<long>>{{3}}));
  EXPECT_EQ(brute_force_short_runs(generate_lower_bound(2), 2), (std::vector<std::vector<long>>{{2, 8}}));
}

TEST(LowerBound, PumpingFalsification) {
  auto rep = pumping_falsification(generate_lower_bound(1), 2);
  EXPECT_TRUE(rep.ok());
  EXPECT_EQ(rep.removals_checked, 2u);
}

TEST(LowerBound, TowerAndCsv) {
  EXPECT_EQ(tower(0, 5), 5);
  EXPECT_EQ(tower(2, 2), 16);
  EXPECT_EQ(tower(3, 2), 65536);
  EXPECT_THROW(tower(5, 3), ScaleCapExceeded);
  std::string csv = lower_bound_csv({{1, 2, 19, -1, -1}});
  EXPECT_EQ(csv, "h,n,run_length,nfa_states,dfa_states\n1,2,19,NA,NA\n");
}
