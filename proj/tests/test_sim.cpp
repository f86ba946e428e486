#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <set>

#include "mlcache/diagnostics.hpp"
#include "mlcache/pama.hpp"
#include "mlcache/popularity.hpp"
#include "mlcache/rate.hpp"
#include "mlcache/sim.hpp"
#include "test_util.hpp"

using namespace mlcache;
using namespace mlcache::sim;

namespace {

SystemConfig single_level(std::int64_t K, std::int64_t N, std::int64_t U, std::int64_t d, double M) {
  SystemConfig c;
  c.num_caches = K;
  c.memory = M;
  c.levels = {{N, U, d}};
  return c;
}

}  // namespace

TEST(Coloring, PaperFigure) {
  const auto c = build_coloring(6, 2, 2);
  EXPECT_EQ(c.num_groups(), 4);
  EXPECT_EQ(c.cache_colors, (std::vector<std::int64_t>{0, 1, 0, 1, 0, 1}));
  EXPECT_EQ(c.num_edge(), 0);
  for (std::int64_t k = 0; k < 6; ++k) {
    std::set<std::int64_t> seen;
    for (std::int64_t col = 0; col < 2; ++col) {
      const auto cache = c.cache_of_color(k, col);
      ASSERT_GE(cache, 0);
      EXPECT_EQ(c.cache_colors[cache], col);
      seen.insert(cache);
    }
    EXPECT_EQ(seen.size(), 2u);
  }
}

TEST(Coloring, GroupsNeverShareACache) {
  for (std::int64_t K = 1; K <= 12; ++K)
    for (std::int64_t d = 1; d <= K; ++d) {
      const auto c = build_coloring(K, 2, d);
      std::map<std::int64_t, std::set<std::int64_t>> caches_of_group;
      for (std::int64_t k = 0; k < K; ++k) {
        if (c.is_edge(k)) continue;
        for (std::int64_t u = 0; u < 2; ++u) {
          const auto g = c.group(k, u);
          ASSERT_LT(g, c.num_groups());
          for (std::int64_t j = 0; j < d; ++j)
            ASSERT_TRUE(caches_of_group[g].insert((k + j) % K).second) << "K=" << K << " d=" << d;
        }
      }
    }
}

TEST(Coloring, EdgesAndErrors) {
  EXPECT_EQ(build_coloring(5, 1, 2).num_edge(), 1);
  EXPECT_TRUE(build_coloring(5, 1, 2).is_edge(4));
  const auto one = build_coloring(4, 3, 1);
  EXPECT_EQ(one.num_groups(), 3);
  EXPECT_THROW(build_coloring(2, 1, 3), std::invalid_argument);
}

TEST(Place, FullAndEmptyFractions) {
  const auto c = single_level(4, 8, 1, 2, 4.0);
  const auto full = place(c, std::vector<double>{4.0}, 256, 1);
  EXPECT_EQ(full.levels[0].fraction, 1.0);
  EXPECT_EQ(full.stored_bits(0), 8 * 128);
  const auto log = deliver_bit_exact(c, full, worst_case_demands(c));
  EXPECT_EQ(log.broadcast_bits, 0);

  const auto empty = place(c, std::vector<double>{0.0}, 256, 1);
  EXPECT_EQ(empty.stored_bits(0), 0);
  const auto log0 = deliver_bit_exact(c, empty, worst_case_demands(c));
  EXPECT_DOUBLE_EQ(log0.empirical_rate, 4.0);  // K U whole files
}

TEST(Place, Errors) {
  const auto c = single_level(4, 8, 1, 2, 4.0);
  EXPECT_THROW(place(c, std::vector<double>{4.1}, 256, 1), std::invalid_argument);
  EXPECT_THROW(place(c, std::vector<double>{1.0}, 32, 1), std::invalid_argument);
  EXPECT_THROW(place(c, std::vector<double>{1.0, 1.0}, 256, 1), std::invalid_argument);
}

TEST(Place, PartSizesConcentrate) {
  // K = 2, d = 1, M/N = 1/2, F = 1e5: each part W_S has about (1/4) F bits.
  const auto c = single_level(2, 4, 1, 1, 2.0);
  const auto p = place(c, std::vector<double>{2.0}, 100000, 99);
  const auto& a = p.levels[0].at(0, 0);
  const auto& b = p.levels[0].at(1, 0);
  std::int64_t parts[4] = {};
  for (std::int64_t i = 0; i < a.size(); ++i) ++parts[(a.test(i) ? 1 : 0) + (b.test(i) ? 2 : 0)];
  for (auto n : parts) EXPECT_NEAR(static_cast<double>(n) / 25000.0, 1.0, 0.03);
}

TEST(Place, MemoryWithinOnePercent) {
  SystemConfig c;
  c.num_caches = 4;
  c.levels = {{16, 2, 2}, {32, 1, 1}};
  c.memory = 10.0;
  const std::vector<double> shares{4.0, 6.0};
  const std::int64_t F = 1 << 14;
  const auto p = place(c, shares, F, 5);
  for (std::int64_t k = 0; k < 4; ++k)
    EXPECT_NEAR(static_cast<double>(p.stored_bits(k)) / (10.0 * F), 1.0, 0.01);
}

TEST(Place, Reproducible) {
  const auto c = single_level(4, 8, 1, 2, 2.0);
  EXPECT_EQ(place(c, std::vector<double>{2.0}, 512, 7), place(c, std::vector<double>{2.0}, 512, 7));
  EXPECT_FALSE(place(c, std::vector<double>{2.0}, 512, 7) == place(c, std::vector<double>{2.0}, 512, 8));
}

TEST(Deliver, TwoUserExample) {
  const auto c = single_level(2, 4, 1, 1, 2.0);
  const auto p = place(c, std::vector<double>{2.0}, 100000, 3);
  const auto log = deliver_bit_exact(c, p, worst_case_demands(c));
  EXPECT_NEAR(log.empirical_rate, 0.75, 0.75 * 0.03);
  EXPECT_EQ(log.decoded_users, 2);
}

TEST(Deliver, MatchesSingleLevelRateAtLargeF) {
  const auto c = single_level(6, 100, 2, 2, 25.0);
  const auto p = place(c, std::vector<double>{25.0}, 1 << 17, 21);
  const auto log = deliver_bit_exact(c, p, worst_case_demands(c));
  EXPECT_NEAR(log.empirical_rate, 3.5, 3.5 * 0.05);
  EXPECT_EQ(log.loads.size(), 8u);  // dU = 4 groups times 2 colors
}

TEST(Deliver, RejectsBadProfiles) {
  const auto c = single_level(3, 6, 1, 1, 1.0);
  const auto p = place(c, std::vector<double>{1.0}, 128, 1);
  auto d = worst_case_demands(c);
  d.pop_back();
  EXPECT_THROW(deliver_bit_exact(c, p, d), std::invalid_argument);
  d = worst_case_demands(c);
  d[0].file = 6;
  EXPECT_THROW(deliver_bit_exact(c, p, d), std::invalid_argument);
  d = worst_case_demands(c);
  d[1] = d[0];
  EXPECT_THROW(deliver_bit_exact(c, p, d), std::invalid_argument);
}

TEST(Deliver, FuzzedInstancesAllDecode) {
  RandomStream rng(31, {stream::kFuzz, 500});
  for (int k = 0; k < 60; ++k) {
    SystemConfig c;
    c.num_caches = mlcache::testing::draw(rng, 1, 8);
    const auto L = mlcache::testing::draw(rng, 1, 2);
    std::vector<double> shares;
    for (std::int64_t i = 0; i < L; ++i) {
      LevelSpec l{mlcache::testing::draw(rng, 1, 8), mlcache::testing::draw(rng, 1, 2),
                  mlcache::testing::draw(rng, 1, std::min<std::int64_t>(2, c.num_caches))};
      c.levels.push_back(l);
      shares.push_back(rng.uniform01() * l.full_storage());
    }
    const auto p = place(c, shares, 1 << 12, 100 + k);
    const auto demands = random_demands(c, 200 + k);
    DeliveryLog log;
    ASSERT_NO_THROW(log = deliver_bit_exact(c, p, demands)) << "instance " << k;
    EXPECT_EQ(log.decoded_users, static_cast<std::int64_t>(demands.size()));
    EXPECT_EQ(log, deliver_bit_exact(c, p, demands));
  }
}

TEST(Deliver, EdgeCachesFallBackToUncoded) {
  const auto c = single_level(5, 10, 1, 2, 2.0);
  const auto p = place(c, std::vector<double>{2.0}, 2048, 4);
  const auto log = deliver_bit_exact(c, p, worst_case_demands(c));
  EXPECT_GT(log.uncoded_bits, 0);
  EXPECT_EQ(log.decoded_users, 5);
}

TEST(ExpectedRate, WorstCaseProfileEqualsExactRate) {
  RandomStream rng(32, {stream::kFuzz, 501});
  int checked = 0;
  for (int k = 0; k < 300; ++k) {
    auto c = mlcache::testing::random_config(rng, 12, 3, 3);
    bool divides = true;
    for (const auto& l : c.levels) divides = divides && c.num_caches % l.access_degree == 0;
    if (!divides) continue;
    ++checked;
    const auto a = pama::pama(c);
    const double exact = pama::total_rate_exact(c, a).total;
    EXPECT_NEAR(expected_rate(c, a.shares, worst_case_demands(c)), exact, 1e-12 * std::max(1.0, exact));
  }
  EXPECT_GT(checked, 100);
}

TEST(ExpectedRate, ZeroMemoryCountsDistinctFiles) {
  SystemConfig c;
  c.num_caches = 3;
  c.levels = {{10, 2, 1}};
  const DemandProfile d{{0, 0, 0, 1}, {0, 1, 0, 1}, {1, 0, 0, 1}, {2, 0, 0, 4}};
  EXPECT_DOUBLE_EQ(expected_rate(c, std::vector<double>{0.0}, d), 2.0);
}

TEST(ExpectedRate, RepeatedDemandsServedOnce) {
  SystemConfig c;
  c.num_caches = 4;
  c.levels = {{10, 1, 1}};
  const std::vector<double> shares{2.5};
  const DemandProfile same{{0, 0, 0, 3}, {1, 0, 0, 3}, {2, 0, 0, 3}, {3, 0, 0, 3}};
  EXPECT_NEAR(expected_rate(c, shares, same), rate::coded_factor(0.25, 1.0), 1e-15);
}

TEST(Stochastic, ReproducibleAndParallelMatchesSerial) {
  const auto z = popularity::zipf_distribution(0.6, 2000);
  ScopedWarningCapture quiet;
  const auto levels = popularity::discretize(z, popularity::LevelPartition(2000, {200}), 5, 100, {}, 100.0);
  const auto a = simulate_stochastic(levels, z, 100, 30, 9);
  const auto b = simulate_stochastic_parallel(levels, z, 100, 30, 9);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, simulate_stochastic(levels, z, 100, 30, 9));
  EXPECT_FALSE(a == simulate_stochastic(levels, z, 100, 30, 10));
  EXPECT_LE(a.p05, a.p50);
  EXPECT_LE(a.p50, a.p95);
}

TEST(Stochastic, ZeroMemoryIsDistinctRequestCount) {
  const auto z = popularity::zipf_distribution(0.6, 2000);
  ScopedWarningCapture quiet;
  const auto levels = popularity::discretize(z, popularity::LevelPartition(2000, {200}), 5, 100, {}, 0.0);
  const auto s = simulate_stochastic(levels, z, 100, 20, 4);
  const auto l = lfu_simulate(levels, z, 100, 20, 4);
  EXPECT_EQ(s.rates, l.rates);
  EXPECT_LE(s.mean, 100.0);
}

TEST(Stochastic, DemandsFollowTheLevelMap) {
  const auto z = popularity::zipf_distribution(0.6, 1000);
  ScopedWarningCapture quiet;
  const auto levels = popularity::discretize(z, popularity::LevelPartition(1000, {100}), 4, 40, {}, 10.0);
  const auto d = stochastic_demands(levels, z, 40, 1, 0);
  ASSERT_EQ(d.size(), 40u);
  std::map<std::pair<std::size_t, std::int64_t>, std::int64_t> per_cache;
  for (const auto& x : d) {
    EXPECT_LT(x.file, levels.block_size[x.level]);
    EXPECT_EQ(x.slot, (per_cache[{x.level, x.cache}]++));
  }
}

TEST(Lfu, Examples) {
  const auto z = popularity::zipf_distribution(0.6, 1000);
  ScopedWarningCapture quiet;
  const auto all = popularity::discretize(z, popularity::LevelPartition(1000, {100}), 4, 40, {}, 1000.0);
  EXPECT_EQ(lfu_simulate(all, z, 40, 5, 1).mean, 0.0);
  const auto c = mlcache::testing::example1(100);
  EXPECT_EQ(lfu_rate_for(c, worst_case_demands(c)), 8.0);
  EXPECT_EQ(lfu_rate_for(c.with_memory(0), worst_case_demands(c)), 80.0);
}

TEST(Summarize, NearestRankPercentiles) {
  std::vector<double> r;
  for (int k = 1; k <= 100; ++k) r.push_back(k);
  const auto s = summarize(r);
  EXPECT_DOUBLE_EQ(s.mean, 50.5);
  EXPECT_EQ(s.p05, 5.0);
  EXPECT_EQ(s.p50, 50.0);
  EXPECT_EQ(s.p95, 95.0);
}
