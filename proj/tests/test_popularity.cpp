#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "mlcache/diagnostics.hpp"
#include "mlcache/pama.hpp"
#include "mlcache/popularity.hpp"

using namespace mlcache;
using namespace mlcache::popularity;

namespace {

EmpiricalDistribution parse(const std::string& text) {
  std::istringstream in(text);
  return load_counts(in);
}

}  // namespace

TEST(LoadCounts, Examples) {
  const auto d = parse("4\n1\n3\n");
  ASSERT_EQ(d.n_files(), 3);
  EXPECT_DOUBLE_EQ(d.probability(0), 0.5);
  EXPECT_DOUBLE_EQ(d.probability(1), 0.375);
  EXPECT_DOUBLE_EQ(d.probability(2), 0.125);
  const auto u = parse("1\n1\n1\n1\n");
  for (double p : u.probabilities()) EXPECT_DOUBLE_EQ(p, 0.25);
  EXPECT_THROW(parse(""), std::invalid_argument);
}

TEST(LoadCounts, CsvHeaderCommentsAndZeros) {
  ScopedWarningCapture w;
  const auto d = parse("# request log\nid,count\nvideo-a,6\n\nvideo-b,0\nvideo-c,2\n");
  EXPECT_EQ(d.n_files(), 2);
  EXPECT_DOUBLE_EQ(d.probability(0), 0.75);
  EXPECT_TRUE(w.contains("zero"));
}

TEST(LoadCounts, ErrorsCarryLineNumbers) {
  try {
    parse("3\n2\nabc\n");
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
  EXPECT_THROW(parse("-1\n"), std::invalid_argument);
  ScopedWarningCapture w;
  EXPECT_THROW(parse("0\n0\n"), std::invalid_argument);
}

TEST(Distribution, MassAndRanks) {
  const auto d = parse("4\n1\n3\n");
  EXPECT_DOUBLE_EQ(d.mass(0, 2), 0.875);
  EXPECT_DOUBLE_EQ(d.mass(0, 3), 1.0);
  EXPECT_EQ(d.rank_for(0.0), 0);
  EXPECT_EQ(d.rank_for(0.49), 0);
  EXPECT_EQ(d.rank_for(0.51), 1);
  EXPECT_EQ(d.rank_for(0.9), 2);
  EXPECT_EQ(d.rank_for(0.999999), 2);
}

TEST(FitZipf, RoundTrips) {
  EXPECT_NEAR(fit_zipf(zipf_distribution(0.6, 10000)), 0.6, 1e-6);
  EXPECT_NEAR(fit_zipf(zipf_distribution(1.5, 10000)), 1.5, 1e-6);
  EXPECT_NEAR(fit_zipf(EmpiricalDistribution(std::vector<double>(50, 1.0))), 0.0, 1e-9);
  EXPECT_THROW(fit_zipf(zipf_distribution(1.0, 9)), std::invalid_argument);
}

TEST(FitZipf, RoundTripThroughCountFile) {
  // Integer counts proportional to rank^-0.8 survive the loader.
  std::ostringstream counts;
  for (int r = 1; r <= 2000; ++r) counts << std::llround(1e9 * std::pow(r, -0.8)) << '\n';
  EXPECT_NEAR(fit_zipf(parse(counts.str())), 0.8, 1e-3);
}

TEST(ZipfSplit, Examples) {
  EXPECT_EQ(zipf_split_heuristic(0.6, 10000, 10, 100).block_sizes(), (std::vector<std::int64_t>{286, 9714}));
  EXPECT_EQ(zipf_split_heuristic(1.5, 10000, 10, 50).block_sizes(), (std::vector<std::int64_t>{63, 9937}));
  EXPECT_EQ(zipf_split_heuristic(0.6, 10000, 10, 0).block_sizes(), (std::vector<std::int64_t>{1, 9999}));
}

TEST(ZipfSplit, OtherBranches) {
  // s = 1: m1 = N/K = 1000, m2 = N = 10000; middle branch gives n = N -> clamped.
  EXPECT_EQ(zipf_split_heuristic(1.0, 10000, 10, 5000).cuts(), (std::vector<std::int64_t>{9999}));
  // s = 1.5, K = 10: m1 = min(1000, 100) = 100, m2 = max(464.2, 100); M >= m2 -> 0.1 M.
  EXPECT_EQ(zipf_split_heuristic(1.5, 10000, 10, 5000).cuts(), (std::vector<std::int64_t>{500}));
  EXPECT_EQ(zipf_split_heuristic(1.5, 10000, 10, 200).cuts(), (std::vector<std::int64_t>{464}));
  EXPECT_THROW(zipf_split_heuristic(0.0, 10000, 10, 5), std::invalid_argument);
}

TEST(LevelPartition, Invariants) {
  const LevelPartition p(10, {3, 7});
  EXPECT_EQ(p.num_blocks(), 3u);
  EXPECT_EQ(p.block_sizes(), (std::vector<std::int64_t>{3, 4, 3}));
  EXPECT_THROW(LevelPartition(10, {0}), std::invalid_argument);
  EXPECT_THROW(LevelPartition(10, {5, 5}), std::invalid_argument);
  EXPECT_THROW(LevelPartition(10, {10}), std::invalid_argument);
}

TEST(Discretize, UniformEqualBlocks) {
  const EmpiricalDistribution uniform(std::vector<double>(100, 1.0));
  const auto d = discretize(uniform, LevelPartition(100, {50}), 5, 10, {}, 3.0);
  ASSERT_EQ(d.config.num_levels(), 2u);
  EXPECT_EQ(d.config.levels[0].users_per_cache, 1);
  EXPECT_EQ(d.config.levels[1].users_per_cache, 1);
  EXPECT_EQ(d.config.memory, 3.0);
}

TEST(Discretize, ZipfTwoLevels) {
  const auto z = zipf_distribution(0.6, 10000);
  const auto d = discretize(z, LevelPartition(10000, {2000}), 10, 100, {}, 50.0);
  const auto u1 = std::llround(10.0 * z.mass(0, 2000));
  EXPECT_EQ(d.config.levels[0].users_per_cache, u1);
  EXPECT_EQ(d.config.levels[1].users_per_cache, 10 - u1);
  EXPECT_EQ(d.block_size, (std::vector<std::int64_t>{2000, 8000}));
}

TEST(Discretize, SingleBlockAndErrors) {
  const auto z = zipf_distribution(0.6, 1000);
  const auto d = discretize(z, LevelPartition(1000, {}), 10, 95, {}, 1.0);
  EXPECT_EQ(d.config.levels[0].users_per_cache, 10);  // 9.5 rounds half up
  EXPECT_THROW(discretize(z, LevelPartition(1000, {}), 10, 4, {}, 1.0), std::invalid_argument);
  const std::vector<std::int64_t> wrong{1, 1, 1};
  EXPECT_THROW(discretize(z, LevelPartition(1000, {10}), 10, 100, wrong, 1.0), std::invalid_argument);
}

TEST(Discretize, MergesZeroUserBlocks) {
  const auto z = zipf_distribution(0.6, 10000);
  ScopedWarningCapture w;
  // The middle block holds too little mass for one user per cache.
  const auto d = discretize(z, LevelPartition(10000, {2000, 2010}), 10, 100, {}, 10.0);
  EXPECT_EQ(d.config.num_levels(), 2u);
  EXPECT_TRUE(w.contains("merged"));
  std::int64_t files = 0;
  for (auto s : d.block_size) files += s;
  EXPECT_EQ(files, 10000);
}

TEST(Discretize, RegularityIsOnlyAWarning) {
  const EmpiricalDistribution uniform(std::vector<double>(20, 1.0));
  ScopedWarningCapture w;
  EXPECT_NO_THROW(discretize(uniform, LevelPartition(20, {}), 10, 100, {}, 1.0));
  EXPECT_FALSE(w.messages().empty());
}

TEST(BruteForce, SingleLevelIsPamaRate) {
  const auto z = zipf_distribution(0.6, 10000);
  BruteForceOptions o;
  o.num_levels = 1;
  o.memory = 500;
  const auto b = brute_force_partition(z, o);
  EXPECT_EQ(b.candidates, 1u);
  const auto d = discretize(z, LevelPartition(10000, {}), 10, 100, {}, 500);
  EXPECT_DOUBLE_EQ(b.rate, pama::total_rate_exact(d.config, pama::pama(d.config)).total);
}

TEST(BruteForce, DominatesHeuristicOnTheFullGrid) {
  const auto z = zipf_distribution(0.6, 10000);
  ScopedWarningCapture quiet;
  for (double m : {100.0, 1000.0, 5000.0}) {
    BruteForceOptions o;
    o.memory = m;
    o.coarsening = 1;
    const auto b = brute_force_partition_parallel(z, o);
    const auto h = zipf_split_heuristic(0.6, 10000, 10, m);
    EXPECT_LE(b.rate, partition_rate(z, h, 10, 100, {}, m) + 1e-12);
  }
}

TEST(BruteForce, MoreLevelsNeverHurtOnTheSameGrid) {
  const auto z = zipf_distribution(0.6, 10000);
  ScopedWarningCapture quiet;
  for (double m : {300.0, 2000.0, 7000.0}) {
    double prev = INFINITY;
    for (std::size_t L = 1; L <= 3; ++L) {
      BruteForceOptions o;
      o.num_levels = L;
      o.memory = m;
      o.coarsening = 100;
      const double r = brute_force_partition(z, o).rate;
      EXPECT_LE(r, prev + 1e-12);
      prev = r;
    }
  }
}

TEST(BruteForce, ParallelMatchesSerial) {
  const auto z = zipf_distribution(0.8, 3000);
  ScopedWarningCapture quiet;
  for (std::size_t L : {2u, 3u}) {
    BruteForceOptions o;
    o.num_levels = L;
    o.memory = 150;
    o.coarsening = 30;
    const auto s = brute_force_partition(z, o);
    const auto p = brute_force_partition_parallel(z, o);
    EXPECT_EQ(s.partition, p.partition);
    EXPECT_EQ(s.rate, p.rate);
    EXPECT_EQ(s.candidates, p.candidates);
  }
}

TEST(BruteForce, BudgetIsEnforced) {
  const auto z = zipf_distribution(0.6, 10000);
  BruteForceOptions o;
  o.num_levels = 3;
  o.coarsening = 1;
  o.budget = 1000;
  EXPECT_THROW(brute_force_partition(z, o), std::invalid_argument);
}
