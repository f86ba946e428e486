#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>

#include "mlcache/diagnostics.hpp"
#include "mlcache/model.hpp"
#include "test_util.hpp"

using namespace mlcache;
using mlcache::testing::example1;

TEST(Validate, Example1IsValidAndSorted) {
  const auto c = validate(example1());
  EXPECT_EQ(c, example1());
}

TEST(Validate, ReordersLevelsByPopularity) {
  auto c = example1();
  std::swap(c.levels[0], c.levels[1]);
  EXPECT_EQ(validate(c), example1());
}

TEST(Validate, RejectsTooFewFiles) {
  SystemConfig c;
  c.num_caches = 8;
  c.levels = {{50, 9, 1}};
  EXPECT_THROW(validate(c), ValidationError);
  ScopedWarningCapture w;
  EXPECT_NO_THROW(validate(c, {.regularity_is_fatal = false}));
  EXPECT_TRUE(w.contains("50"));
}

TEST(Validate, HardErrors) {
  auto c = example1();
  c.num_caches = 0;
  EXPECT_THROW(validate(c), ValidationError);
  c = example1();
  c.memory = -1.0;
  EXPECT_THROW(validate(c), ValidationError);
  c = example1();
  c.levels.clear();
  EXPECT_THROW(validate(c), ValidationError);
  c = example1();
  c.levels[0].access_degree = 9;
  EXPECT_THROW(validate(c), ValidationError);
  c = example1();
  c.levels[1].users_per_cache = 0;
  EXPECT_THROW(validate(c), ValidationError);
  c = example1();
  c.separation_ratio = 1.0;
  EXPECT_THROW(validate(c), ValidationError);
}

TEST(Validate, SoftViolationsWarn) {
  auto c = example1();
  c.levels[0].access_degree = 3;  // 3 does not divide 8
  c.separation_ratio = 100.0;     // 9/100 vs 1/100 is only 9x
  ScopedWarningCapture w;
  EXPECT_NO_THROW(validate(c));
  EXPECT_EQ(w.messages().size(), 2u);
  EXPECT_TRUE(w.contains("divide"));
}

TEST(Validate, Idempotent) {
  RandomStream rng(1, {stream::kFuzz, 100});
  for (int k = 0; k < 200; ++k) {
    const auto c = mlcache::testing::random_config(rng);
    ScopedWarningCapture quiet;
    EXPECT_EQ(validate(c), c);
  }
}

TEST(Model, DerivedQuantities) {
  const auto c = example1();
  EXPECT_EQ(c.max_degree(), 1);
  EXPECT_DOUBLE_EQ(c.total_storage(), 200.0);
  EXPECT_DOUBLE_EQ(c.uncached_rate(), 80.0);
  EXPECT_EQ(c.total_files(), 200);
  EXPECT_TRUE(more_popular(c.levels[0], c.levels[1]));
  EXPECT_FALSE(more_popular(c.levels[1], c.levels[0]));
}

TEST(Model, PopularityOrderIsStable) {
  std::vector<LevelSpec> levels{{100, 1, 1}, {200, 2, 1}, {10, 5, 1}};
  EXPECT_EQ(popularity_order(levels), (std::vector<std::size_t>{2, 0, 1}));
}

TEST(Model, Subsystem) {
  const auto s = make_subsystem(6, {100, 2, 2}, 25.0);
  EXPECT_EQ(s.num_caches, 3);
  EXPECT_DOUBLE_EQ(s.subfile_fraction, 0.5);
}

TEST(Json, RoundTrip) {
  auto c = example1();
  c.separation_ratio = 4.0;
  nlohmann::json j = c;
  EXPECT_EQ(j["K"], 8);
  EXPECT_EQ(j["levels"][0]["U"], 9);
  EXPECT_EQ(j.get<SystemConfig>(), c);
}

TEST(Json, MalformedInputIsAValidationError) {
  EXPECT_THROW(nlohmann::json::parse(R"({"K": 8})").get<SystemConfig>(), ValidationError);
  EXPECT_THROW(nlohmann::json::parse(R"({"K": "x", "M": 1, "levels": []})").get<SystemConfig>(), ValidationError);
}

TEST(Json, LoadConfigFile) {
  const std::string path = ::testing::TempDir() + "mlcache_model_config.json";
  {
    std::ofstream f(path);
    f << R"({"K": 8, "M": 100, "levels": [{"N": 100, "U": 1, "d": 1}, {"N": 100, "U": 9, "d": 1}]})";
  }
  EXPECT_EQ(validate(load_config(path)), example1());
  std::remove(path.c_str());
  EXPECT_THROW(load_config(path), std::runtime_error);
}
