#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "mlcache/cli.hpp"

namespace fs = std::filesystem;
using mlcache::cli::run;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result call(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("mlcache_cli_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                                        "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
    write("example1.json", R"({"K": 8, "M": 100, "levels": [{"N": 100, "U": 9, "d": 1}, {"N": 100, "U": 1, "d": 1}]})");
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write(const std::string& name, const std::string& body) {
    const auto p = (dir_ / name).string();
    std::ofstream(p) << body;
    return p;
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

std::size_t data_rows(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  std::size_t n = 0;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (header) {
      header = false;
      continue;
    }
    ++n;
  }
  return n;
}

}  // namespace

TEST(Format, NineSignificantDigits) {
  EXPECT_EQ(mlcache::cli::format_number(5.69961234567), "5.69961235");
  EXPECT_EQ(mlcache::cli::format_number(80.0), "80");
  EXPECT_EQ(mlcache::cli::format_number(1e-12), "1e-12");
}

TEST_F(CliTest, PamaSummary) {
  const auto summary = path("summary.json");
  const auto r = call({"pama", "--config", path("example1.json"), "--summary", summary});
  ASSERT_EQ(r.code, 0) << r.err;
  nlohmann::json j;
  std::ifstream(summary) >> j;
  EXPECT_NEAR(j["shares"][0].get<double>(), 75.0, 1e-9);
  EXPECT_NEAR(j["shares"][1].get<double>(), 25.0, 1e-9);
  EXPECT_NEAR(j["R_closed"].get<double>(), 6.0, 1e-9);
  EXPECT_NEAR(j["R_exact"].get<double>(), 5.6996, 1e-3);
  EXPECT_EQ(data_rows(r.out), 2u);
}

TEST_F(CliTest, SweepRowCount) {
  const auto r = call({"sweep", "--config", path("example1.json"), "--m", "0:250:100"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(data_rows(r.out), 100u);
  EXPECT_EQ(r.out.rfind("M,R_exact,R_closed", r.out.find("\nM,") + 1), r.out.find("\nM,") + 1);
}

TEST_F(CliTest, OutFileMatchesStdout) {
  const auto a = call({"sweep", "--config", path("example1.json"), "--m", "0:200:11"});
  const auto b = call({"sweep", "--config", path("example1.json"), "--m", "0:200:11", "--out", path("o.csv")});
  ASSERT_EQ(b.code, 0);
  std::stringstream f;
  f << std::ifstream(path("o.csv")).rdbuf();
  EXPECT_EQ(f.str(), a.out);
}

TEST_F(CliTest, ExitCodes) {
  EXPECT_EQ(call({}).code, 64);
  EXPECT_EQ(call({"frobnicate"}).code, 64);
  EXPECT_EQ(call({"sweep", "--config", path("example1.json"), "--bogus"}).code, 64);
  EXPECT_EQ(call({"sweep", "--config", path("example1.json"), "--m", "5:1:3"}).code, 2);
  const auto bad = write("bad.json", R"({"K": 0, "levels": [{"N": 10, "U": 1, "d": 1}]})");
  EXPECT_EQ(call({"pama", "--config", bad}).code, 2);
  const auto degree = write("deg.json", R"({"K": 2, "levels": [{"N": 10, "U": 1, "d": 3}]})");
  EXPECT_EQ(call({"rate", "--config", degree}).code, 2);
  const auto missing = call({"pama", "--config", path("nope.json")});
  EXPECT_TRUE(missing.code == 2 || missing.code == 3);
  EXPECT_FALSE(missing.err.empty());
}

TEST_F(CliTest, BoundsAndGap) {
  const auto b = call({"bounds", "--config", path("example1.json"), "--m", "1:199:5"});
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_EQ(data_rows(b.out), 5u);
  const auto g = call({"gap", "--config", path("example1.json")});
  ASSERT_EQ(g.code, 0) << g.err;
  EXPECT_EQ(data_rows(g.out), 50u);
  EXPECT_NE(g.out.find("# max_ratio="), std::string::npos);
}

TEST_F(CliTest, SimulateDeterministic) {
  const std::vector<std::string> args{"simulate", "--config", path("example1.json"), "--mode", "bit-exact",
                                      "--bits", "1024", "--seed", "7", "--trials", "2"};
  const auto a = call(args);
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, call(args).out);
  EXPECT_NE(a.out.find("seed=7"), std::string::npos);
}

TEST_F(CliTest, PopularityPipeline) {
  std::string counts = "id,count\n";
  for (int k = 1; k <= 300; ++k) counts += std::to_string(k) + "," + std::to_string(100000 / k) + "\n";
  const auto file = write("counts.csv", counts);
  const auto d = call({"discretize", "--counts", file, "--caches", "5", "--users", "50", "--levels", "2",
                       "--memory", "20"});
  ASSERT_EQ(d.code, 0) << d.err;
  const auto j = nlohmann::json::parse(d.out);
  EXPECT_EQ(j["K"].get<int>(), 5);
  EXPECT_EQ(j["levels"].size(), 2u);

  const auto s = call({"simulate", "--counts", file, "--caches", "5", "--users", "50", "--levels", "2",
                       "--memory", "20", "--trials", "5", "--seed", "3"});
  ASSERT_EQ(s.code, 0) << s.err;
  EXPECT_EQ(data_rows(s.out), 5u);
  EXPECT_EQ(s.out, call({"simulate", "--counts", file, "--caches", "5", "--users", "50", "--levels", "2",
                         "--memory", "20", "--trials", "5", "--seed", "3"}).out);
}
