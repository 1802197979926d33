#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "oracles.hpp"
#include "phimdp/cli.hpp"
#include "phimdp/coding.hpp"
#include "phimdp/icost.hpp"
#include "phimdp/search.hpp"
#include "phimdp/trace.hpp"

using namespace phimdp;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::size_t line_count(const std::string& text) { return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')); }

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / fmt::format("phimdp_cli_{}_{}", info->name(), ::getpid());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::string write_tiny_trace(std::size_t n, std::uint64_t seed) {
    const auto h = oracle::tiny_history(n, seed);
    const auto p = path(fmt::format("tiny{}_{}.csv", n, seed));
    std::ofstream f(p);
    write_trace(f, h);
    return p;
  }

  fs::path dir_;
};

}  // namespace

TEST(SeedList, Parse) {
  EXPECT_EQ(parse_seed_list("3"), (std::vector<std::uint64_t>{3}));
  EXPECT_EQ(parse_seed_list("1-3,8"), (std::vector<std::uint64_t>{1, 2, 3, 8}));
  EXPECT_THROW(parse_seed_list("3-1"), std::invalid_argument);
  EXPECT_THROW(parse_seed_list("x"), std::invalid_argument);
  EXPECT_THROW(parse_seed_list(""), std::invalid_argument);
  EXPECT_EQ(with_seed_suffix("out/trace.csv", 7), "out/trace.seed7.csv");
}

TEST_F(CliTest, CostOfSingleStepTraceIsZero) {
  const auto h = oracle::tiny_history(1, 1);
  {
    std::ofstream f(path("one.csv"));
    write_trace(f, h);
  }
  const auto r = cli({"cost", "--trace", path("one.csv")});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "0,0,0\n");
}

TEST_F(CliTest, CostAndICostMatchLibrary) {
  const auto trace = write_tiny_trace(2000, 3);
  const auto h = load_trace(trace);
  const auto c = cost(FeatureMap(KOrderMap{2}), h);
  auto r = cli({"cost", "--trace", trace, "--phi-k", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, fmt::format("{},{},{}\n", c.state_bits, c.reward_bits, c.total));

  const auto ic = icost(FeatureMap(KOrderMap{2}), h, PenaltyMode::Full);
  r = cli({"icost", "--trace", trace, "--phi-k", "2", "--penalty", "full"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, fmt::format("{},{},{},{}\n", ic.neg_log_likelihood, ic.parameter_penalty, ic.total, ic.parameters));

  {
    std::ofstream f(path("phi.txt"));
    f << "00\n10\n01\n11\n";
  }
  r = cli({"cost", "--trace", trace, "--phi-file", path("phi.txt")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto tree = cost(FeatureMap(ContextTreeMap::full_depth(2, 2)), h);
  EXPECT_EQ(r.out, fmt::format("{},{},{}\n", tree.state_bits, tree.reward_bits, tree.total));

  EXPECT_EQ(cli({"icost", "--trace", trace, "--penalty", "half"}).code, 2);
  EXPECT_EQ(cli({"cost", "--trace", trace, "--phi-k", "1", "--phi-file", path("phi.txt")}).code, 2);
}

TEST_F(CliTest, SearchWithZeroItersEchoesInput) {
  const auto trace = write_tiny_trace(300, 4);
  {
    std::ofstream f(path("phi.txt"));
    f << "1\n0\n";
  }
  const auto r = cli({"search", "--trace", trace, "--phi-file", path("phi.txt"), "--iters", "0", "--phi-out",
                      path("best.txt"), "--log", path("log.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "0\n1\n");
  EXPECT_EQ(slurp(path("best.txt")), "0\n1\n");
  EXPECT_EQ(slurp(path("log.csv")), "iter,cost,accepted\n");
}

TEST_F(CliTest, SearchMatchesLibrary) {
  const auto trace = write_tiny_trace(1000, 5);
  const auto r = cli({"search", "--trace", trace, "--iters", "200", "--seed", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  SearchConfig cfg;
  cfg.iterations = 200;
  cfg.seed = 3;
  const auto h = load_trace(trace);
  const auto res = anneal(ContextTreeMap(2), h, cfg);
  std::ostringstream want;
  write_suffix_set(want, res.incumbent, h.alphabets().observations);
  EXPECT_EQ(r.out, want.str());
}

TEST_F(CliTest, MissingEnvFile) {
  const auto r = cli({"run", "--env", "file:" + path("nope.env"), "--steps", "5", "--out", path("t.csv"), "--metrics",
                      path("m.csv")});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("cannot open"), std::string::npos);
  EXPECT_FALSE(fs::exists(path("t.csv")));
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(cli({}).code, 2);
  EXPECT_EQ(cli({"run"}).code, 2);
  EXPECT_EQ(cli({"frobnicate"}).code, 2);
  EXPECT_EQ(cli({"run", "--env", "tiny", "--steps", "0"}).code, 2);
  EXPECT_EQ(cli({"cost", "--trace", path("absent.csv")}).code, 1);
  {
    std::ofstream f(path("bad.csv"));
    f << "t,o,a,r\n1,0,0,1\nx\n";
  }
  const auto r = cli({"cost", "--trace", path("bad.csv")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("3"), std::string::npos);
}

TEST_F(CliTest, RunWritesOneRowPerStep) {
  const auto r = cli({"run", "--env", "chain", "--steps", "100", "--seed", "2", "--out", path("t.csv"), "--metrics",
                      path("m.csv"), "--phi-out", path("phi.txt")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto metrics = slurp(path("m.csv"));
  EXPECT_EQ(line_count(metrics), 101u);
  const auto h = load_trace(path("t.csv"));
  EXPECT_EQ(h.transitions(), 100u);
  EXPECT_NO_THROW(load_suffix_set(path("phi.txt"), h.alphabets().observations));
  EXPECT_EQ(r.out.rfind("seed=2 steps=100 ", 0), 0u);
}

TEST_F(CliTest, RerunsAreByteIdentical) {
  auto run = [&](const std::string& tag) {
    const auto r = cli({"run", "--env", "tiny", "--steps", "300", "--seed", "9", "--out", path(tag + "t.csv"),
                        "--metrics", path(tag + "m.csv")});
    EXPECT_EQ(r.code, 0) << r.err;
    return slurp(path(tag + "t.csv")) + slurp(path(tag + "m.csv")) + r.out;
  };
  EXPECT_EQ(run("a"), run("b"));
}

TEST_F(CliTest, SeedListSuffixesOutputs) {
  const auto r = cli({"run", "--env", "bandit", "--steps", "20", "--seeds", "1-2", "--out", path("t.csv"), "--metrics",
                      path("m.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* f : {"t.seed1.csv", "t.seed2.csv", "m.seed1.csv", "m.seed2.csv"}) EXPECT_TRUE(fs::exists(path(f)));
  EXPECT_EQ(line_count(r.out), 2u);
}

TEST_F(CliTest, ConfigFileSuppliesDefaults) {
  {
    std::ofstream f(path("run.cfg"));
    f << "# run settings\nenv = flip\nsteps = 30\nseed=4\n";
  }
  const auto r = cli({"run", "--config", path("run.cfg"), "--steps", "12", "--out", path("t.csv"), "--metrics",
                      path("m.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(load_trace(path("t.csv")).transitions(), 12u);
  EXPECT_EQ(r.out.rfind("seed=4 ", 0), 0u);
}

TEST_F(CliTest, ExecutableRuns) {
  const auto trace = write_tiny_trace(500, 6);
  const std::string cmd = fmt::format("\"{}\" cost --trace \"{}\" --phi-k 1 > \"{}\"", PHIMDP_CLI_PATH, trace, path("o.txt"));
  ASSERT_EQ(std::system(cmd.c_str()), 0);
  const auto c = cost(FeatureMap(KOrderMap{1}), load_trace(trace));
  EXPECT_EQ(slurp(path("o.txt")), fmt::format("{},{},{}\n", c.state_bits, c.reward_bits, c.total));
  const std::string bad = fmt::format("\"{}\" run --env tiny --steps 0 2> /dev/null", PHIMDP_CLI_PATH);
  const int status = std::system(bad.c_str());
  EXPECT_EQ(WEXITSTATUS(status), 2);
}

TEST_F(CliTest, AtomicWriteLeavesNoTemporaries) {
  write_file_atomic(path("sub/out.csv"), "a,b\n1,2\n");
  write_file_atomic(path("sub/out.csv"), "a,b\n3,4\n");
  EXPECT_EQ(slurp(path("sub/out.csv")), "a,b\n3,4\n");
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(path("sub"))) {
    (void)e;
    ++files;
  }
  EXPECT_EQ(files, 1u);
}
