#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("rectify_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  Result run(const std::string& args) {
    const auto err = dir_ / "stderr.txt";
    const std::string cmd = std::string(RECTIFY_CLI) + " " + args + " > " + (dir_ / "stdout.txt").string() +
                            " 2> " + err.string();
    const int status = std::system(cmd.c_str());
    Result r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.err = slurp(err);
    return r;
  }

  fs::path config(const std::string& name) const { return fs::path(RECTIFY_CONFIGS) / name; }

  fs::path dir_;
};

void expect_single_error_line(const Result& r) {
  ASSERT_FALSE(r.err.empty());
  EXPECT_EQ(r.err.rfind("error: ", 0), 0u) << r.err;
  EXPECT_EQ(r.err.find('\n'), r.err.size() - 1) << r.err;
}

}  // namespace

TEST_F(Cli, SegmentConfigGivesUnitRatio) {
  const auto out = dir_ / "a";
  const auto r = run("run --config " + config("segment.toml").string() + " --out-dir " + out.string());
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* f : {"measure.json", "family.json", "hierarchy.json", "gamma.json", "gamma.svg", "jones.csv",
                        "tree.json", "labels.csv"})
    EXPECT_TRUE(fs::exists(out / f)) << f;
  const auto g = nlohmann::json::parse(slurp(out / "gamma.json"));
  EXPECT_NEAR(g.at("ratio").get<double>(), 1.0, 1e-9);
  EXPECT_TRUE(g.at("checks").at("ok").get<bool>());
}

TEST_F(Cli, RepeatedRunsAreByteIdentical) {
  for (const char* cfg : {"segment.toml", "cantor.toml", "lipschitz.toml"}) {
    const auto a = dir_ / "a", b = dir_ / "b", c = dir_ / "c";
    ASSERT_EQ(run(std::string("run --config ") + config(cfg).string() + " --out-dir " + a.string()).code, 0);
    ASSERT_EQ(run(std::string("run --config ") + config(cfg).string() + " --out-dir " + b.string()).code, 0);
    ASSERT_EQ(
        run(std::string("--threads 3 run --config ") + config(cfg).string() + " --out-dir " + c.string()).code, 0);
    std::size_t files = 0;
    for (const auto& e : fs::directory_iterator(a)) {
      const auto name = e.path().filename();
      EXPECT_EQ(slurp(a / name), slurp(b / name)) << cfg << " " << name;
      EXPECT_EQ(slurp(a / name), slurp(c / name)) << cfg << " " << name << " with threads";
      ++files;
    }
    EXPECT_GT(files, 2u);
    fs::remove_all(a);
    fs::remove_all(b);
    fs::remove_all(c);
  }
}

TEST_F(Cli, SubcommandsChain) {
  const auto m = dir_ / "m.json", f = dir_ / "f.json", g = dir_ / "g.json", svg = dir_ / "g.svg";
  ASSERT_EQ(run("gen --kind circle --n 256 --out " + m.string()).code, 0);
  ASSERT_EQ(run("family --measure " + m.string() + " --k-max 6 --check --out " + f.string()).code, 0);
  ASSERT_EQ(run("jones --measure " + m.string() + " --family " + f.string() + " --samples 10 --out " +
                (dir_ / "j.csv").string())
                .code,
            0);
  ASSERT_EQ(run("curve --measure " + m.string() + " --k-max 6 --out " + g.string()).code, 0);
  ASSERT_EQ(run("render --gamma " + g.string() + " --out " + svg.string()).code, 0);
  EXPECT_NE(slurp(svg).find("<svg"), std::string::npos);
  ASSERT_EQ(run("cones --measure " + m.string() + " --planes angles:8 --out " + (dir_ / "l.csv").string()).code, 0);
  ASSERT_EQ(run("trees --measure " + m.string() + " --k-max 10 --out " + (dir_ / "t.json").string()).code, 0);
}

TEST_F(Cli, MissingFileExitsTwoNamingThePath) {
  const std::string missing = (dir_ / "nope.toml").string();
  const auto r = run("run --config " + missing);
  EXPECT_EQ(r.code, 2);
  expect_single_error_line(r);
  EXPECT_NE(r.err.find(missing), std::string::npos);
}

TEST_F(Cli, InvalidConfigExitsTwo) {
  const auto cfg = dir_ / "bad.toml";
  std::ofstream(cfg) << "[measure]\nkind = \"segment\"\nn = 100\n[curve]\ndelta = 0.75\n";
  const auto r = run("run --config " + cfg.string() + " --out-dir " + (dir_ / "o").string());
  EXPECT_EQ(r.code, 2);
  expect_single_error_line(r);
  EXPECT_NE(r.err.find("delta"), std::string::npos);
  EXPECT_FALSE(fs::exists(dir_ / "o" / "measure.json"));

  std::ofstream(cfg) << "[measure\nkind = ";
  const auto syntax = run("run --config " + cfg.string());
  EXPECT_EQ(syntax.code, 2);
  expect_single_error_line(syntax);

  const auto flag = run("gen --kind segment --n 0 --out " + (dir_ / "m.json").string());
  EXPECT_EQ(flag.code, 2);
  expect_single_error_line(flag);

  const auto unknown = run("frobnicate");
  EXPECT_EQ(unknown.code, 2);
  expect_single_error_line(unknown);
}

TEST_F(Cli, ComputationFailureExitsOne) {
  const auto m = dir_ / "m.json";
  std::ofstream(m) << R"({"dim":2,"atoms":[[0,0],[0,0]],"weights":[1,1]})";
  const auto r = run("cones --measure " + m.string() + " --out " + (dir_ / "l.csv").string());
  EXPECT_EQ(r.code, 1);
  expect_single_error_line(r);
  EXPECT_FALSE(fs::exists(dir_ / "l.csv"));
}
