#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "auxbo/io.hpp"

namespace fs = std::filesystem;
using namespace auxbo;

namespace {

struct Result {
  int code = -1;
  std::string out;
};

Result run(const std::string& args) {
  const std::string cmd = std::string(AUXBO_BIN) + " " + args + " 2>&1";
  Result r;
  FILE* p = popen(cmd.c_str(), "r");
  std::array<char, 4096> buf;
  while (std::size_t n = std::fread(buf.data(), 1, buf.size(), p)) r.out.append(buf.data(), n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("auxbo_cli_test_" + name);
  fs::remove_all(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t count_lines(const fs::path& p) {
  const std::string s = slurp(p);
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

const std::string kFast = " --pool-size 200 --n-mc 10 --arch mlp:16x2 --ensemble-size 3 --epochs-scratch 50 --epochs-cont 5 ";

}  // namespace

TEST(Cli, GpSmokeRun) {
  const auto d = fresh_dir("gp");
  const auto r = run("run --task branin --surrogate gp --acq ei --iters 50 --trials 3 --seed 7 --pool-size 1000 --out " + d.string());
  ASSERT_EQ(r.code, 0) << r.out;
  for (int t = 0; t < 3; ++t) {
    const fs::path f = d / ("trial_00" + std::to_string(t) + ".csv");
    ASSERT_TRUE(fs::exists(f));
    EXPECT_EQ(count_lines(f), 51u);
  }
  EXPECT_TRUE(fs::exists(d / "summary.json"));
  EXPECT_EQ(count_lines(d / "ybest_vs_N.csv"), 51u);
}

TEST(Cli, MissingArgumentsExit2) {
  EXPECT_EQ(run("run --surrogate gp --seed 1 --out /tmp/x").code, 2);
  const auto r = run("run --task branin --surrogate gp --out /tmp/x");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("--seed"), std::string::npos);
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("frobnicate").code, 2);
}

TEST(Cli, InvalidCombinationsExit2) {
  const auto d = fresh_dir("bad");
  EXPECT_EQ(run("run --task np-narrowband --surrogate gp-aux --seed 1 --out " + d.string()).code, 2);
  EXPECT_EQ(run("run --task branin --surrogate ensemble --acq ei --seed 1 --out " + d.string()).code, 2);
  EXPECT_EQ(run("run --task pc-a --surrogate ensemble --seed 1 --out " + d.string()).code, 2);
  EXPECT_EQ(run("run --task branin --surrogate ensemble --augment --seed 1 --out " + d.string()).code, 2);
  EXPECT_EQ(run("run --task branin --surrogate gp --iters 3 --seed 1 --out " + d.string()).code, 2);
  EXPECT_EQ(run("run --task pc-a --surrogate random --seed 1 --dos-pool /nonexistent --out " + d.string()).code, 1);
}

TEST(Cli, EnsembleAuxOnIdentityTask) {
  const auto d = fresh_dir("aux");
  const auto r = run("run --task branin --surrogate ensemble-aux --iters 8 --seed 2" + kFast + "--out " + d.string());
  EXPECT_EQ(r.code, 0) << r.out;
}

TEST(Cli, OutputDirMustBeEmpty) {
  const auto d = fresh_dir("nonempty");
  fs::create_directories(d);
  std::ofstream(d / "keep.txt") << "x";
  const std::string base = "run --task branin --surrogate random --iters 10 --seed 1 --out " + d.string();
  EXPECT_EQ(run(base).code, 2);
  EXPECT_EQ(run(base + " --force").code, 0);
}

TEST(Cli, OutputsRoundTripAndReplay) {
  const auto d = fresh_dir("replay"), e = fresh_dir("replay2");
  ASSERT_EQ(run("run --task branin --surrogate ensemble --iters 9 --trials 2 --seed 5 --no-timing --checkpoints 5,9" + kFast +
                "--out " + d.string())
                .code,
            0);
  std::ifstream in(d / "trial_001.csv");
  const RunTrace t = io::read_trace_csv(in, 5);
  EXPECT_EQ(t.size(), 9u);
  io::json summary;
  std::ifstream(d / "summary.json") >> summary;
  EXPECT_EQ(summary["checkpoints"].size(), 2u);
  EXPECT_EQ(summary["checkpoints"][1]["N"], 9);
  EXPECT_NO_THROW(io::config_from_json(summary["config"]));
  ASSERT_EQ(run("run --replay " + (d / "summary.json").string() + " --out " + e.string()).code, 0);
  for (const char* f : {"trial_000.csv", "trial_001.csv", "trial_000_acq.csv", "ybest_vs_N.csv"})
    EXPECT_EQ(slurp(d / f), slurp(e / f)) << f;
}

TEST(Cli, ConfigFile) {
  const auto d = fresh_dir("config");
  fs::create_directories(d);
  const fs::path cfg = d / "exp.toml";
  std::ofstream(cfg) << "task = \"branin\"\nsurrogate = \"random\"\niters = 12\nseed = 4\nout = \"" << (d / "out").string() << "\"\n";
  EXPECT_EQ(run("run --config " + cfg.string()).code, 0);
  EXPECT_EQ(count_lines(d / "out" / "trial_000.csv"), 13u);
  std::ofstream(cfg) << "task = \"branin\"\nsurrogate = \"random\"\nitres = 12\nseed = 4\n";
  EXPECT_EQ(run("run --config " + cfg.string() + " --out " + (d / "out2").string()).code, 2);
}

TEST(Cli, Validate) {
  const auto all = run("validate");
  EXPECT_EQ(all.code, 0) << all.out;
  EXPECT_NE(all.out.find("all checks passed"), std::string::npos);
  EXPECT_EQ(run("validate --suite mei").code, 2);
  EXPECT_EQ(run("validate --suite gp").code, 0);
}

TEST(Cli, Oracle) {
  const auto b = run("oracle --task branin --x 3.141592653589793,2.275");
  EXPECT_EQ(b.code, 0);
  EXPECT_EQ(b.out.find("z:"), std::string::npos);
  EXPECT_NE(b.out.find("y = -0.3978"), std::string::npos) << b.out;

  const auto d = fresh_dir("oracle");
  fs::create_directories(d);
  const auto np = run("oracle --task np-narrowband --x 40,55,60,30,70,45 --dump " + (d / "s.csv").string());
  EXPECT_EQ(np.code, 0) << np.out;
  EXPECT_EQ(count_lines(d / "s.csv"), 202u);
  EXPECT_EQ(slurp(d / "s.csv").substr(0, 16), "lambda_nm,sigma\n");

  std::string x = "0.1";
  for (int k = 1; k < 51; ++k) x += ",0.1";
  const auto pc = run("oracle --task pc-a --x " + x + " --dos synthetic --dump " + (d / "d.csv").string());
  EXPECT_EQ(pc.code, 0) << pc.out;
  EXPECT_EQ(count_lines(d / "d.csv"), 501u);
  EXPECT_NE(slurp(d / "d.csv").find(",synthetic-fixture\n"), std::string::npos);

  EXPECT_EQ(run("oracle --task np-narrowband --x 40,55,60").code, 2);
  EXPECT_EQ(run("oracle --task branin --x 1,2,3").code, 2);
}
