#include "ahmpc/run.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

namespace ahmpc {
namespace {

namespace fs = std::filesystem;

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  for (std::string l; std::getline(ss, l);) out.push_back(l);
  return out;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string f; std::getline(ss, f, sep);) out.push_back(f);
  return out;
}

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("ahmpc_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

TEST(RunConfig, DefaultsMatchExperiment) {
  const RunConfig c;
  EXPECT_EQ(c.degree, 5);
  EXPECT_EQ(c.steps, 150);
  EXPECT_FALSE(c.noise_seed);
  EXPECT_NEAR(c.x0[0], 0.9 * 3.141592653589793, 1e-15);
  EXPECT_EQ(c.x0[2], 0);
  const ControllerConfig cc = c.controller();
  EXPECT_EQ(cc.N_init, 50);
  EXPECT_EQ(cc.M, 5);
  EXPECT_EQ(cc.L, 5);
  EXPECT_EQ(cc.retry_cap, 3);
  EXPECT_EQ(cc.u_max, 5);
  EXPECT_EQ(cc.alpha_scale, 0.1);
  EXPECT_NO_THROW(c.validate());
}

TEST(RunConfig, ParsesFileWithComments) {
  std::istringstream in(
      "# experiment\n"
      "degree = 3\n"
      "\n"
      "steps=20   # short\n"
      "noise_seed = 42\n"
      "damping = relative\n"
      "x0 = 0.1, 0.2, 0, -0.5\n"
      "alpha_scale = 0.05\n");
  const RunConfig c = parse_config(in);
  EXPECT_EQ(c.degree, 3);
  EXPECT_EQ(c.steps, 20);
  ASSERT_TRUE(c.noise_seed);
  EXPECT_EQ(*c.noise_seed, 42u);
  EXPECT_EQ(c.damping, DampingMode::kRelative);
  EXPECT_EQ(c.x0, Eigen::Vector4d(0.1, 0.2, 0, -0.5));
  EXPECT_EQ(c.alpha_scale, 0.05);
}

TEST(RunConfig, RejectsUnknownKeysAndBadValues) {
  for (const char* text : {"bogus = 1\n", "degree = five\n", "steps = 3.5\n", "x0 = 1,2,3\n",
                           "damping = viscous\n", "just a line\n", "noise_seed = -1\n",
                           "u_max = 5x\n"}) {
    std::istringstream in(text);
    EXPECT_THROW(parse_config(in), ConfigError) << text;
  }
}

TEST(RunConfig, ValidationCatchesRanges) {
  for (auto bad : std::vector<std::pair<std::string, std::string>>{
           {"degree", "2"}, {"steps", "-1"}, {"M", "0"}, {"L", "0"}, {"retry_cap", "-1"},
           {"alpha_scale", "0"}, {"u_max", "0"}, {"g", "-9.8"}, {"solver_iterations", "0"}}) {
    RunConfig c;
    c.set(bad.first, bad.second);
    EXPECT_THROW(c.validate(), ConfigError) << bad.first;
  }
}

TEST(RunConfig, EchoReadsBackToSameConfig) {
  RunConfig c;
  c.set("degree", "1");
  c.set("noise_seed", "7");
  c.set("g", "9.81");
  c.set("x0", "0.3,-0.1,0.01,0");
  c.set("out", "runs/x.csv");
  std::ostringstream echo;
  write_csv_preamble(echo, c);
  std::string stripped;
  for (const std::string& l : lines(echo.str())) {
    if (l.rfind("# ", 0) == 0) stripped += l.substr(2) + "\n";
  }
  std::istringstream in(stripped);
  const RunConfig back = parse_config(in);
  EXPECT_EQ(back.entries(), c.entries());
  EXPECT_EQ(lines(echo.str()).back(), kCsvHeader);
}

TEST(RunConfig, SweepSpec) {
  using Range = std::pair<std::uint64_t, std::uint64_t>;
  EXPECT_EQ(parse_sweep("seeds=1..10"), Range(1, 10));
  EXPECT_EQ(parse_sweep("seeds=4..4"), Range(4, 4));
  EXPECT_THROW(parse_sweep("seeds=5..4"), ConfigError);
  EXPECT_THROW(parse_sweep("1..4"), ConfigError);
  EXPECT_THROW(parse_sweep("seeds=1-4"), ConfigError);
  EXPECT_EQ(sweep_path("out/noisy.csv", 3), (fs::path("out") / "noisy_seed3.csv").string());
  EXPECT_EQ(sweep_path("", 2), "run_seed2.csv");
}

SimulationLog synthetic_log(const std::vector<double>& th, const std::vector<int>& N,
                            const std::vector<bool>& feedback) {
  SimulationLog log;
  for (std::size_t t = 0; t < N.size(); ++t) {
    StepRecord r;
    r.t = static_cast<int>(t);
    r.x = Eigen::Vector4d(th[t], -th[t], 0, 0);
    r.report.N = N[t];
    r.report.feedback_only = feedback[t];
    r.report.accepted = true;
    log.steps.push_back(r);
  }
  log.final_state = Eigen::Vector4d(th.back(), 0, 0, 0);
  return log;
}

TEST(Summary, HandComputedExample) {
  // States t=0..5 and final; the band is entered for good at t=3.
  const SimulationLog log = synthetic_log({1.0, 0.05, 0.2, 0.09, 0.01, 0.0, 0.02},
                                          {7, 6, 5, 0, 5, 4}, {false, false, false, true, false, false});
  const RunSummary s = summarize(log);
  EXPECT_EQ(s.steps, 6);
  ASSERT_TRUE(s.time_to_stabilize);
  EXPECT_EQ(*s.time_to_stabilize, 3);
  EXPECT_EQ(s.max_horizon, 7);
  EXPECT_EQ(s.feedback_only_steps, 1);
  ASSERT_TRUE(s.first_zero_horizon);
  EXPECT_EQ(*s.first_zero_horizon, 3);
  EXPECT_EQ(s.max_horizon_after_zero, 5);
  EXPECT_EQ(s.rejected_steps, 0);

  const SimulationLog never = synthetic_log({0.0, 0.5}, {3}, {false});
  EXPECT_FALSE(summarize(never).time_to_stabilize);
  const std::string text = format_summary(summarize(never));
  EXPECT_NE(text.find("time_to_stabilize=none"), std::string::npos);
}

class RunFixture : public ::testing::Test {
 protected:
  static void SetUpTestSuite() { build_ = new TerminalBuild(build_terminal(5)); }
  static void TearDownTestSuite() {
    delete build_;
    build_ = nullptr;
  }
  static TerminalBuild* build_;
};
TerminalBuild* RunFixture::build_ = nullptr;

TEST_F(RunFixture, ZeroStepsWritesHeaderOnly) {
  RunConfig c;
  c.steps = 0;
  std::ostringstream csv;
  const RunOutcome o = run(c, *build_, csv);
  EXPECT_EQ(o.exit_code, 0);
  const auto ls = lines(csv.str());
  ASSERT_FALSE(ls.empty());
  EXPECT_EQ(ls.back(), kCsvHeader);
  for (std::size_t i = 0; i + 1 < ls.size(); ++i) EXPECT_EQ(ls[i][0], '#');
  EXPECT_EQ(o.summary.steps, 0);
}

TEST_F(RunFixture, CsvRowsFollowSchema) {
  RunConfig c;
  c.steps = 12;
  c.N_init = 3;
  c.x0 = Eigen::Vector4d(0.05, -0.03, 0, 0);
  c.noise_seed = 5;
  std::ostringstream csv;
  const RunOutcome o = run(c, *build_, csv);
  ASSERT_EQ(o.exit_code, 0) << o.error;
  std::vector<std::string> rows;
  for (const auto& l : lines(csv.str())) {
    if (l[0] != '#') rows.push_back(l);
  }
  ASSERT_EQ(rows.size(), 13u);
  EXPECT_EQ(rows[0], kCsvHeader);
  for (int t = 0; t < 12; ++t) {
    const auto f = split(rows[t + 1], ',');
    ASSERT_EQ(f.size(), 11u);
    EXPECT_EQ(std::stoi(f[0]), t);
    const StepRecord& r = o.log.steps[t];
    for (int i = 0; i < 4; ++i) EXPECT_EQ(std::stod(f[1 + i]), r.x[i]);  // 17 digits round-trip
    for (int i = 0; i < 2; ++i) EXPECT_EQ(std::stod(f[5 + i]), r.report.u[i]);
    EXPECT_EQ(std::stoi(f[7]), r.report.N);
    EXPECT_EQ(std::stoi(f[8]), r.report.resolves);
    EXPECT_EQ(f[9], r.report.feedback_only ? "feedback" : to_string(*r.report.status));
    EXPECT_EQ(std::stod(f[10]), r.vf_end);
  }
  EXPECT_EQ(o.log.steps[3].report.N, 0);
  EXPECT_EQ(split(rows[4], ',')[9], "feedback");
}

TEST_F(RunFixture, IdenticalConfigGivesIdenticalBytes) {
  RunConfig c;
  c.steps = 30;
  c.noise_seed = 9;
  std::ostringstream a, b;
  ASSERT_EQ(run(c, *build_, a).exit_code, 0);
  ASSERT_EQ(run(c, *build_, b).exit_code, 0);
  EXPECT_EQ(a.str(), b.str());
}

TEST_F(RunFixture, InvalidConfigExitsTwoWithoutOutput) {
  RunConfig c;
  c.degree = 2;
  std::ostringstream csv;
  const RunOutcome o = run(c, csv);
  EXPECT_EQ(o.exit_code, 2);
  EXPECT_NE(o.error.find("degree"), std::string::npos);
  EXPECT_TRUE(csv.str().empty());
}

TEST_F(RunFixture, SeriesTerminalCostSwapsOnlyTheCost) {
  RunConfig c;
  c.terminal = TerminalChoice::kSeries;
  const TerminalPair p = terminal_for(c, *build_);
  EXPECT_EQ(p.V_f.max_degree(), 6);
  EXPECT_EQ(terminal_for(RunConfig{}, *build_).V_f.max_degree(), 10);
  EXPECT_EQ(p.kappa.size(), 2u);
}

TEST_F(RunFixture, SweepWritesOneLogPerSeedMatchingSingleRuns) {
  const fs::path dir = scratch_dir("sweep");
  RunConfig c;
  c.steps = 8;
  c.N_init = 4;
  c.x0 = Eigen::Vector4d(0.1, 0, 0, 0);
  c.out = (dir / "noisy.csv").string();
  const auto outcomes = run_sweep(c, 3, 5);
  ASSERT_EQ(outcomes.size(), 3u);
  for (std::uint64_t seed = 3; seed <= 5; ++seed) {
    EXPECT_EQ(outcomes[seed - 3].exit_code, 0);
    const std::string path = sweep_path(c.out, seed);
    std::ifstream f(path);
    ASSERT_TRUE(f) << path;
    std::stringstream got;
    got << f.rdbuf();
    RunConfig single = c;
    single.noise_seed = seed;
    single.out = path;
    std::ostringstream expected;
    run(single, *build_, expected);
    EXPECT_EQ(got.str(), expected.str());
  }
  fs::remove_all(dir);
}

TEST_F(RunFixture, DumpSeriesRoundTrips) {
  const fs::path dir = scratch_dir("dump");
  dump_series(dir.string(), *build_);
  auto read = [&](const std::string& name) {
    std::ifstream f(dir / name);
    EXPECT_TRUE(f) << name;
    return read_dump(f);
  };
  EXPECT_EQ(max_coeff_diff(read("V.txt"), build_->series.V), 0.0);
  EXPECT_EQ(max_coeff_diff(read("kappa1.txt"), build_->series.kappa[0]), 0.0);
  EXPECT_EQ(max_coeff_diff(read("kappa2.txt"), build_->series.kappa[1]), 0.0);
  EXPECT_EQ(max_coeff_diff(read("W.txt"), build_->completion.W), 0.0);
  std::ifstream w(dir / "W.txt");
  std::string first;
  std::getline(w, first);
  EXPECT_EQ(first.rfind("lambda = ", 0), 0u);
  fs::remove_all(dir);
}

// The command-line binary itself: exit codes and outputs.
int cli(const std::string& args) {
  const int rc = std::system((std::string(AHMPC_CLI) + " " + args).c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

TEST(Cli, ExitCodes) {
  const fs::path dir = scratch_dir("cli");
  EXPECT_EQ(cli("--degree 2 > /dev/null 2>&1"), 2);
  EXPECT_EQ(cli("--set nonsense=1 > /dev/null 2>&1"), 2);
  EXPECT_EQ(cli("--steps many > /dev/null 2>&1"), 2);
  EXPECT_EQ(cli("--no-such-flag > /dev/null 2>&1"), 2);
  EXPECT_EQ(cli("--config " + (dir / "missing.cfg").string() + " > /dev/null 2>&1"), 2);
  EXPECT_EQ(cli("--sweep seeds=3..1 > /dev/null 2>&1"), 2);
  EXPECT_EQ(cli("--steps 0 --out " + (dir / "empty.csv").string() + " > /dev/null"), 0);
  // A blown-up state stops the run; the rows written so far stay on disk.
  const std::string partial = (dir / "partial.csv").string();
  EXPECT_EQ(cli("--set x0=1e200,0,1e200,0 --set N_init=2 --steps 3 --out " + partial +
                " > /dev/null 2>&1"),
            3);
  std::ifstream p(partial);
  std::stringstream ptext;
  ptext << p.rdbuf();
  EXPECT_EQ(lines(ptext.str()).back().substr(0, 2), "0,");
  std::ifstream f(dir / "empty.csv");
  std::string last, l;
  while (std::getline(f, l)) last = l;
  EXPECT_EQ(last, kCsvHeader);
  fs::remove_all(dir);
}

TEST(Cli, FlagsOverrideConfigFile) {
  const fs::path dir = scratch_dir("cli_cfg");
  {
    std::ofstream cfg(dir / "run.cfg");
    cfg << "degree = 1\nsteps = 3\nN_init = 2\nx0 = 0.01,0,0,0\nnoise_seed = 4\n";
  }
  const std::string out = (dir / "log.csv").string();
  ASSERT_EQ(cli("--config " + (dir / "run.cfg").string() + " --steps 2 --noise-seed off --out " +
                out + " > " + (dir / "summary.txt").string()),
            0);
  std::ifstream f(out);
  std::stringstream text;
  text << f.rdbuf();
  const auto ls = lines(text.str());
  EXPECT_NE(std::find(ls.begin(), ls.end(), "# degree = 1"), ls.end());
  EXPECT_NE(std::find(ls.begin(), ls.end(), "# steps = 2"), ls.end());
  EXPECT_NE(std::find(ls.begin(), ls.end(), "# noise_seed = off"), ls.end());
  EXPECT_EQ(ls.back().substr(0, 2), "1,");
  std::ifstream s(dir / "summary.txt");
  std::string summary;
  std::getline(s, summary);
  EXPECT_EQ(summary.rfind("steps=2 ", 0), 0u);
  fs::remove_all(dir);
}

TEST(Cli, DumpSeriesWritesFiles) {
  const fs::path dir = scratch_dir("cli_dump");
  ASSERT_EQ(cli("--degree 3 --dump-series " + (dir / "d3").string()), 0);
  for (const char* name : {"V.txt", "kappa1.txt", "kappa2.txt", "W.txt"}) {
    EXPECT_TRUE(fs::exists(dir / "d3" / name)) << name;
  }
  std::ifstream f(dir / "d3" / "W.txt");
  EXPECT_EQ(read_dump(f).max_degree(), 6);
  fs::remove_all(dir);
}

}  // namespace
}  // namespace ahmpc
