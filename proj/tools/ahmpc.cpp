// Command-line simulator: builds the terminal pair, runs the closed loop on
// the double pendulum and writes the per-step CSV log and a summary line.

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "ahmpc/run.hpp"

namespace {

int main_impl(int argc, char** argv) {
  CLI::App app{"Adaptive horizon MPC on the double pendulum"};
  std::string config_path, degree, steps, noise, out, sweep, dump_dir;
  std::vector<std::string> settings;
  app.add_option("--config", config_path, "flat key = value file");
  app.add_option("--degree", degree, "terminal feedback degree: 1, 3 or 5");
  app.add_option("--steps", steps, "closed-loop steps");
  app.add_option("--noise-seed", noise, "state noise seed, or off");
  app.add_option("--out", out, "CSV path (default: standard output)");
  app.add_option("--sweep", sweep, "seeds=A..B: one noisy run per seed, in parallel");
  app.add_option("--dump-series", dump_dir, "write V, kappa and W coefficient files and exit");
  app.add_option("--set", settings, "key=value, any config key");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  ahmpc::RunConfig config;
  try {
    if (!config_path.empty()) config = ahmpc::load_config(config_path);
    for (const std::string& s : settings) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw ahmpc::ConfigError("--set expects key=value");
      config.set(s.substr(0, eq), s.substr(eq + 1));
    }
    if (!degree.empty()) config.set("degree", degree);
    if (!steps.empty()) config.set("steps", steps);
    if (!noise.empty()) config.set("noise_seed", noise);
    if (!out.empty()) config.set("out", out);
    config.validate();
  } catch (const ahmpc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  }

  if (!dump_dir.empty()) {
    try {
      ahmpc::dump_series(dump_dir, ahmpc::build_terminal(config.degree, config.plant()));
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return 3;
    }
    return 0;
  }

  if (!sweep.empty()) {
    std::pair<std::uint64_t, std::uint64_t> range;
    try {
      range = ahmpc::parse_sweep(sweep);
    } catch (const ahmpc::ConfigError& e) {
      std::cerr << "config error: " << e.what() << '\n';
      return 2;
    }
    const auto outcomes = ahmpc::run_sweep(config, range.first, range.second);
    int code = 0;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
      const auto& o = outcomes[i];
      const std::uint64_t seed = range.first + i;
      if (o.exit_code != 0) {
        std::cerr << "seed " << seed << ": error: " << o.error << '\n';
        code = std::max(code, o.exit_code);
      } else {
        std::cout << "seed=" << seed << ' ' << ahmpc::format_summary(o.summary) << '\n';
      }
    }
    return code;
  }

  std::ofstream file;
  if (!config.out.empty()) {
    const auto parent = std::filesystem::path(config.out).parent_path();
    std::error_code ec;
    if (!parent.empty()) std::filesystem::create_directories(parent, ec);
    file.open(config.out);
    if (!file) {
      std::cerr << "error: cannot write " << config.out << '\n';
      return 3;
    }
  }
  std::ostream& csv = config.out.empty() ? std::cout : file;
  std::ostream& log = config.out.empty() ? std::cerr : std::cout;
  const ahmpc::RunOutcome o = ahmpc::run(config, csv);
  if (o.exit_code != 0) {
    std::cerr << (o.exit_code == 2 ? "config error: " : "error: ") << o.error << '\n';
    return o.exit_code;
  }
  log << ahmpc::format_summary(o.summary) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) { return main_impl(argc, argv); }
