#pragma once

// Experiment runner behind the command-line tool: configuration, CSV log,
// run summary, seed sweeps and coefficient dumps.

#include <cstdint>
#include <iosfwd>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ahmpc/controller.hpp"
#include "ahmpc/plant.hpp"
#include "ahmpc/terminal.hpp"

namespace ahmpc {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class TerminalChoice { kCompleted, kSeries };

struct RunConfig {
  int degree = 5;
  int steps = 150;
  std::optional<std::uint64_t> noise_seed;  // empty: no noise
  int N_init = 50;
  int M = 5;
  int L = 5;
  int retry_cap = 3;
  int decrement = 1;
  int N_min = 0;
  double alpha_scale = 0.1;
  double u_max = 5.0;
  double g = 9.8;
  DampingMode damping = DampingMode::kAbsolute;
  Eigen::Vector4d x0{0.9 * std::numbers::pi, 0.9 * std::numbers::pi, 0.0, 0.0};
  TerminalChoice terminal = TerminalChoice::kCompleted;
  InitialGuess initial_guess = InitialGuess::kZero;
  int solver_iterations = ControllerConfig{}.solver.max_iterations;
  int solver_memory = ControllerConfig{}.solver.memory;
  std::string out;  // empty: standard output

  // Throws ConfigError naming the key.
  void set(const std::string& key, const std::string& value);
  void validate() const;
  // Every key with its resolved value, in a fixed order; set() accepts each.
  std::vector<std::pair<std::string, std::string>> entries() const;

  ControllerConfig controller() const;
  PendulumParams plant() const;
};

// Flat `key = value` lines; '#' starts a comment. Settings are applied on
// top of `base`.
RunConfig parse_config(std::istream& is, RunConfig base = {});
RunConfig load_config(const std::string& path, RunConfig base = {});

// Inclusive seed range from "seeds=A..B".
std::pair<std::uint64_t, std::uint64_t> parse_sweep(const std::string& text);

inline constexpr const char* kCsvHeader = "t,th1,th2,om1,om2,u1,u2,N,resolves,status,Vf_end";

void write_csv_preamble(std::ostream& os, const RunConfig& config);
void write_csv_row(std::ostream& os, const StepRecord& rec);

struct RunSummary {
  int steps = 0;
  // First t from which |(th1, th2)|_inf < 0.1 through the final state.
  std::optional<int> time_to_stabilize;
  int max_horizon = 0;
  int feedback_only_steps = 0;
  std::optional<int> first_zero_horizon;
  // Largest horizon used after the first feedback-only step.
  int max_horizon_after_zero = 0;
  int rejected_steps = 0;  // applied controls whose conditions failed
};

RunSummary summarize(const SimulationLog& log, double band = 0.1);
std::string format_summary(const RunSummary& s);

// Pair used by a run: the completed cost, or the raw series cost.
TerminalPair terminal_for(const RunConfig& config, const TerminalBuild& build);

struct RunOutcome {
  int exit_code = 0;  // 0 ok, 2 configuration error, 3 numerical failure
  std::string error;
  SimulationLog log;
  RunSummary summary;
};

// Rows are flushed as they are produced, so a failed run leaves a partial log.
RunOutcome run(const RunConfig& config, std::ostream& csv);
RunOutcome run(const RunConfig& config, const TerminalBuild& build, std::ostream& csv);

// One CSV per seed, <stem>_seed<k><ext> next to config.out. Runs in parallel.
std::vector<RunOutcome> run_sweep(const RunConfig& config, std::uint64_t first,
                                  std::uint64_t last);
std::string sweep_path(const std::string& out, std::uint64_t seed);

// V.txt, kappa1.txt, kappa2.txt (series) and W.txt (completion, with its
// eigen-decomposition as header lines) in dir, created if missing.
void dump_series(const std::string& dir, const TerminalBuild& build);

}  // namespace ahmpc
