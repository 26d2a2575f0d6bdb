#include "ahmpc/run.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace ahmpc {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const char* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("bad value for " + key + ": '" + value + "'");
  }
  return out;
}

double parse_real(const std::string& key, const std::string& value) {
  return parse_number<double>(key, value);
}

// Shortest text that reads back to the same double.
std::string shortest(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

// Failures show up when the file is opened.
void create_parent(const std::string& path) {
  const auto parent = std::filesystem::path(path).parent_path();
  std::error_code ec;
  if (!parent.empty()) std::filesystem::create_directories(parent, ec);
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& raw) {
  const std::string value = trim(raw);
  if (key == "degree") {
    degree = parse_number<int>(key, value);
  } else if (key == "steps") {
    steps = parse_number<int>(key, value);
  } else if (key == "noise_seed") {
    if (value == "off") {
      noise_seed.reset();
    } else {
      noise_seed = parse_number<std::uint64_t>(key, value);
    }
  } else if (key == "N_init") {
    N_init = parse_number<int>(key, value);
  } else if (key == "M") {
    M = parse_number<int>(key, value);
  } else if (key == "L") {
    L = parse_number<int>(key, value);
  } else if (key == "retry_cap") {
    retry_cap = parse_number<int>(key, value);
  } else if (key == "decrement") {
    decrement = parse_number<int>(key, value);
  } else if (key == "N_min") {
    N_min = parse_number<int>(key, value);
  } else if (key == "alpha_scale") {
    alpha_scale = parse_real(key, value);
  } else if (key == "u_max") {
    u_max = parse_real(key, value);
  } else if (key == "g") {
    g = parse_real(key, value);
  } else if (key == "damping") {
    if (value == "absolute") {
      damping = DampingMode::kAbsolute;
    } else if (value == "relative") {
      damping = DampingMode::kRelative;
    } else {
      throw ConfigError("damping must be absolute or relative");
    }
  } else if (key == "x0") {
    std::stringstream ss(value);
    std::string item;
    int i = 0;
    Eigen::Vector4d v;
    while (std::getline(ss, item, ',')) {
      if (i == 4) throw ConfigError("x0 needs 4 comma-separated values");
      v[i++] = parse_real(key, trim(item));
    }
    if (i != 4) throw ConfigError("x0 needs 4 comma-separated values");
    x0 = v;
  } else if (key == "terminal_cost") {
    if (value == "completed") {
      terminal = TerminalChoice::kCompleted;
    } else if (value == "series") {
      terminal = TerminalChoice::kSeries;
    } else {
      throw ConfigError("terminal_cost must be completed or series");
    }
  } else if (key == "initial_guess") {
    if (value == "zero") {
      initial_guess = InitialGuess::kZero;
    } else if (value == "feedback") {
      initial_guess = InitialGuess::kFeedback;
    } else {
      throw ConfigError("initial_guess must be zero or feedback");
    }
  } else if (key == "solver_iterations") {
    solver_iterations = parse_number<int>(key, value);
  } else if (key == "solver_memory") {
    solver_memory = parse_number<int>(key, value);
  } else if (key == "out") {
    out = value;
  } else {
    throw ConfigError("unknown key '" + key + "'");
  }
}

void RunConfig::validate() const {
  if (degree != 1 && degree != 3 && degree != 5) {
    throw ConfigError("degree must be 1, 3 or 5, got " + std::to_string(degree));
  }
  if (steps < 0) throw ConfigError("steps must be nonnegative");
  if (solver_iterations < 1 || solver_memory < 1) {
    throw ConfigError("solver_iterations and solver_memory must be positive");
  }
  if (!x0.allFinite()) throw ConfigError("x0 must be finite");
  try {
    controller().validate();
    plant().validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

std::vector<std::pair<std::string, std::string>> RunConfig::entries() const {
  std::string x0s;
  for (int i = 0; i < 4; ++i) x0s += (i ? "," : "") + shortest(x0[i]);
  return {
      {"degree", std::to_string(degree)},
      {"steps", std::to_string(steps)},
      {"noise_seed", noise_seed ? std::to_string(*noise_seed) : "off"},
      {"N_init", std::to_string(N_init)},
      {"M", std::to_string(M)},
      {"L", std::to_string(L)},
      {"retry_cap", std::to_string(retry_cap)},
      {"decrement", std::to_string(decrement)},
      {"N_min", std::to_string(N_min)},
      {"alpha_scale", shortest(alpha_scale)},
      {"u_max", shortest(u_max)},
      {"g", shortest(g)},
      {"damping", damping == DampingMode::kAbsolute ? "absolute" : "relative"},
      {"x0", x0s},
      {"terminal_cost", terminal == TerminalChoice::kCompleted ? "completed" : "series"},
      {"initial_guess", initial_guess == InitialGuess::kZero ? "zero" : "feedback"},
      {"solver_iterations", std::to_string(solver_iterations)},
      {"solver_memory", std::to_string(solver_memory)},
      {"out", out},
  };
}

ControllerConfig RunConfig::controller() const {
  ControllerConfig c;
  c.N_init = N_init;
  c.M = M;
  c.L = L;
  c.retry_cap = retry_cap;
  c.decrement = decrement;
  c.N_min = N_min;
  c.alpha_scale = alpha_scale;
  c.u_max = u_max;
  c.initial_guess = initial_guess;
  c.solver.max_iterations = solver_iterations;
  c.solver.memory = solver_memory;
  return c;
}

PendulumParams RunConfig::plant() const {
  PendulumParams p;
  p.g = g;
  p.damping = damping;
  return p;
}

RunConfig parse_config(std::istream& is, RunConfig base) {
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    }
    base.set(trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  return base;
}

RunConfig load_config(const std::string& path, RunConfig base) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config file " + path);
  return parse_config(f, std::move(base));
}

std::pair<std::uint64_t, std::uint64_t> parse_sweep(const std::string& text) {
  const std::string prefix = "seeds=";
  const auto dots = text.find("..");
  if (text.rfind(prefix, 0) != 0 || dots == std::string::npos) {
    throw ConfigError("sweep must look like seeds=A..B");
  }
  const auto a = parse_number<std::uint64_t>("sweep", text.substr(prefix.size(), dots - prefix.size()));
  const auto b = parse_number<std::uint64_t>("sweep", text.substr(dots + 2));
  if (b < a) throw ConfigError("sweep range is empty");
  return {a, b};
}

void write_csv_preamble(std::ostream& os, const RunConfig& config) {
  for (const auto& [k, v] : config.entries()) os << "# " << k << " = " << v << '\n';
  os << kCsvHeader << '\n';
}

void write_csv_row(std::ostream& os, const StepRecord& rec) {
  const StepReport& r = rec.report;
  std::string status;
  if (r.feedback_only) {
    status = "feedback";
  } else if (r.status) {
    status = to_string(*r.status);
  } else {
    status = "solver-error";
  }
  os << rec.t;
  for (int i = 0; i < 4; ++i) os << ',' << fmt(rec.x[i]);
  for (int i = 0; i < 2; ++i) os << ',' << fmt(r.u[i]);
  os << ',' << r.N << ',' << r.resolves << ',' << status << ',' << fmt(rec.vf_end) << '\n';
}

RunSummary summarize(const SimulationLog& log, double band) {
  RunSummary s;
  s.steps = static_cast<int>(log.steps.size());
  auto in_band = [&](const Eigen::VectorXd& x) {
    return std::abs(x[0]) < band && std::abs(x[1]) < band;
  };
  if (log.final_state.size() == 4 && in_band(log.final_state)) {
    int t = s.steps;
    while (t > 0 && in_band(log.steps[static_cast<std::size_t>(t) - 1].x)) --t;
    s.time_to_stabilize = t;
  }
  for (const StepRecord& r : log.steps) {
    s.max_horizon = std::max(s.max_horizon, r.report.N);
    if (r.report.feedback_only) {
      ++s.feedback_only_steps;
      if (!s.first_zero_horizon) s.first_zero_horizon = r.t;
    } else if (s.first_zero_horizon) {
      s.max_horizon_after_zero = std::max(s.max_horizon_after_zero, r.report.N);
    }
    if (!r.report.accepted) ++s.rejected_steps;
  }
  return s;
}

std::string format_summary(const RunSummary& s) {
  auto opt = [](const std::optional<int>& v) { return v ? std::to_string(*v) : "none"; };
  return "steps=" + std::to_string(s.steps) +
         " time_to_stabilize=" + opt(s.time_to_stabilize) +
         " max_horizon=" + std::to_string(s.max_horizon) +
         " feedback_only_steps=" + std::to_string(s.feedback_only_steps) +
         " first_zero_horizon=" + opt(s.first_zero_horizon) +
         " max_horizon_after_zero=" + std::to_string(s.max_horizon_after_zero) +
         " rejected_steps=" + std::to_string(s.rejected_steps);
}

TerminalPair terminal_for(const RunConfig& config, const TerminalBuild& build) {
  TerminalPair pair = build.pair;
  if (config.terminal == TerminalChoice::kSeries) pair.V_f = build.series.V;
  return pair;
}

RunOutcome run(const RunConfig& config, std::ostream& csv) {
  RunOutcome o;
  try {
    config.validate();
  } catch (const ConfigError& e) {
    o.exit_code = 2;
    o.error = e.what();
    return o;
  }
  try {
    return run(config, build_terminal(config.degree, config.plant()), csv);
  } catch (const std::exception& e) {
    o.exit_code = 3;
    o.error = e.what();
    return o;
  }
}

RunOutcome run(const RunConfig& config, const TerminalBuild& build, std::ostream& csv) {
  RunOutcome o;
  try {
    config.validate();
  } catch (const ConfigError& e) {
    o.exit_code = 2;
    o.error = e.what();
    return o;
  }
  write_csv_preamble(csv, config);
  csv.flush();
  const TerminalPair pair = terminal_for(config, build);
  try {
    o.log = run_simulation(config.controller(), config.plant(), pair, config.x0, config.steps,
                           config.noise_seed, [&](const StepRecord& rec) {
                             if (!rec.x.allFinite()) {
                               throw NumericalError("non-finite state at step " +
                                                    std::to_string(rec.t));
                             }
                             write_csv_row(csv, rec);
                             csv.flush();
                           });
  } catch (const std::exception& e) {
    o.exit_code = 3;
    o.error = e.what();
    return o;
  }
  if (!o.log.final_state.allFinite()) {
    o.exit_code = 3;
    o.error = "non-finite final state";
  }
  o.summary = summarize(o.log);
  return o;
}

std::string sweep_path(const std::string& out, std::uint64_t seed) {
  const std::filesystem::path p(out.empty() ? "run.csv" : out);
  std::filesystem::path q = p.parent_path() /
                            (p.stem().string() + "_seed" + std::to_string(seed) +
                             (p.has_extension() ? p.extension().string() : ".csv"));
  return q.string();
}

std::vector<RunOutcome> run_sweep(const RunConfig& config, std::uint64_t first,
                                  std::uint64_t last) {
  if (last < first) throw ConfigError("sweep range is empty");
  std::vector<RunOutcome> out(static_cast<std::size_t>(last - first + 1));
  try {
    config.validate();
  } catch (const ConfigError& e) {
    for (auto& o : out) {
      o.exit_code = 2;
      o.error = e.what();
    }
    return out;
  }
  TerminalBuild build;
  try {
    build = build_terminal(config.degree, config.plant());
  } catch (const std::exception& e) {
    for (auto& o : out) {
      o.exit_code = 3;
      o.error = e.what();
    }
    return out;
  }
  const auto count = static_cast<long>(out.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (long i = 0; i < count; ++i) {
    RunConfig c = config;
    c.noise_seed = first + static_cast<std::uint64_t>(i);
    c.out = sweep_path(config.out, *c.noise_seed);
    create_parent(c.out);
    std::ofstream f(c.out);
    RunOutcome& o = out[static_cast<std::size_t>(i)];
    if (!f) {
      o.exit_code = 3;
      o.error = "cannot write " + c.out;
      continue;
    }
    o = run(c, build, f);
  }
  return out;
}

void dump_series(const std::string& dir, const TerminalBuild& build) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path d(dir);
  auto open = [&](const std::string& name) {
    std::ofstream f(d / name);
    if (!f) throw std::runtime_error("cannot write " + (d / name).string());
    return f;
  };
  {
    auto f = open("V.txt");
    write_dump(f, build.series.V);
  }
  for (std::size_t i = 0; i < build.series.kappa.size(); ++i) {
    auto f = open("kappa" + std::to_string(i + 1) + ".txt");
    write_dump(f, build.series.kappa[i]);
  }
  {
    auto f = open("W.txt");
    write_completion(f, build.completion);
  }
}

}  // namespace ahmpc
