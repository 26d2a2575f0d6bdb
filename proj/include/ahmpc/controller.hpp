#pragma once

// Adaptive horizon MPC: solve at horizon N, extend the predicted trajectory M
// steps under the terminal feedback, and accept the solve only if the
// feasibility and Lyapunov conditions hold along the extension. Otherwise the
// horizon grows by L and the problem is solved again.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ahmpc/ocp.hpp"
#include "ahmpc/plant.hpp"
#include "ahmpc/system.hpp"

namespace ahmpc {

struct TerminalPair {
  int degree = 1;
  PolyBundle V_f;                 // degrees 2..2d
  std::vector<PolyBundle> kappa;  // m rows, degrees 1..d

  Eigen::VectorXd feedback(const Eigen::VectorXd& x) const { return eval_map<double>(kappa, x); }
  double cost(const Eigen::VectorXd& x) const { return eval(V_f, x); }
};

enum class InitialGuess { kZero, kFeedback };

struct ControllerConfig {
  int N_init = 50;
  int M = 5;
  int L = 5;
  int retry_cap = 3;
  int decrement = 1;
  int N_min = 0;
  double alpha_scale = 0.1;  // alpha(s) = alpha_scale * s^2
  double u_max = 5.0;
  InitialGuess initial_guess = InitialGuess::kZero;
  // Swing-up solves from a zero guess need far more than the generic cap.
  SolverOptions solver{.max_iterations = 3000, .memory = 20};
  std::function<bool(const Eigen::VectorXd&)> state_predicate;
  std::function<bool(const Eigen::VectorXd&, const Eigen::VectorXd&)> mixed_predicate;

  double alpha(double s) const { return alpha_scale * s * s; }
  void validate() const;
};

enum class Condition { kNone, kCf, kSf, kScf, kL1, kL2, kNonFinite, kSolver };

std::string to_string(Condition c);

struct ConditionCheck {
  bool pass = true;
  Condition kind = Condition::kNone;
  int k = -1;                  // absolute time index of the first violation
  std::vector<double> vf;      // V_f along the extension, M+1 values
  int alpha_warnings = 0;      // points where alpha(|x|) >= l(x, kappa(x)) / 2
};

// x_N, f(x_N, k(x_N)), ... : M+1 states. Stops early (shorter result) if the
// state becomes non-finite.
std::vector<Eigen::VectorXd> extend_trajectory(const Eigen::VectorXd& x_N,
                                               const TerminalPair& pair, int M,
                                               const ControlSystem<>& dynamics);

// Checks (cf), (sf), (scf), (L1), (L2) at each extension index, in that
// order; k_offset is the time index of the first extension state. The
// Lagrangian is only used for the alpha diagnostic and may be null.
ConditionCheck check_conditions(const std::vector<Eigen::VectorXd>& extension, int M,
                                const TerminalPair& pair, const ControllerConfig& config,
                                int k_offset, const StageCost<>* lagrangian = nullptr);

// One horizon-N attempt at the current state.
struct Attempt {
  int N = 0;
  Eigen::VectorXd u0;
  ConditionCheck check;
  std::optional<SolveStatus> status;  // empty for feedback-only attempts
  double cost = 0.0;
};

// The parts of a controller step that need a solver, so the horizon logic can
// be exercised with scripted outcomes.
class HorizonPlanner {
 public:
  virtual ~HorizonPlanner() = default;
  // Solve at horizon N >= 1 from x and check the extension.
  virtual Attempt solve(const Eigen::VectorXd& x, int N) = 0;
  // Check the extension of the terminal feedback from x itself.
  virtual Attempt feedback_only(const Eigen::VectorXd& x) = 0;
  // Called with the attempt whose first control is applied.
  virtual void commit(const Attempt&) {}
};

struct StepReport {
  Eigen::VectorXd u;
  int N = 0;              // horizon of the applied attempt (0: feedback only)
  int resolves = 0;       // solves beyond the first at this step
  bool feedback_only = false;
  bool accepted = false;  // conditions held for the applied attempt
  ConditionCheck check;   // of the applied attempt
  std::optional<SolveStatus> status;
  int next_N = 0;
  std::vector<int> tried;  // horizons attempted, in order
};

// One step of the horizon protocol, updating N in place.
StepReport adaptive_step(HorizonPlanner& planner, const ControllerConfig& config,
                         const Eigen::VectorXd& x, int& N);

// Planner backed by the shooting solver, with warm starts carried between
// steps.
class Controller final : public HorizonPlanner {
 public:
  Controller(const ControlSystem<>& model, const StageCost<>& lagrangian,
             const TerminalPair& pair, ControllerConfig config);

  StepReport step(const Eigen::VectorXd& x);
  int horizon() const { return N_; }

  Attempt solve(const Eigen::VectorXd& x, int N) override;
  Attempt feedback_only(const Eigen::VectorXd& x) override;
  void commit(const Attempt& a) override;

 private:
  Eigen::MatrixXd warm_start(const Eigen::VectorXd& x, int N) const;
  Eigen::VectorXd clamp(Eigen::VectorXd u) const;

  const ControlSystem<>& model_;
  const StageCost<>& lagrangian_;
  const TerminalPair& pair_;
  ControllerConfig config_;
  PolynomialTerminalCost<> terminal_;
  int N_;
  // Most recent solve (controls and predicted states), shifted on commit.
  Eigen::MatrixXd last_u_;
  Eigen::MatrixXd last_x_;
  Eigen::MatrixXd P_quad_;  // Hessian of the quadratic part of V_f
};

struct StepRecord {
  int t = 0;
  Eigen::VectorXd x;  // state at time t, before the control is applied
  StepReport report;
  double vf_end = 0.0;  // V_f at the end of the applied attempt's extension
};

struct SimulationLog {
  std::vector<StepRecord> steps;
  Eigen::VectorXd final_state;
};

// Closed loop on the pendulum; the controller's model is the same plant
// without noise. Deterministic for a given noise seed.
SimulationLog run_simulation(const ControllerConfig& config, const PendulumParams& params,
                             const TerminalPair& pair, const Eigen::VectorXd& x0, int steps,
                             std::optional<std::uint64_t> noise_seed,
                             const std::function<void(const StepRecord&)>& on_step = {});

}  // namespace ahmpc
