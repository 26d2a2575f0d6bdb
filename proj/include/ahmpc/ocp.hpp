#pragma once

// Finite-horizon optimal control by single shooting: the controls are the
// only unknowns, the states come from rolling the dynamics forward, and the
// gradient from one backward (adjoint) sweep.

#include <functional>
#include <string>

#include <Eigen/Dense>

#include "ahmpc/system.hpp"

namespace ahmpc {

struct OCPProblem {
  const ControlSystem<>& dynamics;
  const StageCost<>& lagrangian;
  const TerminalCost<>& terminal_cost;
  int N = 1;
  Eigen::VectorXd x0;
  Eigen::VectorXd u_max;  // |u_i| <= u_max[i]
  // Monitored along the solution, never enforced. Empty means always true.
  std::function<bool(const Eigen::VectorXd&)> state_predicate;
  std::function<bool(const Eigen::VectorXd&, const Eigen::VectorXd&)> mixed_predicate;
};

enum class SolveStatus { kConverged, kIterationCap, kLineSearchFailure };

std::string to_string(SolveStatus s);

struct SolverOptions {
  double grad_tol = 1e-6;  // scaled by 1 + |cost|
  int max_iterations = 400;
  double armijo = 1e-4;
  double backtrack = 0.5;
  int max_backtracks = 40;
  int memory = 10;
};

struct Rollout {
  Eigen::MatrixXd x_seq;  // (N+1) x n
  double cost = 0.0;
};

struct OCPSolution {
  Eigen::MatrixXd u_seq;  // N x m
  Eigen::MatrixXd x_seq;  // (N+1) x n
  double cost = 0.0;
  SolveStatus status = SolveStatus::kConverged;
  int iterations = 0;
  double grad_norm = 0.0;
  int predicate_violations = 0;  // steps failing the state or mixed predicate
};

// Throws NumericalError naming the step at which the state stops being finite.
Rollout rollout(const OCPProblem& problem, const Eigen::MatrixXd& u_seq);

// d cost / d u_seq, N x m.
Eigen::MatrixXd cost_gradient(const OCPProblem& problem, const Eigen::MatrixXd& u_seq);

Eigen::MatrixXd project_to_box(const OCPProblem& problem, Eigen::MatrixXd u_seq);

// Projected limited-memory quasi-Newton with Armijo backtracking along the
// projection arc. The warm start is projected onto the box first.
OCPSolution solve(const OCPProblem& problem, const Eigen::MatrixXd& u_init,
                  const SolverOptions& options = {});

}  // namespace ahmpc
