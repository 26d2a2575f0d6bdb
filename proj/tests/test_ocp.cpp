#include "ahmpc/ocp.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "ahmpc/albrekht.hpp"
#include "ahmpc/plant.hpp"
#include "ahmpc/sos.hpp"
#include "oracles.hpp"

namespace ahmpc {
namespace {

using namespace oracle;

TEST(RolloutTest, EquilibriumStaysPut) {
  const DoublePendulum<> plant;
  const auto l = pendulum_lagrangian();
  const PolynomialTerminalCost<> vf(quadratic_form(Eigen::MatrixXd::Identity(4, 4)));
  const OCPProblem p{plant, l, vf, 5, Eigen::VectorXd::Zero(4), Eigen::VectorXd::Constant(2, 5), {}, {}};
  const Rollout r = rollout(p, Eigen::MatrixXd::Zero(5, 2));
  EXPECT_EQ(r.x_seq.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(r.cost, 0.0);
}

TEST(RolloutTest, ScalarDeadbeat) {
  const LinearSystem<> sys(Eigen::MatrixXd::Ones(1, 1), Eigen::MatrixXd::Ones(1, 1));
  const QuadraticStageCost<> l(Eigen::MatrixXd::Zero(1, 1), Eigen::MatrixXd::Zero(1, 1),
                               Eigen::MatrixXd::Ones(1, 1));
  const PolynomialTerminalCost<> vf(quadratic_form(4 * Eigen::MatrixXd::Ones(1, 1)));
  const OCPProblem p{sys, l, vf, 1, Eigen::VectorXd::Ones(1), Eigen::VectorXd::Ones(1), {}, {}};
  const Rollout r = rollout(p, -Eigen::MatrixXd::Ones(1, 1));
  EXPECT_EQ(r.x_seq(0, 0), 1.0);
  EXPECT_EQ(r.x_seq(1, 0), 0.0);
  EXPECT_DOUBLE_EQ(r.cost, 0.5);
}

TEST(RolloutTest, PendulumCostAccumulatesMonotonically) {
  const DoublePendulum<> plant;
  const auto l = pendulum_lagrangian();
  const PolynomialTerminalCost<> zero(PolyBundle(4, 2, 2));
  Eigen::VectorXd x0(4);
  x0 << 0.9 * std::numbers::pi, 0.9 * std::numbers::pi, 0, 0;
  double previous = 0.0;
  for (int N = 1; N <= 10; ++N) {
    const OCPProblem p{plant, l, zero, N, x0, Eigen::VectorXd::Constant(2, 5), {}, {}};
    const Rollout r = rollout(p, Eigen::MatrixXd::Zero(N, 2));
    EXPECT_TRUE(r.x_seq.allFinite());
    EXPECT_GE(r.cost, previous);
    previous = r.cost;
  }
}

TEST(RolloutTest, NonFiniteStateNamesStep) {
  const LinearSystem<> sys(1e200 * Eigen::MatrixXd::Ones(1, 1), Eigen::MatrixXd::Ones(1, 1));
  const QuadraticStageCost<> l(Eigen::MatrixXd::Ones(1, 1), Eigen::MatrixXd::Zero(1, 1),
                               Eigen::MatrixXd::Ones(1, 1));
  const PolynomialTerminalCost<> vf(quadratic_form(Eigen::MatrixXd::Ones(1, 1)));
  const OCPProblem p{sys, l, vf, 4, Eigen::VectorXd::Ones(1), Eigen::VectorXd::Ones(1), {}, {}};
  try {
    rollout(p, Eigen::MatrixXd::Zero(4, 1));
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("step 2"), std::string::npos) << e.what();
  }
}

TEST(RolloutTest, RejectsBadDimensions) {
  const LinearSystem<> sys(Eigen::MatrixXd::Ones(1, 1), Eigen::MatrixXd::Ones(1, 1));
  const QuadraticStageCost<> l(Eigen::MatrixXd::Ones(1, 1), Eigen::MatrixXd::Zero(1, 1),
                               Eigen::MatrixXd::Ones(1, 1));
  const PolynomialTerminalCost<> vf(quadratic_form(Eigen::MatrixXd::Ones(1, 1)));
  const OCPProblem p{sys, l, vf, 3, Eigen::VectorXd::Ones(1), Eigen::VectorXd::Ones(1), {}, {}};
  EXPECT_THROW(rollout(p, Eigen::MatrixXd::Zero(2, 1)), std::invalid_argument);
  const OCPProblem q{sys, l, vf, 3, Eigen::VectorXd::Ones(1), Eigen::VectorXd::Zero(1), {}, {}};
  EXPECT_THROW(rollout(q, Eigen::MatrixXd::Zero(3, 1)), std::invalid_argument);
}

TEST(CostGradientTest, MatchesFiniteDifferencesOnLQ) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const LQInstance lq = random_lq(rng);
    const OCPProblem p = problem_of(lq);
    const Eigen::MatrixXd u = random_matrix(rng, lq.N, lq.sys.control_dim());
    EXPECT_LE(relative_error(cost_gradient(p, u), central_differences(p, u)), 1e-4);
  }
}

TEST(CostGradientTest, MatchesFiniteDifferencesOnPendulum) {
  for (auto mode : {DampingMode::kAbsolute, DampingMode::kRelative}) {
    PendulumParams params;
    params.damping = mode;
    const DoublePendulum<> plant(params);
    const auto l = pendulum_lagrangian();
    const auto s = albrekht(taylor_dynamics(params, 3), l.as_polynomial(), 3);
    const PolynomialTerminalCost<> vf(s.V);
    std::mt19937_64 rng(22);
    Eigen::VectorXd x0(4);
    x0 << 2.8, 2.8, 0.1, -0.2;
    const OCPProblem p{plant, l, vf, 20, x0, Eigen::VectorXd::Constant(2, 5), {}, {}};
    const Eigen::MatrixXd u = 2.0 * random_matrix(rng, 20, 2);
    EXPECT_LE(relative_error(cost_gradient(p, u), central_differences(p, u)), 1e-4);
  }
}

TEST(CostGradientTest, VanishesAtLQOptimum) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 5; ++trial) {
    const LQInstance lq = random_lq(rng);
    Eigen::MatrixXd u_opt;
    riccati_recursion(lq, &u_opt);
    EXPECT_LE(cost_gradient(problem_of(lq), u_opt).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(SolveTest, MatchesRiccatiRecursion) {
  std::mt19937_64 rng(24);
  for (int trial = 0; trial < 20; ++trial) {
    const LQInstance lq = random_lq(rng);
    const OCPProblem p = problem_of(lq);
    const OCPSolution sol = solve(p, Eigen::MatrixXd::Zero(lq.N, lq.sys.control_dim()));
    const double oracle = riccati_recursion(lq, nullptr);
    EXPECT_EQ(sol.status, SolveStatus::kConverged);
    EXPECT_LE(std::abs(sol.cost - oracle), 1e-6 * std::abs(oracle)) << "trial " << trial;
  }
}

TEST(SolveTest, EquilibriumNeedsNoIterations) {
  const DoublePendulum<> plant;
  const auto l = pendulum_lagrangian();
  const PolynomialTerminalCost<> vf(quadratic_form(Eigen::MatrixXd::Identity(4, 4)));
  const OCPProblem p{plant, l, vf, 10, Eigen::VectorXd::Zero(4), Eigen::VectorXd::Constant(2, 5), {}, {}};
  const OCPSolution sol = solve(p, Eigen::MatrixXd::Zero(10, 2));
  EXPECT_EQ(sol.status, SolveStatus::kConverged);
  EXPECT_EQ(sol.iterations, 0);
  EXPECT_EQ(sol.cost, 0.0);
  EXPECT_EQ(sol.u_seq.cwiseAbs().maxCoeff(), 0.0);
}

// One step of x+ = x + u from x0 = 1 with cost u^2/2 + 2 x(1)^2: the minimizer
// of u^2/2 + 2(1 + u)^2 is u = -4/5.
TEST(SolveTest, ScalarOneStep) {
  const LinearSystem<> sys(Eigen::MatrixXd::Ones(1, 1), Eigen::MatrixXd::Ones(1, 1));
  const QuadraticStageCost<> l(Eigen::MatrixXd::Zero(1, 1), Eigen::MatrixXd::Zero(1, 1),
                               Eigen::MatrixXd::Ones(1, 1));
  const PolynomialTerminalCost<> vf(quadratic_form(4 * Eigen::MatrixXd::Ones(1, 1)));
  const OCPProblem wide{sys, l, vf, 1, Eigen::VectorXd::Ones(1), Eigen::VectorXd::Ones(1), {}, {}};
  EXPECT_NEAR(solve(wide, Eigen::MatrixXd::Zero(1, 1)).u_seq(0, 0), -0.8, 1e-8);

  const OCPProblem tight{sys, l, vf, 1, Eigen::VectorXd::Ones(1),
                         Eigen::VectorXd::Constant(1, 0.5), {}, {}};
  const OCPSolution sol = solve(tight, Eigen::MatrixXd::Zero(1, 1));
  EXPECT_EQ(sol.u_seq(0, 0), -0.5);
  EXPECT_EQ(sol.status, SolveStatus::kConverged);
  EXPECT_DOUBLE_EQ(sol.cost, 0.125 + 2 * 0.25);
}

TEST(SolveTest, PendulumFeasibleAndDescending) {
  const DoublePendulum<> plant;
  const auto l = pendulum_lagrangian();
  const auto s = albrekht(taylor_dynamics(PendulumParams{}, 3), l.as_polynomial(), 3);
  const PolynomialTerminalCost<> vf(complete_squares(s.V).W);
  Eigen::VectorXd x0(4);
  x0 << 0.9 * std::numbers::pi, 0.9 * std::numbers::pi, 0, 0;
  const OCPProblem p{plant, l, vf, 20, x0, Eigen::VectorXd::Constant(2, 5), {}, {}};
  std::mt19937_64 rng(25);
  const Eigen::MatrixXd u0 = 8.0 * random_matrix(rng, 20, 2);
  const double start = rollout(p, project_to_box(p, u0)).cost;
  const OCPSolution sol = solve(p, u0);
  EXPECT_LE(sol.u_seq.cwiseAbs().maxCoeff(), 5.0);
  EXPECT_LE(sol.cost, start + 1e-12);
  EXPECT_LT(sol.cost, start);
  const Rollout check = rollout(p, sol.u_seq);
  EXPECT_EQ(check.x_seq, sol.x_seq);
  EXPECT_NEAR(check.cost, sol.cost, 1e-12 * (1 + std::abs(sol.cost)));
  EXPECT_GE(sol.cost, 0.0);
}

TEST(SolveTest, PredicatesAreMonitoredOnly) {
  const LinearSystem<> sys(Eigen::MatrixXd::Ones(1, 1), Eigen::MatrixXd::Ones(1, 1));
  const QuadraticStageCost<> l(Eigen::MatrixXd::Ones(1, 1), Eigen::MatrixXd::Zero(1, 1),
                               Eigen::MatrixXd::Ones(1, 1));
  const PolynomialTerminalCost<> vf(quadratic_form(Eigen::MatrixXd::Ones(1, 1)));
  OCPProblem p{sys, l, vf, 3, Eigen::VectorXd::Ones(1), Eigen::VectorXd::Ones(1), {}, {}};
  p.state_predicate = [](const Eigen::VectorXd& x) { return x[0] < 0.5; };
  const OCPSolution sol = solve(p, Eigen::MatrixXd::Zero(3, 1));
  EXPECT_EQ(sol.status, SolveStatus::kConverged);
  EXPECT_GE(sol.predicate_violations, 1);
}

TEST(SolveStatusTest, Names) {
  EXPECT_EQ(to_string(SolveStatus::kConverged), "converged");
  EXPECT_EQ(to_string(SolveStatus::kIterationCap), "iteration-cap");
  EXPECT_EQ(to_string(SolveStatus::kLineSearchFailure), "line-search-failure");
}

}  // namespace
}  // namespace ahmpc
