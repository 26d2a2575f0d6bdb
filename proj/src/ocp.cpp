#include "ahmpc/ocp.hpp"

#include <cmath>
#include <deque>
#include <stdexcept>

namespace ahmpc {
namespace {

void check_dims(const OCPProblem& p, const Eigen::MatrixXd& u_seq) {
  const int n = p.dynamics.state_dim();
  const int m = p.dynamics.control_dim();
  if (p.N < 1) throw std::invalid_argument("horizon must be positive");
  if (p.x0.size() != n) throw std::invalid_argument("x0 has wrong dimension");
  if (p.u_max.size() != m || (p.u_max.array() <= 0).any()) {
    throw std::invalid_argument("u_max must be positive, one entry per control");
  }
  if (u_seq.rows() != p.N || u_seq.cols() != m) {
    throw std::invalid_argument("control sequence must be N x m");
  }
}

// The flattened controls are stored row-major: step k occupies [k*m, k*m+m).
Eigen::VectorXd flatten(const Eigen::MatrixXd& u) {
  Eigen::VectorXd v(u.size());
  for (Eigen::Index k = 0; k < u.rows(); ++k) v.segment(k * u.cols(), u.cols()) = u.row(k);
  return v;
}

Eigen::MatrixXd unflatten(const Eigen::VectorXd& v, Eigen::Index N, Eigen::Index m) {
  Eigen::MatrixXd u(N, m);
  for (Eigen::Index k = 0; k < N; ++k) u.row(k) = v.segment(k * m, m).transpose();
  return u;
}

struct Bounds {
  Eigen::VectorXd hi;  // lo = -hi
};

Eigen::VectorXd project(const Eigen::VectorXd& v, const Bounds& b) {
  return v.cwiseMax(-b.hi).cwiseMin(b.hi);
}

Eigen::VectorXd free_mask(const Eigen::VectorXd& v, const Eigen::VectorXd& g,
                          const Bounds& b) {
  Eigen::VectorXd mask = Eigen::VectorXd::Ones(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if ((v[i] <= -b.hi[i] && g[i] > 0) || (v[i] >= b.hi[i] && g[i] < 0)) mask[i] = 0;
  }
  return mask;
}

double projected_grad_norm(const Eigen::VectorXd& v, const Eigen::VectorXd& g,
                           const Bounds& b) {
  return (project(v - g, b) - v).lpNorm<Eigen::Infinity>();
}

// Two-loop recursion restricted to the free coordinates.
Eigen::VectorXd lbfgs_direction(const Eigen::VectorXd& g, const Eigen::VectorXd& mask,
                                const std::deque<Eigen::VectorXd>& S,
                                const std::deque<Eigen::VectorXd>& Y) {
  Eigen::VectorXd q = g.cwiseProduct(mask);
  const std::size_t k = S.size();
  std::vector<double> alpha(k), rho(k, 0.0);
  for (std::size_t i = k; i-- > 0;) {
    const double sy = S[i].cwiseProduct(mask).dot(Y[i].cwiseProduct(mask));
    if (sy <= 0) continue;
    rho[i] = 1.0 / sy;
    alpha[i] = rho[i] * S[i].cwiseProduct(mask).dot(q);
    q -= alpha[i] * Y[i].cwiseProduct(mask);
  }
  double gamma = 1.0;
  if (k > 0) {
    const double sy = S.back().dot(Y.back());
    const double yy = Y.back().squaredNorm();
    if (sy > 0 && yy > 0) gamma = sy / yy;
  }
  q *= gamma;
  for (std::size_t i = 0; i < k; ++i) {
    if (rho[i] == 0) continue;
    const double beta = rho[i] * Y[i].cwiseProduct(mask).dot(q);
    q += (alpha[i] - beta) * S[i].cwiseProduct(mask);
  }
  return -q.cwiseProduct(mask);
}

}  // namespace

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::kConverged:
      return "converged";
    case SolveStatus::kIterationCap:
      return "iteration-cap";
    case SolveStatus::kLineSearchFailure:
      return "line-search-failure";
  }
  return "unknown";
}

Rollout rollout(const OCPProblem& problem, const Eigen::MatrixXd& u_seq) {
  check_dims(problem, u_seq);
  const int n = problem.dynamics.state_dim();
  Rollout r;
  r.x_seq.resize(problem.N + 1, n);
  r.x_seq.row(0) = problem.x0.transpose();
  Eigen::VectorXd x = problem.x0;
  for (int k = 0; k < problem.N; ++k) {
    const Eigen::VectorXd u = u_seq.row(k).transpose();
    r.cost += problem.lagrangian.value(x, u);
    x = problem.dynamics.step(x, u);
    if (!x.allFinite()) {
      throw NumericalError("rollout: non-finite state at step " + std::to_string(k + 1));
    }
    r.x_seq.row(k + 1) = x.transpose();
  }
  r.cost += problem.terminal_cost.value(x);
  if (!std::isfinite(r.cost)) throw NumericalError("rollout: non-finite cost");
  return r;
}

Eigen::MatrixXd cost_gradient(const OCPProblem& problem, const Eigen::MatrixXd& u_seq) {
  const Rollout r = rollout(problem, u_seq);
  Eigen::MatrixXd grad(problem.N, u_seq.cols());
  Eigen::VectorXd lambda;
  problem.terminal_cost.value_and_gradient(r.x_seq.row(problem.N).transpose(), lambda);
  Eigen::MatrixXd fx, fu;
  Eigen::VectorXd lx, lu;
  for (int k = problem.N - 1; k >= 0; --k) {
    const Eigen::VectorXd x = r.x_seq.row(k).transpose();
    const Eigen::VectorXd u = u_seq.row(k).transpose();
    problem.dynamics.linearize(x, u, fx, fu);
    problem.lagrangian.gradient(x, u, lx, lu);
    grad.row(k) = (lu + fu.transpose() * lambda).transpose();
    lambda = lx + fx.transpose() * lambda;
  }
  return grad;
}

Eigen::MatrixXd project_to_box(const OCPProblem& problem, Eigen::MatrixXd u_seq) {
  for (Eigen::Index k = 0; k < u_seq.rows(); ++k) {
    u_seq.row(k) = u_seq.row(k).cwiseMax(-problem.u_max.transpose())
                       .cwiseMin(problem.u_max.transpose());
  }
  return u_seq;
}

OCPSolution solve(const OCPProblem& problem, const Eigen::MatrixXd& u_init,
                  const SolverOptions& options) {
  check_dims(problem, u_init);
  const Eigen::Index N = problem.N;
  const Eigen::Index m = problem.u_max.size();
  Bounds box{problem.u_max.replicate(N, 1)};

  auto objective = [&](const Eigen::VectorXd& v) {
    return rollout(problem, unflatten(v, N, m)).cost;
  };
  auto gradient = [&](const Eigen::VectorXd& v) {
    return flatten(cost_gradient(problem, unflatten(v, N, m)));
  };

  Eigen::VectorXd v = project(flatten(u_init), box);
  double f = objective(v);
  Eigen::VectorXd g = gradient(v);
  std::deque<Eigen::VectorXd> S, Y;

  OCPSolution sol;
  sol.status = SolveStatus::kIterationCap;
  int it = 0;
  for (; it < options.max_iterations; ++it) {
    if (projected_grad_norm(v, g, box) <= options.grad_tol * (1.0 + std::abs(f))) {
      sol.status = SolveStatus::kConverged;
      break;
    }
    const Eigen::VectorXd mask = free_mask(v, g, box);
    bool accepted = false;
    // Quasi-Newton direction first, steepest descent if that stalls.
    for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
      Eigen::VectorXd dir = attempt == 0 ? lbfgs_direction(g, mask, S, Y)
                                         : Eigen::VectorXd(-g.cwiseProduct(mask));
      if (attempt == 0 && dir.dot(g) >= 0) continue;
      if (attempt == 1) {
        S.clear();
        Y.clear();
        // Unit step scaled so the first trial moves at most to the box size.
        const double gmax = dir.lpNorm<Eigen::Infinity>();
        if (gmax > 0) dir *= std::min(1.0, box.hi.maxCoeff() / gmax);
      }
      double step = 1.0;
      for (int bt = 0; bt < options.max_backtracks; ++bt, step *= options.backtrack) {
        const Eigen::VectorXd trial = project(v + step * dir, box);
        const Eigen::VectorXd delta = trial - v;
        if (delta.lpNorm<Eigen::Infinity>() == 0) break;
        double f_trial;
        try {
          f_trial = objective(trial);
        } catch (const NumericalError&) {
          continue;
        }
        if (f_trial <= f + options.armijo * g.dot(delta)) {
          const Eigen::VectorXd g_trial = gradient(trial);
          const Eigen::VectorXd y = g_trial - g;
          if (delta.dot(y) > 1e-12 * delta.norm() * y.norm()) {
            S.push_back(delta);
            Y.push_back(y);
            if (static_cast<int>(S.size()) > options.memory) {
              S.pop_front();
              Y.pop_front();
            }
          }
          v = trial;
          f = f_trial;
          g = g_trial;
          accepted = true;
          break;
        }
      }
    }
    if (!accepted) {
      sol.status = SolveStatus::kLineSearchFailure;
      break;
    }
  }

  sol.iterations = it;
  sol.u_seq = unflatten(v, N, m);
  const Rollout r = rollout(problem, sol.u_seq);
  sol.x_seq = r.x_seq;
  sol.cost = r.cost;
  sol.grad_norm = projected_grad_norm(v, g, box);
  for (int k = 0; k <= problem.N; ++k) {
    const Eigen::VectorXd x = sol.x_seq.row(k).transpose();
    bool ok = !problem.state_predicate || problem.state_predicate(x);
    if (k < problem.N && problem.mixed_predicate) {
      ok = ok && problem.mixed_predicate(x, sol.u_seq.row(k).transpose());
    }
    if (!ok) ++sol.predicate_violations;
  }
  return sol;
}

}  // namespace ahmpc
