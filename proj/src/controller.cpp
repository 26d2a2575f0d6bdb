#include "ahmpc/controller.hpp"

#include <algorithm>
#include <stdexcept>

namespace ahmpc {

void ControllerConfig::validate() const {
  if (N_init < 0 || M < 1 || L < 1 || retry_cap < 0 || decrement < 1 || N_min < 0 ||
      N_init < N_min) {
    throw std::invalid_argument("controller: horizon parameters out of range");
  }
  if (!(alpha_scale > 0) || !(u_max > 0)) {
    throw std::invalid_argument("controller: alpha scale and u_max must be positive");
  }
}

std::string to_string(Condition c) {
  switch (c) {
    case Condition::kNone:
      return "none";
    case Condition::kCf:
      return "cf";
    case Condition::kSf:
      return "sf";
    case Condition::kScf:
      return "scf";
    case Condition::kL1:
      return "L1";
    case Condition::kL2:
      return "L2";
    case Condition::kNonFinite:
      return "nonfinite";
    case Condition::kSolver:
      return "solver";
  }
  return "unknown";
}

std::vector<Eigen::VectorXd> extend_trajectory(const Eigen::VectorXd& x_N,
                                               const TerminalPair& pair, int M,
                                               const ControlSystem<>& dynamics) {
  std::vector<Eigen::VectorXd> ext;
  if (!x_N.allFinite()) return ext;
  ext.push_back(x_N);
  for (int i = 0; i < M; ++i) {
    const Eigen::VectorXd& x = ext.back();
    Eigen::VectorXd next = dynamics.step(x, pair.feedback(x));
    if (!next.allFinite()) break;
    ext.push_back(std::move(next));
  }
  return ext;
}

ConditionCheck check_conditions(const std::vector<Eigen::VectorXd>& extension, int M,
                                const TerminalPair& pair, const ControllerConfig& config,
                                int k_offset, const StageCost<>* lagrangian) {
  ConditionCheck c;
  for (const auto& x : extension) c.vf.push_back(pair.cost(x));
  auto fail = [&](Condition kind, int i) {
    if (c.pass) {
      c.pass = false;
      c.kind = kind;
      c.k = k_offset + i;
    }
  };
  for (int i = 0; i < M; ++i) {
    if (i + 1 >= static_cast<int>(extension.size())) {
      fail(Condition::kNonFinite, i);
      break;
    }
    const Eigen::VectorXd& x = extension[static_cast<std::size_t>(i)];
    const Eigen::VectorXd& next = extension[static_cast<std::size_t>(i) + 1];
    const Eigen::VectorXd u = pair.feedback(x);
    const double a = config.alpha(x.norm());
    if (lagrangian && !(a < 0.5 * lagrangian->value(x, u)) && x.squaredNorm() > 0) {
      ++c.alpha_warnings;
    }
    const double vf = c.vf[static_cast<std::size_t>(i)];
    const double vf_next = c.vf[static_cast<std::size_t>(i) + 1];
    if (!(u.lpNorm<Eigen::Infinity>() <= config.u_max)) {
      fail(Condition::kCf, i);
    } else if (config.state_predicate && !config.state_predicate(next)) {
      fail(Condition::kSf, i);
    } else if (config.mixed_predicate && !config.mixed_predicate(x, u)) {
      fail(Condition::kScf, i);
    } else if (!(vf >= a)) {
      fail(Condition::kL1, i);
    } else if (!(vf - vf_next >= a)) {
      fail(Condition::kL2, i);
    }
  }
  if (extension.empty()) fail(Condition::kNonFinite, 0);
  return c;
}

StepReport adaptive_step(HorizonPlanner& planner, const ControllerConfig& config,
                         const Eigen::VectorXd& x, int& N) {
  StepReport r;
  if (N == 0) {
    Attempt a = planner.feedback_only(x);
    r.tried.push_back(0);
    if (a.check.pass) {
      planner.commit(a);
      r.u = a.u0;
      r.N = 0;
      r.feedback_only = true;
      r.accepted = true;
      r.check = std::move(a.check);
      r.next_N = N;
      return r;
    }
    N = config.L;
  }
  Attempt a = planner.solve(x, N);
  r.tried.push_back(N);
  while (!a.check.pass && r.resolves < config.retry_cap) {
    N += config.L;
    a = planner.solve(x, N);
    r.tried.push_back(N);
    ++r.resolves;
  }
  planner.commit(a);
  r.u = a.u0;
  r.N = a.N;
  r.accepted = a.check.pass;
  r.status = a.status;
  r.check = std::move(a.check);
  N = r.accepted ? std::max(N - config.decrement, config.N_min) : N + config.L;
  r.next_N = N;
  return r;
}

Controller::Controller(const ControlSystem<>& model, const StageCost<>& lagrangian,
                       const TerminalPair& pair, ControllerConfig config)
    : model_(model),
      lagrangian_(lagrangian),
      pair_(pair),
      config_(std::move(config)),
      terminal_(pair.V_f),
      N_(config_.N_init) {
  config_.validate();
  if (static_cast<int>(pair_.kappa.size()) != model_.control_dim() ||
      pair_.V_f.num_vars() != model_.state_dim()) {
    throw std::invalid_argument("controller: terminal pair does not match the model");
  }
  const int n = model_.state_dim();
  P_quad_.resize(n, n);
  const auto& q = pair_.V_f.term(2);
  for (std::size_t i = 0; i < q.size(); ++i) {
    const Exponent& e = q.basis()[i];
    std::vector<int> idx;
    for (int j = 0; j < n; ++j) {
      for (int r = 0; r < e[j]; ++r) idx.push_back(j);
    }
    const double c = q.coeffs()[static_cast<Eigen::Index>(i)];
    if (idx[0] == idx[1]) {
      P_quad_(idx[0], idx[0]) = 2 * c;
    } else {
      P_quad_(idx[0], idx[1]) = P_quad_(idx[1], idx[0]) = c;
    }
  }
}

StepReport Controller::step(const Eigen::VectorXd& x) {
  return adaptive_step(*this, config_, x, N_);
}

Eigen::VectorXd Controller::clamp(Eigen::VectorXd u) const {
  return u.cwiseMax(-config_.u_max).cwiseMin(config_.u_max);
}

// The previous plan is replayed with time-varying LQR corrections along its
// predicted states, so a perturbed start does not send the open-loop rollout
// of an unstable plant far from the plan; beyond the plan, the clamped
// terminal feedback.
Eigen::MatrixXd Controller::warm_start(const Eigen::VectorXd& x, int N) const {
  const int m = model_.control_dim();
  Eigen::MatrixXd u = Eigen::MatrixXd::Zero(N, m);
  const int kept = std::min<int>(N, static_cast<int>(last_u_.rows()));
  if (kept == 0 && config_.initial_guess == InitialGuess::kZero) return u;

  std::vector<Eigen::MatrixXd> gains(static_cast<std::size_t>(kept));
  if (kept > 0) {
    const double q = 2 * lagrangian_.value(Eigen::VectorXd::Unit(model_.state_dim(), 0),
                                            Eigen::VectorXd::Zero(m));
    const double r = 2 * lagrangian_.value(Eigen::VectorXd::Zero(model_.state_dim()),
                                           Eigen::VectorXd::Unit(m, 0));
    Eigen::MatrixXd P = P_quad_;
    Eigen::MatrixXd fx, fu;
    for (int k = kept - 1; k >= 0; --k) {
      model_.linearize(last_x_.row(k).transpose(), last_u_.row(k).transpose(), fx, fu);
      const Eigen::MatrixXd H = r * Eigen::MatrixXd::Identity(m, m) + fu.transpose() * P * fu;
      const Eigen::MatrixXd K = -H.ldlt().solve(fu.transpose() * P * fx);
      gains[static_cast<std::size_t>(k)] = K;
      const Eigen::MatrixXd Acl = fx + fu * K;
      P = q * Eigen::MatrixXd::Identity(fx.rows(), fx.cols()) + r * K.transpose() * K +
          Acl.transpose() * P * Acl;
      P = 0.5 * (P + P.transpose()).eval();
    }
  }

  Eigen::VectorXd z = x;
  for (int k = 0; k < N; ++k) {
    if (k < kept) {
      const Eigen::VectorXd dz = z - last_x_.row(k).transpose();
      u.row(k) = clamp(last_u_.row(k).transpose() + gains[static_cast<std::size_t>(k)] * dz)
                     .transpose();
    } else {
      u.row(k) = clamp(pair_.feedback(z)).transpose();
    }
    z = model_.step(z, u.row(k).transpose());
    if (!z.allFinite()) {
      u.bottomRows(N - k - 1).setZero();
      break;
    }
  }
  return u;
}

Attempt Controller::solve(const Eigen::VectorXd& x, int N) {
  const int m = model_.control_dim();
  OCPProblem problem{model_,
                     lagrangian_,
                     terminal_,
                     N,
                     x,
                     Eigen::VectorXd::Constant(m, config_.u_max),
                     config_.state_predicate,
                     config_.mixed_predicate};
  const Eigen::MatrixXd warm = warm_start(x, N);
  Attempt a;
  a.N = N;
  try {
    const OCPSolution sol = ahmpc::solve(problem, warm, config_.solver);
    a.u0 = sol.u_seq.row(0).transpose();
    a.status = sol.status;
    a.cost = sol.cost;
    last_u_ = sol.u_seq;
    last_x_ = sol.x_seq;
    const auto ext = extend_trajectory(sol.x_seq.row(N).transpose(), pair_, config_.M, model_);
    a.check = check_conditions(ext, config_.M, pair_, config_, N, &lagrangian_);
  } catch (const NumericalError&) {
    a.u0 = warm.row(0).transpose();
    a.check.pass = false;
    a.check.kind = Condition::kSolver;
    a.check.k = 0;
    last_u_.resize(0, m);
    last_x_.resize(0, model_.state_dim());
  }
  return a;
}

Attempt Controller::feedback_only(const Eigen::VectorXd& x) {
  Attempt a;
  a.N = 0;
  a.u0 = pair_.feedback(x);
  const auto ext = extend_trajectory(x, pair_, config_.M, model_);
  a.check = check_conditions(ext, config_.M, pair_, config_, 0, &lagrangian_);
  return a;
}

void Controller::commit(const Attempt& a) {
  if (a.N == 0 || last_u_.rows() <= 1) {
    last_u_.resize(0, model_.control_dim());
    last_x_.resize(0, model_.state_dim());
  } else {
    last_u_ = Eigen::MatrixXd(last_u_.bottomRows(last_u_.rows() - 1));
    last_x_ = Eigen::MatrixXd(last_x_.bottomRows(last_x_.rows() - 1));
  }
}

SimulationLog run_simulation(const ControllerConfig& config, const PendulumParams& params,
                             const TerminalPair& pair, const Eigen::VectorXd& x0, int steps,
                             std::optional<std::uint64_t> noise_seed,
                             const std::function<void(const StepRecord&)>& on_step) {
  if (steps < 0) throw std::invalid_argument("steps must be nonnegative");
  const DoublePendulum<> plant(params);
  const auto lagrangian = pendulum_lagrangian();
  Controller controller(plant, lagrangian, pair, config);
  GaussianNoise noise = noise_seed ? GaussianNoise(*noise_seed) : GaussianNoise();

  SimulationLog log;
  Eigen::VectorXd x = x0;
  for (int t = 0; t < steps; ++t) {
    StepRecord rec;
    rec.t = t;
    rec.x = x;
    rec.report = controller.step(x);
    rec.vf_end = rec.report.check.vf.empty() ? 0.0 : rec.report.check.vf.back();
    x = add_noise(plant.step(x, rec.report.u), noise);
    if (on_step) on_step(rec);
    log.steps.push_back(std::move(rec));
  }
  log.final_state = x;
  return log;
}

}  // namespace ahmpc
