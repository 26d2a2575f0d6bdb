#pragma once

// Double pendulum on a fixed base: two point masses on massless links,
// absolute angles measured counterclockwise from straight up, torques at
// the base and at the joint, linear damping, explicit Euler discretization.
//
// With a = (m1+m2) l1^2, b = m2 l1 l2, e = m2 l2^2 and c = cos(th1-th2),
// s = sin(th1-th2), the Euler-Lagrange equations read
//
//   [a    b c] [dw1]   [q1 - b s w2^2 + (m1+m2) g l1 sin th1]
//   [b c  e  ] [dw2] = [q2 + b s w1^2 + m2 g l2 sin th2     ]
//
// where (q1, q2) are the generalized forces: torques minus damping.
// Absolute damping uses -c1 w1, -c2 w2; relative damping puts the joint
// damper on w2 - w1.

#include <array>
#include <cmath>
#include <cstdint>
#include <random>

#include <Eigen/Dense>

#include "ahmpc/poly.hpp"
#include "ahmpc/system.hpp"

namespace ahmpc {

enum class DampingMode { kAbsolute, kRelative };

struct PendulumParams {
  double l1 = 1.0;   // base link, m
  double l2 = 2.0;   // outer link, m
  double m1 = 2.0;   // joint mass, kg
  double m2 = 1.0;   // tip mass, kg
  double c1 = 0.5;   // base damping, 1/s
  double c2 = 0.5;   // joint damping, 1/s
  double g = 9.8;    // m/s^2
  double h = 0.1;    // Euler step, s
  DampingMode damping = DampingMode::kAbsolute;

  void validate() const;
};

template <typename T>
using PendulumState = std::array<T, 4>;  // th1, th2, w1, w2
template <typename T>
using PendulumInput = std::array<T, 2>;  // base torque, joint torque

namespace detail {

template <typename T>
void generalized_forces(const PendulumParams& p, const PendulumState<T>& x,
                        const PendulumInput<T>& u, T& q1, T& q2) {
  if (p.damping == DampingMode::kAbsolute) {
    q1 = u[0] - p.c1 * x[2];
    q2 = u[1] - p.c2 * x[3];
  } else {
    const T rel = x[3] - x[2];
    q1 = u[0] - p.c1 * x[2] + p.c2 * rel;
    q2 = u[1] - p.c2 * rel;
  }
}

}  // namespace detail

// Continuous-time vector field. Generic in T so that it also runs on jets.
template <typename T>
PendulumState<T> pendulum_vector_field(const PendulumParams& p,
                                       const PendulumState<T>& x,
                                       const PendulumInput<T>& u) {
  using std::cos;
  using std::sin;
  const double a = (p.m1 + p.m2) * p.l1 * p.l1;
  const double b = p.m2 * p.l1 * p.l2;
  const double e = p.m2 * p.l2 * p.l2;
  const T c12 = cos(x[0] - x[1]);
  const T s12 = sin(x[0] - x[1]);
  T q1 = u[0], q2 = u[1];
  detail::generalized_forces(p, x, u, q1, q2);
  const T r1 = q1 - b * s12 * x[3] * x[3] +
               ((p.m1 + p.m2) * p.g * p.l1) * sin(x[0]);
  const T r2 = q2 + b * s12 * x[2] * x[2] + (p.m2 * p.g * p.l2) * sin(x[1]);
  const T m12 = b * c12;
  const T det = a * e - m12 * m12;
  const T dw1 = (e * r1 - m12 * r2) / det;
  const T dw2 = (a * r2 - m12 * r1) / det;
  return {x[2], x[3], dw1, dw2};
}

template <typename T>
PendulumState<T> pendulum_step(const PendulumParams& p,
                               const PendulumState<T>& x,
                               const PendulumInput<T>& u) {
  const PendulumState<T> dx = pendulum_vector_field(p, x, u);
  return {x[0] + p.h * dx[0], x[1] + p.h * dx[1], x[2] + p.h * dx[2],
          x[3] + p.h * dx[3]};
}

// Analytic Jacobians of the continuous vector field: A = d(xdot)/dx (4x4),
// B = d(xdot)/du (4x2).
template <typename T>
void pendulum_field_jacobians(const PendulumParams& p,
                              const PendulumState<T>& x,
                              const PendulumInput<T>& u, Mat<T>& A,
                              Mat<T>& B) {
  using std::cos;
  using std::sin;
  const T a = (p.m1 + p.m2) * p.l1 * p.l1;
  const T b = p.m2 * p.l1 * p.l2;
  const T e = p.m2 * p.l2 * p.l2;
  const T g1 = (p.m1 + p.m2) * p.g * p.l1;
  const T g2 = p.m2 * p.g * p.l2;
  const T c12 = cos(x[0] - x[1]);
  const T s12 = sin(x[0] - x[1]);
  const T w1 = x[2], w2 = x[3];
  T q1, q2;
  detail::generalized_forces(p, x, u, q1, q2);
  const T r1 = q1 - b * s12 * w2 * w2 + g1 * sin(x[0]);
  const T r2 = q2 + b * s12 * w1 * w1 + g2 * sin(x[1]);
  const T m12 = b * c12;
  const T det = a * e - m12 * m12;
  const T acc1 = (e * r1 - m12 * r2) / det;
  const T acc2 = (a * r2 - m12 * r1) / det;

  // dq/dw
  T q1w1 = -p.c1, q1w2 = 0, q2w1 = 0, q2w2 = -p.c2;
  if (p.damping == DampingMode::kRelative) {
    q1w1 = -p.c1 - p.c2;
    q1w2 = p.c2;
    q2w1 = p.c2;
  }
  // Columns of dr/dz - (dM/dz) acc for z = th1, th2, w1, w2.
  // dM/dth1 = [[0, -b s], [-b s, 0]] = -dM/dth2.
  T k1[4], k2[4];
  k1[0] = -b * c12 * w2 * w2 + g1 * cos(x[0]) + b * s12 * acc2;
  k2[0] = b * c12 * w1 * w1 + b * s12 * acc1;
  k1[1] = b * c12 * w2 * w2 - b * s12 * acc2;
  k2[1] = -b * c12 * w1 * w1 + g2 * cos(x[1]) - b * s12 * acc1;
  k1[2] = q1w1;
  k2[2] = T(2) * b * s12 * w1 + q2w1;
  k1[3] = T(-2) * b * s12 * w2 + q1w2;
  k2[3] = q2w2;

  A = Mat<T>::Zero(4, 4);
  B = Mat<T>::Zero(4, 2);
  A(0, 2) = 1;
  A(1, 3) = 1;
  for (int z = 0; z < 4; ++z) {
    A(2, z) = (e * k1[z] - m12 * k2[z]) / det;
    A(3, z) = (a * k2[z] - m12 * k1[z]) / det;
  }
  B(2, 0) = e / det;
  B(2, 1) = -m12 / det;
  B(3, 0) = -m12 / det;
  B(3, 1) = a / det;
}

template <typename T>
T pendulum_energy(const PendulumParams& p, const PendulumState<T>& x) {
  using std::cos;
  const T c12 = cos(x[0] - x[1]);
  const double a = (p.m1 + p.m2) * p.l1 * p.l1;
  const double e = p.m2 * p.l2 * p.l2;
  const double b = p.m2 * p.l1 * p.l2;
  const T kinetic = 0.5 * a * (x[2] * x[2]) + 0.5 * e * (x[3] * x[3]) +
                    b * (c12 * x[2] * x[3]);
  const T potential = ((p.m1 + p.m2) * p.g * p.l1) * cos(x[0]) +
                      (p.m2 * p.g * p.l2) * cos(x[1]);
  return kinetic + potential;
}

template <typename Scalar = double>
class DoublePendulum final : public ControlSystem<Scalar> {
 public:
  explicit DoublePendulum(PendulumParams params = {}) : p_(params) {
    p_.validate();
  }

  int state_dim() const override { return 4; }
  int control_dim() const override { return 2; }

  Vec<Scalar> step(const Vec<Scalar>& x, const Vec<Scalar>& u) const override {
    const auto next = pendulum_step<Scalar>(p_, {x[0], x[1], x[2], x[3]},
                                            {u[0], u[1]});
    Vec<Scalar> out(4);
    out << next[0], next[1], next[2], next[3];
    return out;
  }

  void linearize(const Vec<Scalar>& x, const Vec<Scalar>& u, Mat<Scalar>& fx,
                 Mat<Scalar>& fu) const override {
    Mat<Scalar> A, B;
    pendulum_field_jacobians<Scalar>(p_, {x[0], x[1], x[2], x[3]},
                                     {u[0], u[1]}, A, B);
    fx = Mat<Scalar>::Identity(4, 4) + Scalar(p_.h) * A;
    fu = Scalar(p_.h) * B;
  }

  const PendulumParams& params() const { return p_; }

 private:
  PendulumParams p_;
};

// Taylor polynomials of the discrete dynamics about the upright equilibrium,
// in stacked variables (th1, th2, w1, w2, u1, u2), degrees 1..d. T is the
// coefficient type (double or Quad).
template <typename T = double>
BasicTaylorMap<T> taylor_dynamics(const PendulumParams& p, int d);

// l(x, u) = 0.1 (|x|^2 + |u|^2) / 2
template <typename Scalar = double>
QuadraticStageCost<Scalar> pendulum_lagrangian() {
  return {0.1 * Eigen::MatrixXd::Identity(4, 4), Eigen::MatrixXd::Zero(4, 2),
          0.1 * Eigen::MatrixXd::Identity(2, 2)};
}

// Additive N(0, variance I) state noise from a seeded generator. A
// default-constructed source is disabled and returns its input unchanged.
class GaussianNoise {
 public:
  GaussianNoise() = default;
  explicit GaussianNoise(std::uint64_t seed, double variance = 0.0004);

  bool enabled() const { return enabled_; }
  Eigen::VectorXd sample(Eigen::Index n);

 private:
  bool enabled_ = false;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_;
};

Eigen::VectorXd add_noise(const Eigen::VectorXd& x, GaussianNoise& noise);

}  // namespace ahmpc
