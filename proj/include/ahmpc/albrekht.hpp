#pragma once

// Taylor polynomials of the infinite-horizon optimal cost and feedback for a
// smooth discrete-time problem: the Riccati equations at lowest degree, then
// one pair of linear systems per higher degree (discrete Al'brekht method).

#include <span>
#include <type_traits>
#include <vector>

#include <Eigen/Dense>

#include "ahmpc/poly.hpp"
#include "ahmpc/system.hpp"

namespace ahmpc {

// Linear-quadratic part: x+ = Fx + Gu, l = (x'Qx + 2x'Su + u'Ru) / 2.
template <typename T>
struct BasicLQRData {
  Mat<T> F, G, Q, S, R;
};
using LQRData = BasicLQRData<double>;

struct RiccatiSolution {
  Eigen::MatrixXd P;
  Eigen::MatrixXd K;  // u = Kx
  double residual = 0.0;         // max-norm of the Riccati equation residual
  double spectral_radius = 0.0;  // of F + GK
};

struct DareOptions {
  int max_iterations = 100;
  int max_refinements = 3;
};

// Max-norm residual of
//   P = F'PF - (F'PG + S)(R + G'PG)^{-1}(G'PF + S') + Q.
double dare_residual(const LQRData& lqr, const Eigen::MatrixXd& P);

// Gain K = -(R + G'PG)^{-1}(G'PF + S').
Eigen::MatrixXd lqr_gain(const LQRData& lqr, const Eigen::MatrixXd& P);

double spectral_radius(const Eigen::MatrixXd& A);

// Stabilizing solution by the structure-preserving doubling algorithm with
// Newton (Hewer) refinement. Throws std::invalid_argument for malformed data
// (R not positive definite, asymmetric weights) and NumericalError when no
// stabilizing solution is reached.
RiccatiSolution solve_dare(const LQRData& lqr, const DareOptions& options = {});

// Matrix of p -> p - p o A on homogeneous polynomials of degree k, in the
// graded-lex basis.
template <typename T>
Mat<T> lyapunov_operator(const std::type_identity_t<Mat<T>>& A, int k);

template <typename T>
struct BasicValueFeedbackSeries {
  int n = 0;  // states
  int m = 0;  // controls
  int d = 0;  // feedback degree
  BasicPolyBundle<T> V;                   // degrees 2..d+1 in x
  std::vector<BasicPolyBundle<T>> kappa;  // m rows, degrees 1..d in x
  Mat<T> P, K;
};
using ValueFeedbackSeries = BasicValueFeedbackSeries<double>;

// Reads F, G from the degree-1 rows of f (inputs stacked as (x, u)) and
// Q, S, R from the degree-2 part of l.
template <typename T>
BasicLQRData<T> lqr_data(const BasicTaylorMap<T>& f, const BasicPolyBundle<T>& l);

// f: n rows in n+m stacked variables, degrees 1..d (or more).
// l: stacked variables, degrees 2..d+1 (or more).
// For coefficient types wider than double, the Riccati solution from the
// double solver is refined by Newton steps in T before the higher degrees
// are solved.
template <typename T>
BasicValueFeedbackSeries<T> albrekht(const BasicTaylorMap<T>& f,
                                     const BasicPolyBundle<T>& l, int d);

// Degree-d truncation of a longer series.
template <typename T>
BasicValueFeedbackSeries<T> truncate_series(const BasicValueFeedbackSeries<T>& s,
                                            int d) {
  if (d < 1 || d > s.d) throw std::invalid_argument("truncation degree");
  BasicValueFeedbackSeries<T> t = s;
  t.d = d;
  t.V = s.V.restricted(2, d + 1);
  for (auto& row : t.kappa) row = row.restricted(1, d);
  return t;
}

template <typename To, typename From>
BasicValueFeedbackSeries<To> series_cast(const BasicValueFeedbackSeries<From>& s) {
  BasicValueFeedbackSeries<To> out;
  out.n = s.n;
  out.m = s.m;
  out.d = s.d;
  out.V = poly_cast<To>(s.V);
  for (const auto& row : s.kappa) out.kappa.push_back(poly_cast<To>(row));
  out.P = s.P.template cast<To>();
  out.K = s.K.template cast<To>();
  return out;
}

template <typename Scalar>
struct SbdpResidual {
  Scalar r1;       // V(x) - V(f(x, k(x))) - l(x, k(x))
  Vec<Scalar> r2;  // dV/dx(f) df/du + dl/du, length m
};

// Residuals of the simplified Bellman equations evaluated with the exact
// dynamics and Lagrangian.
template <typename Scalar, typename T>
SbdpResidual<Scalar> sbdp_residuals(const BasicValueFeedbackSeries<T>& series,
                                    const ControlSystem<Scalar>& dynamics,
                                    const StageCost<Scalar>& lagrangian,
                                    const Vec<Scalar>& x) {
  const std::span<const Scalar> xs(x.data(), static_cast<std::size_t>(x.size()));
  const Vec<Scalar> u = eval_map<Scalar>(series.kappa, x);
  const Vec<Scalar> next = dynamics.step(x, u);
  Mat<Scalar> fx, fu;
  dynamics.linearize(x, u, fx, fu);
  Vec<Scalar> grad_next(series.n);
  const Scalar v_next = eval_with_gradient<Scalar>(
      series.V, {next.data(), static_cast<std::size_t>(next.size())},
      {grad_next.data(), static_cast<std::size_t>(grad_next.size())});
  Vec<Scalar> lx, lu;
  lagrangian.gradient(x, u, lx, lu);
  SbdpResidual<Scalar> r;
  r.r1 = eval<Scalar>(series.V, xs) - v_next - lagrangian.value(x, u);
  r.r2 = fu.transpose() * grad_next + lu;
  return r;
}

}  // namespace ahmpc
