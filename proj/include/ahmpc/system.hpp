#pragma once

// Interfaces shared by the optimizer, the series solver and the controller:
// discrete dynamics x+ = f(x, u), stage costs l(x, u), terminal costs V(x).

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ahmpc/poly.hpp"

namespace ahmpc {

template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

// Failure of a numerical procedure (non-convergence, non-finite values,
// singular systems that the inputs should have ruled out).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <typename Scalar = double>
class ControlSystem {
 public:
  virtual ~ControlSystem() = default;
  virtual int state_dim() const = 0;
  virtual int control_dim() const = 0;
  virtual Vec<Scalar> step(const Vec<Scalar>& x, const Vec<Scalar>& u) const = 0;
  // Jacobians of step() with respect to x (n x n) and u (n x m).
  virtual void linearize(const Vec<Scalar>& x, const Vec<Scalar>& u,
                         Mat<Scalar>& fx, Mat<Scalar>& fu) const = 0;
};

template <typename Scalar = double>
class StageCost {
 public:
  virtual ~StageCost() = default;
  virtual Scalar value(const Vec<Scalar>& x, const Vec<Scalar>& u) const = 0;
  virtual void gradient(const Vec<Scalar>& x, const Vec<Scalar>& u,
                        Vec<Scalar>& lx, Vec<Scalar>& lu) const = 0;
};

template <typename Scalar = double>
class TerminalCost {
 public:
  virtual ~TerminalCost() = default;
  virtual Scalar value(const Vec<Scalar>& x) const = 0;
  virtual Scalar value_and_gradient(const Vec<Scalar>& x,
                                    Vec<Scalar>& grad) const = 0;
};

// x+ = Fx + Gu
template <typename Scalar = double>
class LinearSystem final : public ControlSystem<Scalar> {
 public:
  LinearSystem(Mat<Scalar> F, Mat<Scalar> G) : F_(std::move(F)), G_(std::move(G)) {
    if (F_.rows() != F_.cols() || G_.rows() != F_.rows()) {
      throw std::invalid_argument("linear system: inconsistent shapes");
    }
  }
  int state_dim() const override { return static_cast<int>(F_.rows()); }
  int control_dim() const override { return static_cast<int>(G_.cols()); }
  Vec<Scalar> step(const Vec<Scalar>& x, const Vec<Scalar>& u) const override {
    return F_ * x + G_ * u;
  }
  void linearize(const Vec<Scalar>&, const Vec<Scalar>&, Mat<Scalar>& fx,
                 Mat<Scalar>& fu) const override {
    fx = F_;
    fu = G_;
  }

 private:
  Mat<Scalar> F_, G_;
};

// l(x, u) = (x'Qx + 2x'Su + u'Ru) / 2
template <typename Scalar = double>
class QuadraticStageCost final : public StageCost<Scalar> {
 public:
  QuadraticStageCost(Eigen::MatrixXd Q, Eigen::MatrixXd S, Eigen::MatrixXd R)
      : Q_(std::move(Q)), S_(std::move(S)), R_(std::move(R)) {
    if (Q_.rows() != Q_.cols() || R_.rows() != R_.cols() ||
        S_.rows() != Q_.rows() || S_.cols() != R_.rows()) {
      throw std::invalid_argument("quadratic stage cost: inconsistent shapes");
    }
  }

  Scalar value(const Vec<Scalar>& x, const Vec<Scalar>& u) const override {
    const Mat<Scalar> Q = Q_.cast<Scalar>(), S = S_.cast<Scalar>(),
                      R = R_.cast<Scalar>();
    return Scalar(0.5) * (x.dot(Q * x) + Scalar(2) * x.dot(S * u) + u.dot(R * u));
  }

  void gradient(const Vec<Scalar>& x, const Vec<Scalar>& u, Vec<Scalar>& lx,
                Vec<Scalar>& lu) const override {
    const Mat<Scalar> Q = Q_.cast<Scalar>(), S = S_.cast<Scalar>(),
                      R = R_.cast<Scalar>();
    lx = Q * x + S * u;
    lu = S.transpose() * x + R * u;
  }

  // The same cost as a polynomial in the stacked variables (x, u), with
  // coefficient type T.
  template <typename T = double>
  BasicPolyBundle<T> as_polynomial() const {
    const int n = static_cast<int>(Q_.rows());
    const int m = static_cast<int>(R_.rows());
    Eigen::MatrixXd H(n + m, n + m);
    H << Q_, S_, S_.transpose(), R_;
    BasicPolyBundle<T> p(n + m, 2, 2);
    Exponent e(static_cast<std::size_t>(n + m), 0);
    for (int a = 0; a < n + m; ++a) {
      for (int b = a; b < n + m; ++b) {
        e.assign(e.size(), 0);
        e[a] += 1;
        e[b] += 1;
        p.set_coeff(e, T(a == b ? 0.5 * H(a, a) : 0.5 * (H(a, b) + H(b, a))));
      }
    }
    return p;
  }

  const Eigen::MatrixXd& Q() const { return Q_; }
  const Eigen::MatrixXd& S() const { return S_; }
  const Eigen::MatrixXd& R() const { return R_; }

 private:
  Eigen::MatrixXd Q_, S_, R_;
};

// Terminal cost given by an explicit polynomial.
template <typename Scalar = double>
class PolynomialTerminalCost final : public TerminalCost<Scalar> {
 public:
  explicit PolynomialTerminalCost(PolyBundle p) : p_(std::move(p)) {}

  Scalar value(const Vec<Scalar>& x) const override {
    return eval<Scalar>(p_, {x.data(), static_cast<std::size_t>(x.size())});
  }

  Scalar value_and_gradient(const Vec<Scalar>& x,
                            Vec<Scalar>& grad) const override {
    grad.resize(x.size());
    return eval_with_gradient<Scalar>(
        p_, {x.data(), static_cast<std::size_t>(x.size())},
        {grad.data(), static_cast<std::size_t>(grad.size())});
  }

  const PolyBundle& polynomial() const { return p_; }

 private:
  PolyBundle p_;
};

// Vector of polynomials evaluated componentwise, u = kappa(x).
template <typename Scalar, typename T>
Vec<Scalar> eval_map(const std::vector<BasicPolyBundle<T>>& rows,
                     const Vec<Scalar>& x) {
  Vec<Scalar> out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out[static_cast<Eigen::Index>(i)] =
        eval<Scalar>(rows[i], {x.data(), static_cast<std::size_t>(x.size())});
  }
  return out;
}

}  // namespace ahmpc
