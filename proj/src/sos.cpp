#include "ahmpc/sos.hpp"

#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <string>

#include "ahmpc/system.hpp"

namespace ahmpc {
namespace {

Eigen::MatrixXd hessian_of_quadratic(const PolyBundle& V) {
  const int n = V.num_vars();
  const auto& q = V.term(2);
  Eigen::MatrixXd P(n, n);
  for (std::size_t m = 0; m < q.size(); ++m) {
    const Exponent& e = q.basis()[m];
    int a = -1, b = -1;
    for (int i = 0; i < n; ++i) {
      if (e[i] == 2) a = b = i;
      if (e[i] == 1) (a < 0 ? a : b) = i;
    }
    if (a == b) {
      P(a, a) = 2 * q.coeffs()[m];
    } else {
      P(a, b) = P(b, a) = q.coeffs()[m];
    }
  }
  return P;
}

}  // namespace

SquareCompletion complete_squares(const PolyBundle& V) {
  if (V.empty() || V.min_degree() != 2 || V.max_degree() < 2) {
    throw std::invalid_argument("complete_squares: V must have degrees 2..d+1");
  }
  const int n = V.num_vars();
  const int d = V.max_degree() - 1;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(hessian_of_quadratic(V));
  if (eig.info() != Eigen::Success) {
    throw NumericalError("complete_squares: eigendecomposition failed");
  }
  SquareCompletion c;
  c.lambda = eig.eigenvalues().reverse();
  c.T = eig.eigenvectors().rowwise().reverse();
  if (c.lambda[n - 1] <= 0) {
    throw std::invalid_argument(
        "complete_squares: quadratic part not positive definite (eigenvalue " +
        std::to_string(c.lambda[n - 1]) + ")");
  }
  // Fix the sign of each eigenvector so the result is reproducible.
  for (int j = 0; j < n; ++j) {
    Eigen::Index k;
    c.T.col(j).cwiseAbs().maxCoeff(&k);
    if (c.T(k, j) < 0) c.T.col(j) *= -1;
  }

  const PolyBundle Vz = compose_linear<double>(V, c.T);
  for (int j = 0; j < n; ++j) {
    PolyBundle delta(n, 1, d);
    delta.term(1).coeffs()[j] = 1.0;
    c.deltas.push_back(std::move(delta));
  }

  // Degree by degree: the degree-(e+1) residual is cancelled by the degree-e
  // parts of the deltas, each monomial going to the delta of its first
  // variable.
  for (int e = 2; e <= d; ++e) {
    CoeffVector<double> r = Vz.term(e + 1).coeffs();
    for (int j = 0; j < n; ++j) {
      const PolyBundle sq = mul_trunc(c.deltas[j], c.deltas[j], e + 1);
      r -= 0.5 * c.lambda[j] * sq.term(e + 1).coeffs();
    }
    const auto& basis = Vz.term(e + 1).basis();
    Exponent mu;
    for (std::size_t m = 0; m < basis.size(); ++m) {
      mu = basis[m];
      int j = 0;
      while (mu[j] == 0) ++j;
      mu[j] -= 1;
      c.deltas[j].term(e).set_coeff(mu, r[m] / c.lambda[j]);
    }
  }

  c.W = compose_linear<double>(completion_in_z(c), c.T.transpose());
  return c;
}

PolyBundle completion_in_z(const SquareCompletion& c) {
  const int n = static_cast<int>(c.lambda.size());
  const int d = c.deltas.front().max_degree();
  PolyBundle Wz(n, 2, 2 * d);
  for (int j = 0; j < n; ++j) {
    Wz += 0.5 * c.lambda[j] * mul_trunc(c.deltas[j], c.deltas[j], 2 * d);
  }
  return Wz;
}

double truncation_check(const SquareCompletion& c, const PolyBundle& V) {
  if (c.W.num_vars() != V.num_vars() || c.W.max_degree() != 2 * (V.max_degree() - 1)) {
    throw std::invalid_argument("truncation_check: completion does not match V");
  }
  const int top = V.max_degree();
  return max_coeff_diff(c.W.restricted(2, top), V.restricted(2, top));
}

void write_completion(std::ostream& os, const SquareCompletion& c) {
  char buf[32];
  os << "lambda =";
  for (double l : c.lambda) {
    std::snprintf(buf, sizeof buf, " %.17g", l);
    os << buf;
  }
  os << '\n';
  for (Eigen::Index i = 0; i < c.T.rows(); ++i) {
    os << "T_" << i + 1 << " =";
    for (Eigen::Index j = 0; j < c.T.cols(); ++j) {
      std::snprintf(buf, sizeof buf, " %.17g", c.T(i, j));
      os << buf;
    }
    os << '\n';
  }
  write_dump(os, c.W);
}

}  // namespace ahmpc
