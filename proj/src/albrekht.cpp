#include "ahmpc/albrekht.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>
#include <type_traits>

#include <Eigen/Eigenvalues>

#include "ahmpc/jet.hpp"
#include "ahmpc/kernels.hpp"
#include "ahmpc/quad.hpp"

namespace ahmpc {

namespace {

double max_abs(const Eigen::MatrixXd& A) {
  return A.size() == 0 ? 0.0 : A.cwiseAbs().maxCoeff();
}

bool is_symmetric(const Eigen::MatrixXd& A) {
  return max_abs(A - A.transpose()) <= 1e-12 * std::max(1.0, max_abs(A));
}

void validate(const LQRData& lqr) {
  const auto n = lqr.F.rows();
  const auto m = lqr.G.cols();
  if (lqr.F.cols() != n || lqr.G.rows() != n || lqr.Q.rows() != n ||
      lqr.Q.cols() != n || lqr.S.rows() != n || lqr.S.cols() != m ||
      lqr.R.rows() != m || lqr.R.cols() != m) {
    throw std::invalid_argument("LQR data: inconsistent matrix shapes");
  }
  if (!is_symmetric(lqr.Q)) throw std::invalid_argument("Q is not symmetric");
  if (!is_symmetric(lqr.R)) throw std::invalid_argument("R is not symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(lqr.R);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("R is not positive definite");
  }
}

// Discrete Lyapunov equation X = A'XA + C via the Kronecker form.
template <typename Scalar>
Mat<Scalar> solve_discrete_lyapunov(const Mat<Scalar>& A, const Mat<Scalar>& C) {
  const auto n = A.rows();
  Mat<Scalar> kron(n * n, n * n);
  const Mat<Scalar> At = A.transpose();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      kron.block(i * n, j * n, n, n) = At(i, j) * At;
    }
  }
  // vec(A'XA) = (A' kron A') vec(X) for column-major vec.
  const Mat<Scalar> lhs = Mat<Scalar>::Identity(n * n, n * n) - kron;
  const Vec<Scalar> vecC = C.reshaped();
  const Vec<Scalar> vecX = lhs.partialPivLu().solve(vecC);
  Mat<Scalar> X = vecX.reshaped(n, n);
  return Scalar(0.5) * (X + X.transpose());
}

}  // namespace

double spectral_radius(const Eigen::MatrixXd& A) {
  if (A.size() == 0) return 0.0;
  Eigen::EigenSolver<Eigen::MatrixXd> es(A, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

Eigen::MatrixXd lqr_gain(const LQRData& lqr, const Eigen::MatrixXd& P) {
  const Eigen::MatrixXd H = lqr.R + lqr.G.transpose() * P * lqr.G;
  const Eigen::MatrixXd rhs = lqr.G.transpose() * P * lqr.F + lqr.S.transpose();
  return -H.ldlt().solve(rhs);
}

double dare_residual(const LQRData& lqr, const Eigen::MatrixXd& P) {
  const Eigen::MatrixXd H = lqr.R + lqr.G.transpose() * P * lqr.G;
  const Eigen::MatrixXd B = lqr.G.transpose() * P * lqr.F + lqr.S.transpose();
  const Eigen::MatrixXd rhs = lqr.F.transpose() * P * lqr.F -
                              B.transpose() * H.ldlt().solve(B) + lqr.Q;
  return max_abs(rhs - P);
}

RiccatiSolution solve_dare(const LQRData& lqr, const DareOptions& options) {
  validate(lqr);
  const auto n = lqr.F.rows();
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  const Eigen::LLT<Eigen::MatrixXd> r_llt(lqr.R);

  // Remove the cross term: u = v - R^{-1} S' x.
  const Eigen::MatrixXd RinvSt = r_llt.solve(lqr.S.transpose());
  Eigen::MatrixXd A = lqr.F - lqr.G * RinvSt;
  Eigen::MatrixXd G = lqr.G * r_llt.solve(lqr.G.transpose());
  Eigen::MatrixXd H = lqr.Q - lqr.S * RinvSt;
  G = 0.5 * (G + G.transpose());
  H = 0.5 * (H + H.transpose());

  bool converged = false;
  for (int it = 0; it < options.max_iterations; ++it) {
    const auto W = (I + G * H).partialPivLu();
    const Eigen::MatrixXd WinvA = W.solve(A);
    const Eigen::MatrixXd WinvG = W.solve(G);
    Eigen::MatrixXd H_next = H + A.transpose() * H * WinvA;
    Eigen::MatrixXd G_next = G + A * WinvG * A.transpose();
    A = A * WinvA;
    H_next = 0.5 * (H_next + H_next.transpose());
    G = 0.5 * (G_next + G_next.transpose());
    const double change = max_abs(H_next - H);
    H = std::move(H_next);
    if (!H.allFinite()) break;
    if (change <= 1e-15 * std::max(1.0, max_abs(H))) {
      converged = true;
      break;
    }
  }

  RiccatiSolution sol;
  sol.P = H;
  sol.K = lqr_gain(lqr, sol.P);
  sol.spectral_radius = spectral_radius(lqr.F + lqr.G * sol.K);
  sol.residual = dare_residual(lqr, sol.P);

  // Newton refinement from the doubling estimate.
  for (int r = 0; r < options.max_refinements && sol.P.allFinite() &&
                  sol.spectral_radius < 1.0 &&
                  sol.residual > 1e-13 * std::max(1.0, max_abs(sol.P));
       ++r) {
    const Eigen::MatrixXd Acl = lqr.F + lqr.G * sol.K;
    const Eigen::MatrixXd C = lqr.Q + sol.K.transpose() * lqr.R * sol.K +
                              lqr.S * sol.K + sol.K.transpose() * lqr.S.transpose();
    Eigen::MatrixXd P = solve_discrete_lyapunov<double>(Acl, C);
    const double res = dare_residual(lqr, P);
    if (!(res < sol.residual)) break;
    sol.P = std::move(P);
    sol.K = lqr_gain(lqr, sol.P);
    sol.spectral_radius = spectral_radius(lqr.F + lqr.G * sol.K);
    sol.residual = res;
  }

  if (!sol.P.allFinite() || !(sol.spectral_radius < 1.0) ||
      !(sol.residual <= 1e-9)) {
    std::ostringstream msg;
    msg << "Riccati iteration did not reach a stabilizing solution"
        << (converged ? "" : " within the iteration cap")
        << ": spectral radius of F+GK = " << sol.spectral_radius
        << ", residual = " << sol.residual;
    throw NumericalError(msg.str());
  }
  return sol;
}

template <typename T>
Mat<T> lyapunov_operator(const std::type_identity_t<Mat<T>>& A, int k) {
  if (A.rows() != A.cols()) {
    throw std::invalid_argument("lyapunov_operator needs a square matrix");
  }
  Mat<T> L = -substitution_matrix<T>(A, k);
  L.diagonal().array() += T(1);
  return L;
}

template <typename T>
BasicLQRData<T> lqr_data(const BasicTaylorMap<T>& f, const BasicPolyBundle<T>& l) {
  const int n = f.n_out;
  const int m = f.n_in - f.n_out;
  if (n < 1 || m < 1 || static_cast<int>(f.rows.size()) != n) {
    throw std::invalid_argument("Taylor map must have n rows in n+m inputs");
  }
  if (l.num_vars() != n + m) {
    throw std::invalid_argument("Lagrangian arity must be n+m");
  }
  BasicLQRData<T> lqr;
  lqr.F.resize(n, n);
  lqr.G.resize(n, m);
  Exponent e(static_cast<std::size_t>(n + m), 0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n + m; ++j) {
      e.assign(e.size(), 0);
      e[j] = 1;
      const T c = f.rows[i].coeff(e);
      if (j < n) {
        lqr.F(i, j) = c;
      } else {
        lqr.G(i, j - n) = c;
      }
    }
  }
  Mat<T> H(n + m, n + m);
  for (int a = 0; a < n + m; ++a) {
    for (int b = a; b < n + m; ++b) {
      e.assign(e.size(), 0);
      e[a] += 1;
      e[b] += 1;
      const T c = l.coeff(e);
      H(a, b) = H(b, a) = (a == b) ? T(2) * c : c;
    }
  }
  lqr.Q = H.topLeftCorner(n, n);
  lqr.S = H.topRightCorner(n, m);
  lqr.R = H.bottomRightCorner(m, m);
  return lqr;
}

namespace {

template <typename T>
void check_no_constant_or_linear(const BasicTaylorMap<T>& f,
                                 const BasicPolyBundle<T>& l) {
  const std::vector<int> zero(static_cast<std::size_t>(f.n_in), 0);
  for (const auto& row : f.rows) {
    if (row.num_vars() != f.n_in && !row.empty()) {
      throw std::invalid_argument("Taylor map row arity mismatch");
    }
    if (row.coeff(zero) != 0) {
      throw std::invalid_argument("dynamics must vanish at the operating point");
    }
  }
  if (l.coeff(zero) != 0) {
    throw std::invalid_argument("Lagrangian must vanish at the operating point");
  }
  if (l.has_degree(1)) {
    const auto& c = l.term(1).coeffs();
    for (Eigen::Index i = 0; i < c.size(); ++i) {
      if (c[i] != 0) {
        throw std::invalid_argument("Lagrangian must have no linear part");
      }
    }
  }
}

// Newton (Hewer) steps in T from the double solution: the gain is fixed,
// the closed-loop Lyapunov equation solved, the gain updated.
template <typename T>
void refine_riccati(const BasicLQRData<T>& lqr, Mat<T>& P, Mat<T>& K) {
  for (int it = 0; it < 3; ++it) {
    const Mat<T> Acl = lqr.F + lqr.G * K;
    const Mat<T> C = lqr.Q + K.transpose() * lqr.R * K + lqr.S * K +
                     K.transpose() * lqr.S.transpose();
    P = solve_discrete_lyapunov<T>(Acl, C);
    const Mat<T> H = lqr.R + lqr.G.transpose() * P * lqr.G;
    K = -H.ldlt().solve(lqr.G.transpose() * P * lqr.F + lqr.S.transpose());
  }
}

}  // namespace

template <typename T>
BasicValueFeedbackSeries<T> albrekht(const BasicTaylorMap<T>& f,
                                     const BasicPolyBundle<T>& l, int d) {
  if (d < 1) throw std::invalid_argument("series degree must be at least 1");
  check_no_constant_or_linear(f, l);
  const BasicLQRData<T> lqr = lqr_data(f, l);
  LQRData lqr_d;
  lqr_d.F = lqr.F.template cast<double>();
  lqr_d.G = lqr.G.template cast<double>();
  lqr_d.Q = lqr.Q.template cast<double>();
  lqr_d.S = lqr.S.template cast<double>();
  lqr_d.R = lqr.R.template cast<double>();
  const RiccatiSolution ric = solve_dare(lqr_d);
  const int n = f.n_out;
  const int m = f.n_in - f.n_out;

  BasicValueFeedbackSeries<T> s;
  s.n = n;
  s.m = m;
  s.d = d;
  s.P = ric.P.template cast<T>();
  s.K = ric.K.template cast<T>();
  if constexpr (!std::is_same_v<T, double>) refine_riccati(lqr, s.P, s.K);
  s.V = BasicPolyBundle<T>(n, 2, d + 1);
  {
    Exponent e(static_cast<std::size_t>(n), 0);
    for (int a = 0; a < n; ++a) {
      for (int b = a; b < n; ++b) {
        e.assign(e.size(), 0);
        e[a] += 1;
        e[b] += 1;
        s.V.set_coeff(e, a == b ? T(0.5) * s.P(a, a) : s.P(a, b));
      }
    }
  }
  for (int k = 0; k < m; ++k) {
    BasicPolyBundle<T> row(n, 1, d);
    row.term(1).coeffs() = s.K.row(k).transpose();
    s.kappa.push_back(std::move(row));
  }
  if (d == 1) return s;

  const Mat<T> Hu = lqr.R + lqr.G.transpose() * s.P * lqr.G;
  const Eigen::LLT<Mat<T>> hu_llt(Hu);
  if (hu_llt.info() != Eigen::Success) {
    throw NumericalError("R + G'PG is not positive definite");
  }
  const Mat<T> Acl = lqr.F + lqr.G * s.K;

  int f_degree = 0;
  for (const auto& row : f.rows) f_degree = std::max(f_degree, row.max_degree());
  const int xu_capacity = std::max(f_degree, l.max_degree());

  std::vector<std::vector<BasicPolyBundle<T>>> dfdu(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < m; ++k) {
      dfdu[i].push_back(partial_derivative(f.rows[i], n + k));
    }
  }
  std::vector<BasicPolyBundle<T>> dldu;
  for (int k = 0; k < m; ++k) dldu.push_back(partial_derivative(l, n + k));

  using J = BasicJet<T>;
  for (int j = 2; j <= d; ++j) {
    const int order = j + 1;
    // Known quantities: substitute the partial series, with V^[j+1] and
    // kappa^[j] still zero, and read off the target degrees.
    std::vector<J> xu;
    for (int i = 0; i < n; ++i) xu.push_back(J::variable(n, order, i, T(0)));
    for (int k = 0; k < m; ++k) xu.emplace_back(s.kappa[k].restricted(0, order));
    const BasicJetSubstitution<T> sub_xu(xu, xu_capacity);

    std::vector<J> next;
    for (int i = 0; i < n; ++i) next.push_back(sub_xu.apply(f.rows[i]));
    const BasicJetSubstitution<T> sub_next(next, d + 1);

    J r1 = sub_next.apply(s.V) + sub_xu.apply(l);
    r1 -= J(s.V.restricted(0, order));
    const Vec<T> rhs = r1.series().term(order).coeffs();

    const Mat<T> L = lyapunov_operator<T>(Acl, order);
    const Eigen::FullPivLU<Mat<T>> lu(L);
    if (!lu.isInvertible()) {
      throw NumericalError("Lyapunov operator singular at degree " +
                           std::to_string(order));
    }
    s.V.term(order).coeffs() = lu.solve(rhs);

    std::vector<J> grad_next;
    for (int i = 0; i < n; ++i) {
      grad_next.push_back(sub_next.apply(partial_derivative(s.V, i)));
    }
    Mat<T> r2(m, static_cast<Eigen::Index>(monomial_count(n, j)));
    for (int k = 0; k < m; ++k) {
      J acc = sub_xu.apply(dldu[k]);
      for (int i = 0; i < n; ++i) acc += grad_next[i] * sub_xu.apply(dfdu[i][k]);
      r2.row(k) = acc.series().term(j).coeffs().transpose();
    }
    const Mat<T> kappa_j = -hu_llt.solve(r2);
    for (int k = 0; k < m; ++k) {
      s.kappa[k].term(j).coeffs() = kappa_j.row(k).transpose();
    }
  }
  if (!s.V.all_finite()) throw NumericalError("non-finite series coefficients");
  return s;
}

#define AHMPC_INSTANTIATE_ALBREKHT(T)                                         \
  template Mat<T> lyapunov_operator<T>(const Mat<T>&, int);                      \
  template BasicLQRData<T> lqr_data(const BasicTaylorMap<T>&,                 \
                                    const BasicPolyBundle<T>&);               \
  template BasicValueFeedbackSeries<T> albrekht(const BasicTaylorMap<T>&,     \
                                                const BasicPolyBundle<T>&, int);

AHMPC_INSTANTIATE_ALBREKHT(double)
AHMPC_INSTANTIATE_ALBREKHT(Quad)

}  // namespace ahmpc
