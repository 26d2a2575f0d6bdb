#include "ahmpc/kernels.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <tuple>

#include "ahmpc/quad.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ahmpc {

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

const std::vector<std::uint32_t>& product_table(int n, int da, int db) {
  static std::mutex mutex;
  static std::map<std::tuple<int, int, int>,
                  std::unique_ptr<const std::vector<std::uint32_t>>>
      cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[{n, da, db}];
  if (!slot) {
    const auto ba = MonomialBasis::shared(n, da);
    const auto bb = MonomialBasis::shared(n, db);
    auto table = std::make_unique<std::vector<std::uint32_t>>();
    table->reserve(ba->size() * bb->size());
    Exponent sum(static_cast<std::size_t>(n));
    for (const auto& ea : ba->exponents()) {
      for (const auto& eb : bb->exponents()) {
        for (int i = 0; i < n; ++i) sum[i] = ea[i] + eb[i];
        table->push_back(
            static_cast<std::uint32_t>(graded_lex_rank(sum, da + db)));
      }
    }
    slot = std::move(table);
  }
  return *slot;
}

namespace {

template <typename T>
BasicHomogeneousPoly<T> linear_form(const DenseMatrix<T>& A, int row) {
  BasicHomogeneousPoly<T> out(static_cast<int>(A.cols()), 1);
  out.coeffs() = A.row(row).transpose();
  return out;
}

template <typename T>
BasicHomogeneousPoly<T> times(const BasicHomogeneousPoly<T>& p,
                              const BasicHomogeneousPoly<T>& q) {
  BasicHomogeneousPoly<T> out(p.num_vars(), p.degree() + q.degree());
  accumulate_product(p, q, out);
  return out;
}

void check_substitution_args(Eigen::Index rows, Eigen::Index cols, int k) {
  if (rows < 1 || cols < 1) {
    throw std::invalid_argument("substitution matrix needs a nonempty map");
  }
  if (k < 0) throw std::invalid_argument("negative degree");
}

}  // namespace

template <typename T>
DenseMatrix<T> substitution_matrix(const DenseMatrix<T>& A, int k) {
  check_substitution_args(A.rows(), A.cols(), k);
  const int n_old = static_cast<int>(A.rows());
  const int n_new = static_cast<int>(A.cols());
  const auto old_basis = MonomialBasis::shared(n_old, k);
  const auto new_size = static_cast<Eigen::Index>(monomial_count(n_new, k));
  const auto cols = static_cast<Eigen::Index>(old_basis->size());
  DenseMatrix<T> S(new_size, cols);

  std::vector<BasicHomogeneousPoly<T>> forms;
  for (int i = 0; i < n_old; ++i) forms.push_back(linear_form(A, i));
  // Warm the product-table cache outside the parallel region.
  for (int t = 0; t < k; ++t) product_table(n_new, t, 1);

#pragma omp parallel for schedule(dynamic, 4)
  for (Eigen::Index c = 0; c < cols; ++c) {
    const Exponent& beta = (*old_basis)[static_cast<std::size_t>(c)];
    BasicHomogeneousPoly<T> acc(n_new, 0);
    acc.coeffs()[0] = T(1);
    for (int i = 0; i < n_old; ++i) {
      for (int r = 0; r < beta[i]; ++r) acc = times(acc, forms[i]);
    }
    S.col(c) = acc.coeffs();
  }
  return S;
}

template <typename T>
DenseMatrix<T> substitution_matrix_serial(const DenseMatrix<T>& A, int k) {
  check_substitution_args(A.rows(), A.cols(), k);
  const int n_old = static_cast<int>(A.rows());
  const int n_new = static_cast<int>(A.cols());
  std::vector<BasicHomogeneousPoly<T>> forms;
  for (int i = 0; i < n_old; ++i) forms.push_back(linear_form(A, i));

  // Column alpha is built from column alpha - e_i of the previous degree,
  // i being the first variable with a nonzero exponent.
  std::vector<BasicHomogeneousPoly<T>> previous;
  previous.emplace_back(n_new, 0);
  previous.back().coeffs()[0] = T(1);
  Exponent reduced;
  for (int t = 1; t <= k; ++t) {
    const auto basis = MonomialBasis::shared(n_old, t);
    std::vector<BasicHomogeneousPoly<T>> current;
    current.reserve(basis->size());
    for (const auto& alpha : basis->exponents()) {
      int first = 0;
      while (alpha[first] == 0) ++first;
      reduced = alpha;
      reduced[first] -= 1;
      current.push_back(
          times(previous[graded_lex_rank(reduced, t - 1)], forms[first]));
    }
    previous = std::move(current);
  }
  DenseMatrix<T> S(static_cast<Eigen::Index>(monomial_count(n_new, k)),
                   static_cast<Eigen::Index>(previous.size()));
  for (std::size_t c = 0; c < previous.size(); ++c) {
    S.col(static_cast<Eigen::Index>(c)) = previous[c].coeffs();
  }
  return S;
}

template DenseMatrix<double> substitution_matrix(const DenseMatrix<double>&, int);
template DenseMatrix<double> substitution_matrix_serial(const DenseMatrix<double>&,
                                                        int);
template DenseMatrix<Quad> substitution_matrix(const DenseMatrix<Quad>&, int);
template DenseMatrix<Quad> substitution_matrix_serial(const DenseMatrix<Quad>&, int);

Eigen::VectorXd eval_batch(const PolyBundle& p, const Eigen::MatrixXd& points) {
  detail::check_arity(p.num_vars(), p.empty(),
                      static_cast<std::size_t>(points.rows()));
  Eigen::VectorXd out(points.cols());
#pragma omp parallel for schedule(static)
  for (Eigen::Index c = 0; c < points.cols(); ++c) {
    out[c] = eval<double>(
        p, std::span<const double>(points.col(c).data(),
                                   static_cast<std::size_t>(points.rows())));
  }
  return out;
}

Eigen::VectorXd eval_batch_serial(const PolyBundle& p,
                                  const Eigen::MatrixXd& points) {
  detail::check_arity(p.num_vars(), p.empty(),
                      static_cast<std::size_t>(points.rows()));
  Eigen::VectorXd out(points.cols());
  for (Eigen::Index c = 0; c < points.cols(); ++c) {
    out[c] = eval<double>(
        p, std::span<const double>(points.col(c).data(),
                                   static_cast<std::size_t>(points.rows())));
  }
  return out;
}

}  // namespace ahmpc
