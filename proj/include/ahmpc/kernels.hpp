#pragma once

// Data-parallel kernels. Each OpenMP kernel has a serial reference
// implementation with the same contract; tests compare the two and the
// benchmark target times them.

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "ahmpc/poly.hpp"

namespace ahmpc {

// Index table for products of degree-da and degree-db monomials in n
// variables: entry [i * size(db) + j] is the graded-lex index of
// basis(da)[i] + basis(db)[j] within basis(da + db). Cached and immutable.
const std::vector<std::uint32_t>& product_table(int n, int da, int db);

// Matrix S with S * coeffs(p) = coeffs(p o A) for homogeneous p of degree k.
// A is (old vars) x (new vars); S is size(new, k) x size(old, k).
template <typename T>
using DenseMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;

template <typename T>
DenseMatrix<T> substitution_matrix(const DenseMatrix<T>& A, int k);
template <typename T>
DenseMatrix<T> substitution_matrix_serial(const DenseMatrix<T>& A, int k);

// Evaluates p at every column of `points`.
Eigen::VectorXd eval_batch(const PolyBundle& p, const Eigen::MatrixXd& points);
Eigen::VectorXd eval_batch_serial(const PolyBundle& p,
                                  const Eigen::MatrixXd& points);

int max_threads();

}  // namespace ahmpc
