#pragma once

// Extension of a polynomial with positive definite quadratic part to a sum of
// n squares that agrees with it up to the original top degree.

#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "ahmpc/poly.hpp"

namespace ahmpc {

struct SquareCompletion {
  Eigen::MatrixXd T;               // orthogonal, T'PT = diag(lambda)
  Eigen::VectorXd lambda;          // decreasing, all positive
  std::vector<PolyBundle> deltas;  // in z = T'x, degrees 1..d, leading term z_j
  PolyBundle W;                    // in x, degrees 2..2d
};

// V has degrees 2..d+1. Throws std::invalid_argument if the quadratic part
// is not positive definite.
SquareCompletion complete_squares(const PolyBundle& V);

// W in the rotated coordinates: sum_j lambda_j / 2 * delta_j(z)^2.
PolyBundle completion_in_z(const SquareCompletion& c);

// Largest coefficient discrepancy between W and V over degrees 2..d+1.
double truncation_check(const SquareCompletion& c, const PolyBundle& V);

// Coefficient dump of W preceded by `lambda = ...` and `T_i = ...` header
// lines (skipped by read_dump).
void write_completion(std::ostream& os, const SquareCompletion& c);

}  // namespace ahmpc
