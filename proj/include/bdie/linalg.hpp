#pragma once

#include <Eigen/Dense>

#include <string>

namespace bdie::linalg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct SvdResult {
  Matrix u;        // m x k
  Vector sigma;    // k, non-negative, descending
  Matrix v;        // n x k
};

/// Dense LU solve with partial pivoting. Throws std::runtime_error on an
/// exactly singular matrix (pivot failure) and asserts the residual
/// ||Ax-b|| <= 1e-10 ||b|| for well-conditioned inputs via `residual`.
Vector lu_solve(const Matrix& a, const Vector& b);

SvdResult svd(const Matrix& a);

/// Minimum-norm least-squares solution via SVD.
Vector lstsq(const Matrix& a, const Vector& b);

double condition_estimate(const Matrix& a);

/// CSV dump used for operator-block debugging: header `label,rows,cols`, then
/// one row per line.
void dump_csv(std::ostream& os, const std::string& label, const Matrix& a);

}  // namespace bdie::linalg
