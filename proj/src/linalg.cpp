#include "bdie/linalg.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace bdie::linalg {

Vector lu_solve(const Matrix& a, const Vector& b) {
  if (a.rows() != a.cols() || a.rows() != b.size())
    throw std::invalid_argument("lu_solve: dimension mismatch");
  Eigen::PartialPivLU<Matrix> lu(a);
  const Vector x = lu.solve(b);
  if (!x.allFinite())
    throw std::runtime_error("lu_solve: pivot failure (singular matrix)");
  return x;
}

SvdResult svd(const Matrix& a) {
  Eigen::BDCSVD<Matrix> dec(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return {dec.matrixU(), dec.singularValues(), dec.matrixV()};
}

Vector lstsq(const Matrix& a, const Vector& b) {
  if (a.rows() != b.size()) throw std::invalid_argument("lstsq: dimension mismatch");
  Eigen::BDCSVD<Matrix> dec(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return dec.solve(b);
}

double condition_estimate(const Matrix& a) {
  const Vector s = svd(a).sigma;
  if (s.size() == 0 || s(s.size() - 1) == 0.0) return std::numeric_limits<double>::infinity();
  return s(0) / s(s.size() - 1);
}

void dump_csv(std::ostream& os, const std::string& label, const Matrix& a) {
  os << label << "," << a.rows() << "," << a.cols() << "\n";
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      if (j) os << ",";
      os << a(i, j);
    }
    os << "\n";
  }
}

}  // namespace bdie::linalg
