#include <Eigen/LU>
#include <Eigen/SVD>
#include <cmath>

#include "mpec/errors.hpp"
#include "mpec/subsolvers.hpp"

namespace mpec {

Vec solve_linear(const Mat& A, const Vec& b) {
  if (A.rows() != A.cols()) {
    throw Error(ErrorCode::InvalidArgument, "solve_linear: matrix is not square");
  }
  if (A.rows() != b.size()) {
    throw Error(ErrorCode::InvalidArgument, "solve_linear: rhs size mismatch");
  }
  const int n = static_cast<int>(A.rows());
  if (n == 0) return Vec(0);

  const double scale = A.cwiseAbs().rowwise().sum().maxCoeff();
  Eigen::PartialPivLU<Mat> lu(A);
  const double min_pivot = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
  if (!(scale > 0.0) || min_pivot < 1e-12 * scale) {
    throw Error(ErrorCode::Singular, "solve_linear: pivot below 1e-12*||A||");
  }
  Vec x = lu.solve(b);
  // one step of iterative refinement
  const Vec residual = b - A * x;
  x += lu.solve(residual);
  return x;
}

Mat null_space(const Mat& A, double rel_tol) {
  const int n = static_cast<int>(A.cols());
  if (A.rows() == 0 || n == 0) return Mat::Identity(n, n);
  Eigen::JacobiSVD<Mat> svd(A, Eigen::ComputeFullV);
  const Vec& sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv(0) : 0.0;
  int rank = 0;
  if (smax > 1e-300) {
    for (int i = 0; i < sv.size(); ++i) {
      if (sv(i) > rel_tol * smax) ++rank;
    }
  }
  return svd.matrixV().rightCols(n - rank);
}

}  // namespace mpec
