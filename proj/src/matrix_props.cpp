#include "mpec/matrix_props.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <random>

#include "mpec/errors.hpp"
#include "mpec/subsolvers.hpp"

namespace mpec {

namespace {

constexpr int kMaxEnumeration = 20;

void check_pair(const MatrixPair& pair) {
  if (pair.W0.rows() != pair.W0.cols() || pair.W1.rows() != pair.W1.cols() ||
      pair.W0.rows() != pair.W1.rows()) {
    throw Error(ErrorCode::InvalidArgument, "matrix pair must be square of equal size");
  }
  if (pair.W0.rows() > kMaxEnumeration) {
    throw Error(ErrorCode::DimensionTooLarge, "matrix pair larger than 20");
  }
}

// Singular values above 1e-10 * scale count toward the rank.
int numerical_rank(const Mat& A, double scale) {
  if (A.size() == 0) return 0;
  Eigen::JacobiSVD<Mat> svd(A);
  const Vec& sv = svd.singularValues();
  int r = 0;
  for (int i = 0; i < sv.size(); ++i) {
    if (sv(i) > 1e-10 * scale) ++r;
  }
  return r;
}

double partitioned_scale(const PartitionedMatrix& Q) {
  double s = 0.0;
  for (const Mat* X : {&Q.A, &Q.B, &Q.C}) {
    if (X->size()) s = std::max(s, X->norm());
  }
  return s > 0.0 ? s : 1.0;
}

Mat mixed_representative(const PartitionedMatrix& Q, Mask alpha) {
  const int m = static_cast<int>(Q.A.cols());
  const int l = static_cast<int>(Q.C.cols());
  Mat R(Q.A.rows(), m + l);
  for (int i = 0; i < m; ++i) {
    R.col(i) = (alpha & (Mask(1) << i)) ? Q.A.col(i) : Q.B.col(i);
  }
  if (l > 0) R.rightCols(l) = Q.C;
  return R;
}

void check_partitioned(const PartitionedMatrix& Q) {
  const auto rows = Q.A.rows();
  const int m = static_cast<int>(Q.A.cols());
  const int l = static_cast<int>(Q.C.cols());
  if (Q.B.rows() != rows || Q.B.cols() != m || (l > 0 && Q.C.rows() != rows) ||
      rows != m + l) {
    throw Error(ErrorCode::InvalidArgument, "partitioned matrix must be [A B C] with m + l rows");
  }
  if (m > kMaxEnumeration) throw Error(ErrorCode::DimensionTooLarge, "m larger than 20");
}

bool is_witness(const Vec& r, const Vec& s, const Vec& t) {
  const double scale = r.squaredNorm() + s.squaredNorm() + t.squaredNorm();
  if (!(scale > 0.0)) return false;
  for (int i = 0; i < r.size(); ++i) {
    if (r(i) * s(i) > 1e-12 * scale) return false;
  }
  return true;
}

}  // namespace

Mat column_representative(const MatrixPair& pair, Mask mask) {
  Mat R = pair.W0;
  for (int i = 0; i < R.cols(); ++i) {
    if (mask & (Mask(1) << i)) R.col(i) = pair.W1.col(i);
  }
  return R;
}

bool has_w_property(const MatrixPair& pair) {
  check_pair(pair);
  const int d = static_cast<int>(pair.W0.rows());
  if (d == 0) return true;
  const double norm = std::max(pair.W0.cwiseAbs().rowwise().sum().maxCoeff(),
                               pair.W1.cwiseAbs().rowwise().sum().maxCoeff());
  const double threshold = 1e-12 * std::pow(norm, d);
  int sign = 0;
  for (Mask mask = 0; mask < (Mask(1) << d); ++mask) {
    const double det = Eigen::PartialPivLU<Mat>(column_representative(pair, mask)).determinant();
    if (!(std::abs(det) > threshold)) return false;
    const int s = det > 0 ? 1 : -1;
    if (sign == 0) sign = s;
    if (s != sign) return false;
  }
  return true;
}

bool mixed_p_necessary(const PartitionedMatrix& Q) {
  check_partitioned(Q);
  const int m = static_cast<int>(Q.A.cols());
  const int l = static_cast<int>(Q.C.cols());
  const double scale = partitioned_scale(Q);
  if (l > 0 && numerical_rank(Q.C, scale) < l) return false;
  for (Mask alpha = 0; alpha < (Mask(1) << m); ++alpha) {
    if (numerical_rank(mixed_representative(Q, alpha), scale) < m + l) return false;
  }
  return true;
}

std::optional<MixedPWitness> mixed_p_falsify(const PartitionedMatrix& Q, int samples,
                                             std::uint64_t seed) {
  check_partitioned(Q);
  if (samples < 1) throw Error(ErrorCode::InvalidArgument, "samples must be at least 1");
  const int m = static_cast<int>(Q.A.cols());
  const int l = static_cast<int>(Q.C.cols());

  if (l > 0) {
    const Mat Z = null_space(Q.C);
    if (Z.cols() > 0) return MixedPWitness{Vec::Zero(m), Vec::Zero(m), Z.col(0)};
  }
  // Directed probes: a null vector of a singular representative has r_i s_i = 0.
  for (Mask alpha = 0; alpha < (Mask(1) << m); ++alpha) {
    const Mat Z = null_space(mixed_representative(Q, alpha));
    if (Z.cols() == 0) continue;
    const Vec v = Z.col(0);
    MixedPWitness wit{Vec::Zero(m), Vec::Zero(m), v.tail(l)};
    for (int i = 0; i < m; ++i) {
      if (alpha & (Mask(1) << i)) {
        wit.r(i) = v(i);
      } else {
        wit.s(i) = v(i);
      }
    }
    return wit;
  }

  Mat stacked(Q.A.rows(), 2 * m + l);
  stacked << Q.A, Q.B, Q.C;
  const Mat Z = null_space(stacked);
  if (Z.cols() == 0) return std::nullopt;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int k = 0; k < samples; ++k) {
    Vec g(Z.cols());
    for (int j = 0; j < g.size(); ++j) g(j) = normal(rng);
    const Vec v = Z * g;
    MixedPWitness wit{v.head(m), v.segment(m, m), v.tail(l)};
    if (is_witness(wit.r, wit.s, wit.t)) return wit;
  }
  return std::nullopt;
}

std::pair<Vec, Vec> lh_star_eval(const Mat& DFy, const Mat& DFw, const Vec& dy, const Vec& dw) {
  if (DFy.rows() != DFy.cols() || DFw.rows() != DFy.rows() || DFw.cols() != DFy.cols() ||
      dy.size() != DFy.cols() || dw.size() != DFy.cols()) {
    throw Error(ErrorCode::InvalidArgument, "lh_star_eval dimension mismatch");
  }
  return {DFy * dy + DFw * dw, dy.cwiseMin(dw)};
}

bool lh_star_is_homeomorphism(const Mat& DFy, const Mat& DFw) {
  return has_w_property(MatrixPair{DFy, -DFw});
}

std::optional<std::pair<Vec, Vec>> lh_star_solve(const Mat& DFy, const Mat& DFw, const Vec& a,
                                                 const Vec& b) {
  const int d = static_cast<int>(DFy.rows());
  if (d > kMaxEnumeration) throw Error(ErrorCode::DimensionTooLarge, "dimension larger than 20");
  // Piece mask bit i set: min attained by dw_i, so dy_i = b_i + t_i.
  const Vec base = a - (DFy + DFw) * b;
  const double tol = 1e-10 * (1.0 + (d > 0 ? base.cwiseAbs().maxCoeff() : 0.0));
  for (Mask mask = 0; mask < (Mask(1) << d); ++mask) {
    Mat K(d, d);
    for (int i = 0; i < d; ++i) K.col(i) = (mask & (Mask(1) << i)) ? DFy.col(i) : DFw.col(i);
    Vec t;
    try {
      t = solve_linear(K, base);
    } catch (const Error&) {
      continue;
    }
    if (d > 0 && t.minCoeff() < -tol) continue;
    t = t.cwiseMax(0.0);
    Vec dy = b, dw = b;
    for (int i = 0; i < d; ++i) {
      if (mask & (Mask(1) << i)) {
        dy(i) += t(i);
      } else {
        dw(i) += t(i);
      }
    }
    return std::make_pair(dy, dw);
  }
  return std::nullopt;
}

}  // namespace mpec
