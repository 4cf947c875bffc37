#include <Eigen/LU>
#include <cmath>
#include <vector>

#include "mpec/errors.hpp"
#include "mpec/subsolvers.hpp"

namespace mpec {

double lcp_tolerance(const Vec& q) {
  return 1e-10 * (1.0 + (q.size() > 0 ? q.cwiseAbs().maxCoeff() : 0.0));
}

namespace {

constexpr int kEnumerationLimit = 20;

Mat principal(const Mat& M, const std::vector<int>& idx) {
  Mat out(idx.size(), idx.size());
  for (size_t i = 0; i < idx.size(); ++i)
    for (size_t j = 0; j < idx.size(); ++j) out(i, j) = M(idx[i], idx[j]);
  return out;
}

// Builds (y, w) for the pattern "y_S free, w_S = 0, y_rest = 0" and checks the
// sign conditions at tolerance tol. Returns nullopt if the pattern fails.
std::optional<LcpSolution> pattern_solution(const Mat& M, const Vec& q, const std::vector<int>& S,
                                            double tol) {
  const int m = static_cast<int>(q.size());
  Vec y = Vec::Zero(m);
  if (!S.empty()) {
    Vec rhs(S.size());
    for (size_t i = 0; i < S.size(); ++i) rhs(i) = -q(S[i]);
    Vec yS;
    try {
      yS = solve_linear(principal(M, S), rhs);
    } catch (const Error&) {
      return std::nullopt;
    }
    for (size_t i = 0; i < S.size(); ++i) {
      if (yS(i) < -tol) return std::nullopt;
      y(S[i]) = std::max(0.0, yS(i));
    }
  }
  Vec w = M * y + q;
  std::vector<char> in_s(m, 0);
  for (int i : S) in_s[i] = 1;
  for (int i = 0; i < m; ++i) {
    if (in_s[i]) {
      if (std::abs(w(i)) > tol) return std::nullopt;
      w(i) = 0.0;
    } else {
      if (w(i) < -tol) return std::nullopt;
      w(i) = std::max(0.0, w(i));
    }
  }
  LcpSolution sol;
  sol.y = y;
  sol.w = w;
  return sol;
}

void pivot(Mat& T, int row, int col) {
  T.row(row) /= T(row, col);
  for (int i = 0; i < T.rows(); ++i) {
    if (i != row && T(i, col) != 0.0) T.row(i) -= T(i, col) * T.row(row);
  }
}

// Lexicographic minimum of (rhs_i, Binv_i) / T(i, col) over rows with a
// positive pivot entry; -1 signals a secondary ray.
int lexico_ratio_row(const Mat& T, int col, int m, int rhs_col) {
  constexpr double kPivotTol = 1e-12;
  int best = -1;
  for (int i = 0; i < m; ++i) {
    if (T(i, col) <= kPivotTol) continue;
    if (best < 0) {
      best = i;
      continue;
    }
    const double ai = T(i, col);
    const double ab = T(best, col);
    const double diff_rhs = T(i, rhs_col) / ai - T(best, rhs_col) / ab;
    if (diff_rhs < -1e-13) {
      best = i;
      continue;
    }
    if (diff_rhs > 1e-13) continue;
    for (int j = 0; j < m; ++j) {
      const double diff = T(i, j) / ai - T(best, j) / ab;
      if (diff < -1e-13) {
        best = i;
        break;
      }
      if (diff > 1e-13) break;
    }
  }
  return best;
}

}  // namespace

std::optional<LcpSolution> lcp_lemke(const Mat& M, const Vec& q) {
  const int m = static_cast<int>(q.size());
  const double tol = lcp_tolerance(q);
  if (m == 0 || q.minCoeff() >= 0.0) {
    LcpSolution sol;
    sol.y = Vec::Zero(m);
    sol.w = q;
    sol.method = LcpSolution::Method::Trivial;
    return sol;
  }

  // Columns: w (0..m-1), y (m..2m-1), z0 (2m), rhs (2m+1).
  const int z0 = 2 * m;
  const int rhs = 2 * m + 1;
  Mat T(m, 2 * m + 2);
  T.leftCols(m).setIdentity();
  T.middleCols(m, m) = -M;
  T.col(z0).setConstant(-1.0);
  T.col(rhs) = q;
  std::vector<int> basis(m);
  for (int i = 0; i < m; ++i) basis[i] = i;

  // z0 enters at the level of the most negative q; ties to the largest index.
  int row = 0;
  for (int i = 1; i < m; ++i) {
    if (q(i) <= q(row)) row = i;
  }
  pivot(T, row, z0);
  int leaving = basis[row];
  basis[row] = z0;
  int entering = leaving < m ? leaving + m : leaving - m;

  const int max_pivots = 1000 + 50 * m;
  int pivots = 1;
  for (; pivots < max_pivots; ++pivots) {
    row = lexico_ratio_row(T, entering, m, rhs);
    if (row < 0) return std::nullopt;
    pivot(T, row, entering);
    leaving = basis[row];
    basis[row] = entering;
    if (leaving == z0) break;
    entering = leaving < m ? leaving + m : leaving - m;
  }
  if (pivots >= max_pivots) return std::nullopt;

  Vec y = Vec::Zero(m);
  for (int i = 0; i < m; ++i) {
    if (basis[i] >= m && basis[i] < 2 * m) y(basis[i] - m) = std::max(0.0, T(i, rhs));
  }
  // Re-solve on the positive support for accuracy; fall back to the raw
  // tableau values when that principal block is singular.
  std::vector<int> support;
  for (int i = 0; i < m; ++i) {
    if (y(i) > 0.0) support.push_back(i);
  }
  auto polished = pattern_solution(M, q, support, tol);
  if (polished) {
    polished->method = LcpSolution::Method::Lemke;
    polished->pivots = pivots + 1;
    return polished;
  }
  LcpSolution sol;
  sol.y = y;
  sol.w = M * y + q;
  sol.method = LcpSolution::Method::Lemke;
  sol.pivots = pivots + 1;
  if (sol.w.minCoeff() < -tol || std::abs(sol.y.dot(sol.w)) > tol) return std::nullopt;
  sol.w = sol.w.cwiseMax(0.0);
  return sol;
}

std::optional<LcpSolution> lcp_enumerate(const Mat& M, const Vec& q) {
  const int m = static_cast<int>(q.size());
  if (m > kEnumerationLimit) {
    throw Error(ErrorCode::DimensionTooLarge, "lcp_enumerate: m exceeds 20");
  }
  const double tol = lcp_tolerance(q);
  const Mask count = Mask{1} << m;
  for (Mask mask = 0; mask < count; ++mask) {
    auto sol = pattern_solution(M, q, mask_to_indices(mask, m), tol);
    if (sol) {
      sol->method = LcpSolution::Method::Enumeration;
      return sol;
    }
  }
  return std::nullopt;
}

LcpSolution solve_lcp(const Mat& M, const Vec& q) {
  const int m = static_cast<int>(q.size());
  if (M.rows() != m || M.cols() != m) {
    throw Error(ErrorCode::InvalidArgument, "solve_lcp: M must be m x m");
  }
  if (auto sol = lcp_lemke(M, q)) return *sol;
  if (m <= kEnumerationLimit) {
    if (auto sol = lcp_enumerate(M, q)) return *sol;
  }
  throw Error(ErrorCode::NoSolution, "solve_lcp: Lemke terminated on a ray and enumeration failed");
}

}  // namespace mpec
