#pragma once

#include <optional>

#include "mpec/types.hpp"

namespace mpec {

/// Solves A x = b by LU with partial pivoting. Throws Singular when a pivot
/// falls below 1e-12 * ||A||.
Vec solve_linear(const Mat& A, const Vec& b);

/// Euclidean ball on a contiguous block of variables: ||d[start, start+size)||^2 <= radius_sq.
struct BallConstraint {
  int start = 0;
  int size = 0;
  double radius_sq = 0.0;
};

/// Convex QP
///
///   min  0.5 d'Q d + c'd
///   s.t. E d = e,  A d <= b,  optional ||d_ball||^2 <= rho.
///
/// Q must be symmetric positive semidefinite. Empty E/A are allowed (zero rows,
/// matching column count).
struct QpProblem {
  Mat Q;
  Vec c;
  Mat E;
  Vec e;
  Mat A;
  Vec b;
  std::optional<BallConstraint> ball;

  int dim() const { return static_cast<int>(c.size()); }
  /// Builds an unconstrained problem of the given size with all blocks zero.
  static QpProblem zeros(int n);
  double objective(const Vec& d) const;
};

/// Multiplier signs follow the Lagrangian Q d + c + E'nu + A'lambda + 2 mu d_ball = 0.
struct QpSolution {
  Vec d;
  Vec eq_multipliers;
  Vec ineq_multipliers;
  double ball_multiplier = 0.0;
  double objective = 0.0;
  int iterations = 0;
  double kkt_residual = 0.0;
};

struct QpOptions {
  int max_iterations = 0;  // 0 selects 50 * (n + rows) + 100
  double feasibility_tol = 1e-9;
};

/// Primal active-set method after null-space elimination of the equalities;
/// the ball is handled by a safeguarded root search on its multiplier.
/// Throws Infeasible, Unbounded or MaxIterations.
QpSolution solve_qp(const QpProblem& p, const QpOptions& options = {});

/// Max-norm of the KKT conditions of p at (d, multipliers).
double qp_kkt_residual(const QpProblem& p, const QpSolution& s);

struct LcpSolution {
  Vec y;
  Vec w;
  enum class Method { Trivial, Lemke, Enumeration } method = Method::Trivial;
  int pivots = 0;
};

/// y >= 0, w = M y + q >= 0, y'w = 0. Lemke's method (covering vector e,
/// lexicographic ratio test) first, then exhaustive enumeration of the 2^m
/// complementary patterns on ray termination (m <= 20). Throws NoSolution.
LcpSolution solve_lcp(const Mat& M, const Vec& q);

/// Lemke only; std::nullopt on ray termination or pivot limit.
std::optional<LcpSolution> lcp_lemke(const Mat& M, const Vec& q);

/// Enumeration only; first valid pattern in increasing bit-mask order of the
/// index set carrying positive y. std::nullopt when no pattern works.
std::optional<LcpSolution> lcp_enumerate(const Mat& M, const Vec& q);

/// Tolerance used to accept LCP solutions: 1e-10 * (1 + ||q||_inf).
double lcp_tolerance(const Vec& q);

/// Null-space basis (orthonormal columns) of A with relative rank threshold.
Mat null_space(const Mat& A, double rel_tol = 1e-10);

}  // namespace mpec
