#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "mpec/errors.hpp"
#include "mpec/subsolvers.hpp"

namespace mpec {

QpProblem QpProblem::zeros(int n) {
  QpProblem p;
  p.Q = Mat::Zero(n, n);
  p.c = Vec::Zero(n);
  p.E = Mat::Zero(0, n);
  p.e = Vec::Zero(0);
  p.A = Mat::Zero(0, n);
  p.b = Vec::Zero(0);
  return p;
}

double QpProblem::objective(const Vec& d) const { return 0.5 * d.dot(Q * d) + c.dot(d); }

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// min 0.5 v'Hv + g'v  s.t.  A v <= b
struct ReducedQp {
  Mat H;
  Vec g;
  Mat A;
  Vec b;
};

struct ActiveSetResult {
  Vec v;
  Vec lambda;
  int iterations = 0;
};

Mat rows_of(const Mat& A, const std::vector<int>& rows) {
  Mat out(rows.size(), A.cols());
  for (size_t i = 0; i < rows.size(); ++i) out.row(i) = A.row(rows[i]);
  return out;
}

// Primal active-set iteration from a feasible v0 with an initially empty
// working set. Zero-curvature descent directions are followed to the first
// blocking constraint; none means the problem is unbounded.
ActiveSetResult active_set(const ReducedQp& qp, Vec v, int max_iter) {
  const int n = static_cast<int>(qp.H.rows());
  const int k = static_cast<int>(qp.A.rows());
  std::vector<int> working;
  std::vector<char> in_working(k, 0);
  Vec row_norm(k);
  for (int i = 0; i < k; ++i) row_norm(i) = qp.A.row(i).norm();
  const double h_scale = n > 0 ? std::max(1.0, qp.H.cwiseAbs().maxCoeff()) : 1.0;

  ActiveSetResult out;
  for (int iter = 0; iter < max_iter; ++iter) {
    out.iterations = iter + 1;
    const Vec grad = qp.H * v + qp.g;
    const Mat AW = rows_of(qp.A, working);
    const Mat Z = null_space(AW, 1e-12);

    Vec direction = Vec::Zero(n);
    bool newton = true;
    if (Z.cols() > 0) {
      const Mat Hr = Z.transpose() * qp.H * Z;
      const Vec gr = Z.transpose() * grad;
      Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (Hr + Hr.transpose()));
      const Vec& evals = es.eigenvalues();
      const Mat& evecs = es.eigenvectors();
      const double curv_tol = 1e-11 * h_scale;
      Vec p_range = Vec::Zero(Z.cols());
      Vec flat = Vec::Zero(Z.cols());
      for (int j = 0; j < evals.size(); ++j) {
        const double coef = evecs.col(j).dot(gr);
        if (evals(j) > curv_tol) {
          p_range -= (coef / evals(j)) * evecs.col(j);
        } else {
          flat += coef * evecs.col(j);
        }
      }
      if (flat.norm() > 1e-12 * (1.0 + grad.norm())) {
        direction = -Z * flat;
        newton = false;
      } else {
        direction = Z * p_range;
      }
    }

    if (direction.norm() <= 1e-13 * (1.0 + v.norm())) {
      Vec lambda_w = Vec::Zero(working.size());
      if (!working.empty()) {
        lambda_w = AW.transpose().completeOrthogonalDecomposition().solve(-grad);
      }
      const double mult_tol = 1e-11 * (1.0 + grad.norm());
      int drop = -1;
      double most_negative = -mult_tol;
      for (size_t j = 0; j < working.size(); ++j) {
        // ties go to the smallest constraint index
        if (lambda_w(j) < most_negative ||
            (drop >= 0 && lambda_w(j) == most_negative && working[j] < working[drop])) {
          most_negative = lambda_w(j);
          drop = static_cast<int>(j);
        }
      }
      if (drop < 0) {
        out.v = v;
        out.lambda = Vec::Zero(k);
        for (size_t j = 0; j < working.size(); ++j) {
          out.lambda(working[j]) = std::max(0.0, lambda_w(j));
        }
        return out;
      }
      in_working[working[drop]] = 0;
      working.erase(working.begin() + drop);
      continue;
    }

    double step = newton ? 1.0 : kInf;
    int blocking = -1;
    const double dnorm = direction.norm();
    for (int i = 0; i < k; ++i) {
      if (in_working[i]) continue;
      const double ad = qp.A.row(i).dot(direction);
      if (ad <= 1e-14 * row_norm(i) * dnorm) continue;
      const double slack = std::max(0.0, qp.b(i) - qp.A.row(i).dot(v));
      const double t = slack / ad;
      if (t < step) {
        step = t;
        blocking = i;
      }
    }
    if (!newton && blocking < 0) {
      throw Error(ErrorCode::Unbounded, "solve_qp: objective unbounded below on the feasible set");
    }
    v += step * direction;
    if (blocking >= 0) {
      working.push_back(blocking);
      in_working[blocking] = 1;
    }
  }
  throw Error(ErrorCode::MaxIterations, "solve_qp: active-set iteration limit reached");
}

// Feasible point of A v <= b via min sum(s) s.t. A v - s <= b, s >= 0,
// slacks attached only to rows violated at v = 0.
Vec phase_one(const Mat& A, const Vec& b, int max_iter, double feas_tol) {
  const int n = static_cast<int>(A.cols());
  const int k = static_cast<int>(A.rows());
  std::vector<int> violated;
  for (int i = 0; i < k; ++i) {
    if (b(i) < 0.0) violated.push_back(i);
  }
  if (violated.empty()) return Vec::Zero(n);

  const int ns = static_cast<int>(violated.size());
  ReducedQp lp;
  lp.H = Mat::Zero(n + ns, n + ns);
  lp.g = Vec::Zero(n + ns);
  lp.g.tail(ns).setOnes();
  lp.A = Mat::Zero(k + ns, n + ns);
  lp.b = Vec::Zero(k + ns);
  lp.A.topLeftCorner(k, n) = A;
  lp.b.head(k) = b;
  Vec start = Vec::Zero(n + ns);
  for (int j = 0; j < ns; ++j) {
    lp.A(violated[j], n + j) = -1.0;
    lp.A(k + j, n + j) = -1.0;
    start(n + j) = -b(violated[j]);
  }
  const ActiveSetResult res = active_set(lp, start, max_iter);
  const double infeasibility = res.v.tail(ns).sum();
  if (infeasibility > feas_tol * (1.0 + b.cwiseAbs().maxCoeff())) {
    throw Error(ErrorCode::Infeasible, "solve_qp: inequality constraints are infeasible");
  }
  return res.v.head(n);
}

class ReducedSolver {
 public:
  ReducedSolver(const QpProblem& p, const QpOptions& options) : p_(p), options_(options) {
    const int n = p.dim();
    if (p.E.rows() > 0) {
      d0_ = p.E.completeOrthogonalDecomposition().solve(p.e);
      const double eq_res = (p.E * d0_ - p.e).cwiseAbs().maxCoeff();
      if (eq_res > options.feasibility_tol * (1.0 + p.e.cwiseAbs().maxCoeff())) {
        throw Error(ErrorCode::Infeasible, "solve_qp: equality constraints are inconsistent");
      }
      Z_ = null_space(p.E, 1e-12);
    } else {
      d0_ = Vec::Zero(n);
      Z_ = Mat::Identity(n, n);
    }
    A_ = p.A * Z_;
    b_ = p.b - p.A * d0_;
    max_iter_ = options.max_iterations > 0
                    ? options.max_iterations
                    : 50 * (n + static_cast<int>(p.A.rows()) + static_cast<int>(p.E.rows())) + 100;
    v_ = phase_one(A_, b_, max_iter_, options.feasibility_tol);
  }

  struct Result {
    Vec d;
    Vec lambda;
    int iterations = 0;
  };

  // Minimizes with Q replaced by Q + 2 shift P_ball. Warm-starts from the
  // previous (feasible) reduced point.
  Result solve(double shift) {
    Mat Q = p_.Q;
    if (shift > 0.0 && p_.ball) {
      const auto& ball = *p_.ball;
      Q.diagonal().segment(ball.start, ball.size).array() += 2.0 * shift;
    }
    ReducedQp qp;
    qp.H = Z_.transpose() * Q * Z_;
    qp.H = 0.5 * (qp.H + qp.H.transpose());
    qp.g = Z_.transpose() * (Q * d0_ + p_.c);
    qp.A = A_;
    qp.b = b_;
    const ActiveSetResult res = active_set(qp, v_, max_iter_);
    v_ = res.v;
    total_iterations_ += res.iterations;
    return {d0_ + Z_ * res.v, res.lambda, res.iterations};
  }

  int total_iterations() const { return total_iterations_; }

 private:
  const QpProblem& p_;
  QpOptions options_;
  Vec d0_;
  Mat Z_;
  Mat A_;
  Vec b_;
  Vec v_;
  int max_iter_ = 0;
  int total_iterations_ = 0;
};

double ball_norm_sq(const QpProblem& p, const Vec& d) {
  return d.segment(p.ball->start, p.ball->size).squaredNorm();
}

void check_dimensions(const QpProblem& p) {
  const int n = p.dim();
  auto bad = [](const char* what) {
    throw Error(ErrorCode::InvalidArgument, std::string("solve_qp: ") + what);
  };
  if (p.Q.rows() != n || p.Q.cols() != n) bad("Q must be n x n");
  if (p.E.cols() != n || p.E.rows() != p.e.size()) bad("E/e shape mismatch");
  if (p.A.cols() != n || p.A.rows() != p.b.size()) bad("A/b shape mismatch");
  if (p.ball) {
    if (p.ball->start < 0 || p.ball->size < 0 || p.ball->start + p.ball->size > n) bad("ball range");
    if (!(p.ball->radius_sq >= 0.0)) bad("ball radius must be nonnegative");
  }
  if (n > 0 &&
      (p.Q - p.Q.transpose()).cwiseAbs().maxCoeff() > 1e-10 * (1.0 + p.Q.cwiseAbs().maxCoeff())) {
    bad("Q must be symmetric");
  }
}

QpSolution finish(const QpProblem& p, const Vec& d, const Vec& lambda, double mu, int iterations) {
  QpSolution s;
  s.d = d;
  s.ineq_multipliers = lambda;
  s.ball_multiplier = mu;
  s.iterations = iterations;
  Vec stat = p.Q * d + p.c + p.A.transpose() * lambda;
  if (p.ball && mu > 0.0) {
    stat.segment(p.ball->start, p.ball->size) += 2.0 * mu * d.segment(p.ball->start, p.ball->size);
  }
  if (p.E.rows() > 0) {
    s.eq_multipliers = p.E.transpose().completeOrthogonalDecomposition().solve(-stat);
  } else {
    s.eq_multipliers = Vec::Zero(0);
  }
  s.objective = p.objective(d);
  s.kkt_residual = qp_kkt_residual(p, s);
  return s;
}

}  // namespace

double qp_kkt_residual(const QpProblem& p, const QpSolution& s) {
  const Vec& d = s.d;
  Vec stat = p.Q * d + p.c;
  if (p.E.rows() > 0) stat += p.E.transpose() * s.eq_multipliers;
  if (p.A.rows() > 0) stat += p.A.transpose() * s.ineq_multipliers;
  if (p.ball) {
    stat.segment(p.ball->start, p.ball->size) +=
        2.0 * s.ball_multiplier * d.segment(p.ball->start, p.ball->size);
  }
  double r = stat.size() > 0 ? stat.cwiseAbs().maxCoeff() : 0.0;
  if (p.E.rows() > 0) r = std::max(r, (p.E * d - p.e).cwiseAbs().maxCoeff());
  for (int i = 0; i < p.A.rows(); ++i) {
    const double slack = p.A.row(i).dot(d) - p.b(i);
    r = std::max({r, slack, -s.ineq_multipliers(i), std::abs(s.ineq_multipliers(i) * slack)});
  }
  if (p.ball) {
    const double excess = ball_norm_sq(p, d) - p.ball->radius_sq;
    r = std::max({r, excess, -s.ball_multiplier, std::abs(s.ball_multiplier * excess)});
  }
  return r;
}

QpSolution solve_qp(const QpProblem& p, const QpOptions& options) {
  check_dimensions(p);

  if (p.ball && p.ball->radius_sq == 0.0) {
    // Degenerate ball: pin the block to zero through equalities.
    QpProblem pinned = p;
    pinned.ball.reset();
    const int n = p.dim();
    const int extra = p.ball->size;
    pinned.E.conservativeResize(p.E.rows() + extra, n);
    pinned.e.conservativeResize(p.e.size() + extra);
    pinned.E.bottomRows(extra).setZero();
    for (int j = 0; j < extra; ++j) pinned.E(p.E.rows() + j, p.ball->start + j) = 1.0;
    pinned.e.tail(extra).setZero();
    QpSolution s = solve_qp(pinned, options);
    s.eq_multipliers.conservativeResize(p.E.rows());
    s.kkt_residual = qp_kkt_residual(pinned, s);
    return s;
  }

  ReducedSolver solver(p, options);
  if (!p.ball) {
    const auto r = solver.solve(0.0);
    return finish(p, r.d, r.lambda, 0.0, solver.total_iterations());
  }

  const double rho = p.ball->radius_sq;
  std::optional<ReducedSolver::Result> at_zero;
  try {
    at_zero = solver.solve(0.0);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::Unbounded) throw;
  }
  if (at_zero && ball_norm_sq(p, at_zero->d) <= rho) {
    return finish(p, at_zero->d, at_zero->lambda, 0.0, solver.total_iterations());
  }

  // psi(lambda) = 1/||d_ball|| - 1/sqrt(rho) is increasing and close to
  // linear; bracket its root, then regula falsi (Illinois) with bisection
  // safeguard.
  auto psi = [&](const ReducedSolver::Result& r) {
    const double nd = std::sqrt(ball_norm_sq(p, r.d));
    return (nd > 0.0 ? 1.0 / nd : kInf) - 1.0 / std::sqrt(rho);
  };
  double lo = 0.0;
  double psi_lo = at_zero ? psi(*at_zero) : -kInf;
  double hi = 1.0;
  ReducedSolver::Result r_hi = solver.solve(hi);
  while (ball_norm_sq(p, r_hi.d) > rho) {
    lo = hi;
    psi_lo = psi(r_hi);
    hi *= 10.0;
    if (hi > 1e18) {
      throw Error(ErrorCode::Infeasible, "solve_qp: ball does not intersect the polyhedron");
    }
    r_hi = solver.solve(hi);
  }
  double psi_hi = psi(r_hi);
  int side = 0;
  for (int it = 0; it < 200; ++it) {
    const double excess = ball_norm_sq(p, r_hi.d) - rho;
    if (std::abs(excess) <= 1e-14 * (1.0 + rho) || hi - lo <= 1e-15 * hi) break;
    double mid;
    if (std::isfinite(psi_lo) && psi_hi > psi_lo) {
      mid = hi - psi_hi * (hi - lo) / (psi_hi - psi_lo);
      if (!(mid > lo && mid < hi)) mid = 0.5 * (lo + hi);
    } else {
      mid = 0.5 * (lo + hi);
    }
    ReducedSolver::Result r_mid;
    try {
      r_mid = solver.solve(mid);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Unbounded) throw;
      lo = mid;
      psi_lo = -kInf;
      continue;
    }
    const double psi_mid = psi(r_mid);
    if (ball_norm_sq(p, r_mid.d) <= rho) {
      hi = mid;
      psi_hi = psi_mid;
      r_hi = r_mid;
      if (side == 1) psi_lo *= 0.5;
      side = 1;
    } else {
      lo = mid;
      psi_lo = psi_mid;
      if (side == -1) psi_hi *= 0.5;
      side = -1;
    }
  }
  return finish(p, r_hi.d, r_hi.lambda, hi, solver.total_iterations());
}

}  // namespace mpec
