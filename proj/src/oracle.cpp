#include "mpec/oracle.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <limits>

#include "mpec/errors.hpp"
#include "mpec/subsolvers.hpp"

namespace mpec {

namespace {

constexpr int kGridPoints = 51;

// Column offsets of the blocks of u = (x, y, w, z).
struct Layout {
  int n, m, l;
  int y(int i) const { return n + i; }
  int w(int i) const { return n + m + i; }
};

// Equality rows F(u) = 0 plus the variables fixed to zero by the pattern.
void piece_equalities(const MpecInstance& inst, Mask pattern, Mat& E, Vec& e) {
  const Layout L{inst.n(), inst.m(), inst.l()};
  const int rows = static_cast<int>(inst.jacobian().rows());
  E = Mat::Zero(rows + L.m, inst.dim());
  e = Vec::Zero(rows + L.m);
  E.topRows(rows) = inst.jacobian();
  e.head(rows) = -inst.offset();
  for (int i = 0; i < L.m; ++i) {
    const bool y_free = (pattern >> i) & 1ULL;
    E(rows + i, y_free ? L.w(i) : L.y(i)) = 1.0;
  }
}

void piece_inequalities(const MpecInstance& inst, Mask pattern, Mat& A, Vec& b) {
  const Layout L{inst.n(), inst.m(), inst.l()};
  const int k = inst.k();
  A = Mat::Zero(k + L.m, inst.dim());
  b = Vec::Zero(k + L.m);
  A.block(0, 0, k, L.n) = inst.G();
  b.head(k) = inst.a();
  for (int i = 0; i < L.m; ++i) {
    const bool y_free = (pattern >> i) & 1ULL;
    A(k + i, y_free ? L.y(i) : L.w(i)) = -1.0;
  }
}

bool reduced_hessian_psd(const Mat& Q, const Mat& E) {
  const Mat Z = E.rows() > 0 ? null_space(E) : Mat::Identity(Q.rows(), Q.cols());
  if (Z.cols() == 0) return true;
  const Mat R = Z.transpose() * Q * Z;
  const double lo = Eigen::SelfAdjointEigenSolver<Mat>(0.5 * (R + R.transpose())).eigenvalues().minCoeff();
  return lo >= -1e-10 * (1.0 + Q.cwiseAbs().maxCoeff());
}

// Coordinate range of X along e_j; falls back to [-10, 10] where unbounded.
std::pair<double, double> coordinate_range(const MpecInstance& inst, int j) {
  const int n = inst.n();
  double lo = -10.0, hi = 10.0;
  for (int sgn : {-1, 1}) {
    QpProblem lp = QpProblem::zeros(n);
    lp.c(j) = sgn;
    lp.A = inst.G();
    lp.b = inst.a();
    try {
      const double v = solve_qp(lp).d(j);
      (sgn > 0 ? lo : hi) = v;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Unbounded && e.code() != ErrorCode::MaxIterations) throw;
    }
  }
  return {lo, hi};
}

std::optional<PieceSolution> grid_piece(const MpecInstance& inst, Mask pattern, const Mat& E,
                                        const Vec& e) {
  const int n = inst.n();
  if (n > 3) {
    throw Error(ErrorCode::DimensionTooLarge, "nonconvex piece sampling needs n <= 3");
  }
  const int dim = inst.dim();
  const Mat Ex = E.leftCols(n);
  const Mat Ev = E.rightCols(dim - n);
  const auto cod = Ev.completeOrthogonalDecomposition();
  if (cod.rank() < Ev.cols()) return std::nullopt;

  std::vector<std::pair<double, double>> box;
  for (int j = 0; j < n; ++j) box.push_back(coordinate_range(inst, j));
  long total = 1;
  for (int j = 0; j < n; ++j) total *= kGridPoints;

  Mat A;
  Vec b;
  piece_inequalities(inst, pattern, A, b);
  std::optional<PieceSolution> best;
  Vec x(n);
  for (long idx = 0; idx < total; ++idx) {
    long r = idx;
    for (int j = 0; j < n; ++j) {
      const int t = static_cast<int>(r % kGridPoints);
      r /= kGridPoints;
      x(j) = box[j].first + (box[j].second - box[j].first) * t / (kGridPoints - 1);
    }
    const Vec rhs = e - Ex * x;
    const Vec v = cod.solve(rhs);
    if ((Ev * v - rhs).cwiseAbs().maxCoeff() > 1e-9 * (1.0 + rhs.cwiseAbs().maxCoeff())) continue;
    Vec u(dim);
    u << x, v;
    if (A.rows() > 0 && (A * u - b).maxCoeff() > 1e-9) continue;
    const Iterate it = Iterate::from_stacked(inst, u);
    const double val = objective_value(inst, it);
    if (!best || val < best->value) {
      best = PieceSolution{pattern, mask_to_indices(pattern, inst.m()), it, val, true};
    }
  }
  return best;
}

bool better(const PieceSolution& a, const PieceSolution& b, int m) {
  const double gap = 1e-12 * (1.0 + std::abs(b.value));
  if (a.value < b.value - gap) return true;
  if (a.value > b.value + gap) return false;
  return lex_less(a.pattern, b.pattern, m);
}

}  // namespace

GlobalResult enumerate_global(const MpecInstance& inst) {
  const int m = inst.m();
  if (m > 16) throw Error(ErrorCode::DimensionTooLarge, "piece enumeration needs m <= 16");
  GlobalResult out;
  for (Mask pattern = 0; pattern < (Mask(1) << m); ++pattern) {
    QpProblem qp = QpProblem::zeros(inst.dim());
    qp.Q = inst.hessian();
    qp.c = inst.linear();
    piece_equalities(inst, pattern, qp.E, qp.e);
    piece_inequalities(inst, pattern, qp.A, qp.b);

    std::optional<PieceSolution> sol;
    if (reduced_hessian_psd(qp.Q, qp.E)) {
      try {
        const QpSolution s = solve_qp(qp);
        const Iterate it = Iterate::from_stacked(inst, s.d);
        sol = PieceSolution{pattern, mask_to_indices(pattern, m), it, objective_value(inst, it),
                            false};
      } catch (const Error& e) {
        if (e.code() == ErrorCode::Unbounded) {
          throw Error(ErrorCode::Unbounded, "objective unbounded below on a feasible piece");
        }
        if (e.code() != ErrorCode::Infeasible) throw;
      }
    } else {
      sol = grid_piece(inst, pattern, qp.E, qp.e);
      out.approximate = true;
    }
    if (!sol) continue;
    if (out.all.empty() || better(*sol, out.best, m)) out.best = *sol;
    out.all.push_back(std::move(*sol));
  }
  if (out.all.empty()) throw Error(ErrorCode::NoFeasiblePiece, "no complementarity piece is feasible");
  return out;
}

Vec finite_difference_gradient(const ScalarFn& fn, const Vec& point, double h) {
  if (!(h > 0.0)) throw Error(ErrorCode::InvalidArgument, "step must be positive");
  Vec g(point.size());
  Vec p = point;
  for (Eigen::Index j = 0; j < point.size(); ++j) {
    p(j) = point(j) + h;
    const double fp = fn(p);
    p(j) = point(j) - h;
    const double fm = fn(p);
    p(j) = point(j);
    g(j) = (fp - fm) / (2.0 * h);
  }
  return g;
}

double finite_difference_slope(const ScalarFn& fn, const Vec& point, const Vec& d, double h,
                               bool one_sided) {
  if (!(h > 0.0)) throw Error(ErrorCode::InvalidArgument, "step must be positive");
  if (one_sided) return (fn(point + h * d) - fn(point)) / h;
  return (fn(point + h * d) - fn(point - h * d)) / (2.0 * h);
}

ConeRays cone_rays(const Mat& A, int n) {
  if (n > 6) throw Error(ErrorCode::DimensionTooLarge, "ray enumeration needs n <= 6");
  if (A.cols() != n) throw Error(ErrorCode::InvalidArgument, "cone rows must have n columns");
  ConeRays out;
  out.lineality = A.rows() > 0 ? null_space(A) : Mat::Identity(n, n);
  const int r = n - static_cast<int>(out.lineality.cols());
  if (r == 0) return out;

  // Orthonormal basis of the complement of the lineality space.
  Mat B;
  if (out.lineality.cols() == 0) {
    B = Mat::Identity(n, n);
  } else {
    B = null_space(out.lineality.transpose());
  }
  const Mat Ap = A * B;
  const int rows = static_cast<int>(Ap.rows());
  Vec scale(rows);
  for (int i = 0; i < rows; ++i) scale(i) = 1e-10 * (1.0 + A.row(i).norm());

  auto try_ray = [&](const Vec& t) {
    const Vec d = (B * t).normalized();
    if ((A * d - scale).maxCoeff() > 0.0) return;
    for (const Vec& seen : out.rays) {
      if ((seen - d).norm() < 1e-9) return;
    }
    out.rays.push_back(d);
  };

  std::vector<int> pick;
  auto recurse = [&](auto&& self, int from) -> void {
    if (static_cast<int>(pick.size()) == r - 1) {
      Mat S(r - 1, r);
      for (int a = 0; a < r - 1; ++a) S.row(a) = Ap.row(pick[a]);
      const Mat K = r - 1 > 0 ? null_space(S) : Mat::Identity(1, 1);
      if (K.cols() != 1) return;
      try_ray(K.col(0));
      try_ray(-K.col(0));
      return;
    }
    for (int i = from; i < rows; ++i) {
      pick.push_back(i);
      self(self, i + 1);
      pick.pop_back();
    }
  };
  recurse(recurse, 0);
  return out;
}

StationarityCheck tangent_cone_check(const MpecInstance& inst, const Vec& x,
                                     const LowerSolution& exact, double tol, double active_tol) {
  const int n = inst.n(), m = inst.m();
  if (n > 6) throw Error(ErrorCode::DimensionTooLarge, "tangent cone check needs n <= 6");
  if (!inst.is_lcp_form()) throw Error(ErrorCode::WrongForm, "tangent cone check needs LCP form");

  IndexList active;
  const Vec slack = inst.a() - inst.G() * x;
  for (int i = 0; i < inst.k(); ++i) {
    if (slack(i) <= active_tol * (1.0 + std::abs(inst.a()(i)))) active.push_back(i);
  }
  LowerSolution sol = exact;
  if (active_tol > sol.sets.tol) sol.sets = index_sets(sol.y, sol.w, active_tol);
  Mat GI(static_cast<int>(active.size()), n);
  for (size_t i = 0; i < active.size(); ++i) GI.row(static_cast<int>(i)) = inst.G().row(active[i]);

  const Iterate it{x, sol.y, sol.w, Vec::Zero(0)};
  const Vec grad = objective_gradient(inst, it);
  const Vec gx = grad.head(n), gy = grad.segment(n, m), gw = grad.segment(n + m, m);

  StationarityCheck out;
  out.worst_direction = Vec::Zero(n);
  auto consider = [&](double slope, const Vec& d) {
    if (slope < out.worst_slope) {
      out.worst_slope = slope;
      out.worst_direction = d;
    }
  };
  for (const BranchMap& bm : branch_maps(inst, sol)) {
    ++out.branches_checked;
    Mat A(GI.rows() + bm.cone.rows(), n);
    A << GI, bm.cone;
    const Vec g = gx + bm.Dy.transpose() * gy + bm.Dw.transpose() * gw;
    const ConeRays cr = cone_rays(A, n);
    for (int j = 0; j < cr.lineality.cols(); ++j) {
      const Vec l = cr.lineality.col(j);
      const double s = g.dot(l);
      consider(-std::abs(s), s > 0 ? Vec(-l) : l);
      ++out.rays_checked;
    }
    for (const Vec& d : cr.rays) {
      consider(g.dot(d), d);
      ++out.rays_checked;
    }
  }
  out.stationary = out.worst_slope >= -tol;
  return out;
}

bool tangent_cone_stationarity(const MpecInstance& inst, const Vec& x, const LowerSolution& sol,
                               double tol, double active_tol) {
  return tangent_cone_check(inst, x, sol, tol, active_tol).stationary;
}

}  // namespace mpec
