#pragma once

#include <random>
#include <string>

#include "mpec/instance_io.hpp"
#include "mpec/model.hpp"
#include "mpec/subsolvers.hpp"

namespace mpec::testing {

using Rng = std::mt19937_64;

inline std::string data_path(const std::string& name) {
  return std::string(MPEC_DATA_DIR) + "/" + name;
}

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int uniform_int(Rng& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline Vec random_vec(Rng& rng, int n, double lo = -1.0, double hi = 1.0) {
  Vec v(n);
  for (int i = 0; i < n; ++i) v(i) = uniform(rng, lo, hi);
  return v;
}

inline Mat random_mat(Rng& rng, int r, int c, double lo = -1.0, double hi = 1.0) {
  Mat A(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) A(i, j) = uniform(rng, lo, hi);
  return A;
}

/// B'B + shift I.
inline Mat random_psd(Rng& rng, int n, double shift = 0.0, int rank = -1) {
  const int r = rank < 0 ? n : rank;
  const Mat B = random_mat(rng, r, n);
  return B.transpose() * B + shift * Mat::Identity(n, n);
}

inline Mat random_pd(Rng& rng, int n) { return random_psd(rng, n, 0.5); }

inline Vec positive_vec(Rng& rng, int n, double lo = 0.2, double hi = 2.0) {
  return random_vec(rng, n, lo, hi);
}

struct LcpOptions {
  double box = 2.0;         // |x_i| <= box
  bool extra_row = true;    // one random halfspace through a point of the box
  bool pd_lower = true;     // M positive definite rather than merely PSD
  double hess_shift = 0.1;  // convexity margin of the (x, y) Hessian
};

/// LCP-form instance with convex objective in (x, y) and monotone M.
inline MpecInstance random_lcp_instance(Rng& rng, int n, int m, const LcpOptions& o = {}) {
  MpecData d;
  d.n = n;
  d.m = m;
  const Mat H = random_psd(rng, n + m, o.hess_shift);
  d.Hxx = H.topLeftCorner(n, n);
  d.Hxy = H.topRightCorner(n, m);
  d.Hyy = H.bottomRightCorner(m, m);
  d.cx = random_vec(rng, n, -2.0, 2.0);
  d.cy = random_vec(rng, m, -2.0, 2.0);
  d.cw = random_vec(rng, m, -1.0, 1.0);
  d.lcp_form = true;
  d.q = random_vec(rng, m, -1.0, 1.0);
  d.N = random_mat(rng, m, n);
  d.M = o.pd_lower ? random_pd(rng, m) : random_psd(rng, m, 0.0, std::max(1, m - 1));
  const int k = 2 * n + (o.extra_row ? 1 : 0);
  d.G = Mat::Zero(k, n);
  d.a = Vec::Constant(k, o.box);
  for (int i = 0; i < n; ++i) {
    d.G(2 * i, i) = 1.0;
    d.G(2 * i + 1, i) = -1.0;
  }
  if (o.extra_row) {
    const Vec g = random_vec(rng, n);
    d.G.row(k - 1) = g.transpose();
    d.a(k - 1) = g.dot(random_vec(rng, n, -0.5 * o.box, 0.5 * o.box)) + 0.2;
  }
  return MpecInstance(std::move(d));
}

/// General-form instance F = Ax x + Ay y + Aw w + Az z + b whose linearized
/// lower block is nonsingular at every interior point.
inline MpecInstance random_general_instance(Rng& rng, int n, int m, int l) {
  MpecData d;
  d.n = n;
  d.m = m;
  d.l = l;
  const Mat H = random_psd(rng, n + 2 * m, 0.1);
  d.Hxx = H.topLeftCorner(n, n);
  d.Hxy = H.block(0, n, n, m);
  d.Hyy = H.block(n, n, m, m);
  d.Hxw = H.block(0, n + m, n, m);
  d.Hww = H.block(n + m, n + m, m, m);
  d.cx = random_vec(rng, n);
  d.cy = random_vec(rng, m);
  d.cw = random_vec(rng, m);
  d.cz = random_vec(rng, l);
  d.Ax = random_mat(rng, m + l, n);
  d.Ay = Mat::Zero(m + l, m);
  d.Ay.topRows(m) = random_psd(rng, m, 0.2);
  d.Ay.bottomRows(l) = random_mat(rng, l, m);
  d.Aw = Mat::Zero(m + l, m);
  d.Aw.topRows(m) = -Mat::Identity(m, m);
  d.Az = Mat::Zero(m + l, l);
  d.Az.bottomRows(l) = Mat::Identity(l, l);
  d.b = random_vec(rng, m + l);
  d.G = Mat::Zero(2 * n, n);
  d.a = Vec::Constant(2 * n, 3.0);
  for (int i = 0; i < n; ++i) {
    d.G(2 * i, i) = 1.0;
    d.G(2 * i + 1, i) = -1.0;
  }
  return MpecInstance(std::move(d));
}

/// Random interior iterate with x in the box |x| <= 1.
inline Iterate random_interior(Rng& rng, const MpecInstance& inst) {
  return Iterate{random_vec(rng, inst.n()), positive_vec(rng, inst.m()),
                 positive_vec(rng, inst.m()), random_vec(rng, inst.l())};
}

// Random convex QP with a known strictly feasible point; boxed so it stays bounded.
struct RandomQp {
  QpProblem p;
  Vec feasible;
};

inline RandomQp random_qp(Rng& rng) {
  const int n = uniform_int(rng, 1, 6);
  const int me = uniform_int(rng, 0, n - 1);
  const int mi = uniform_int(rng, 0, 2 * n);
  RandomQp r;
  r.feasible = random_vec(rng, n);
  QpProblem& p = r.p;
  p = QpProblem::zeros(n);
  p.Q = random_psd(rng, n, uniform_int(rng, 0, 1) ? 0.1 : 0.0, uniform_int(rng, 1, n));
  p.c = random_vec(rng, n, -3, 3);
  p.E = random_mat(rng, me, n);
  p.e = p.E * r.feasible;
  p.A = random_mat(rng, mi, n);
  p.b = p.A * r.feasible + random_vec(rng, mi, 0.0, 1.0);
  // Keep the problem bounded: box rows when Q is singular.
  Mat box(2 * n, n);
  box << Mat::Identity(n, n), -Mat::Identity(n, n);
  Vec bb(2 * n);
  bb << Vec::Constant(n, 3.0), Vec::Constant(n, 3.0);
  Mat A2(mi + 2 * n, n);
  A2 << p.A, box;
  Vec b2(mi + 2 * n);
  b2 << p.b, bb;
  p.A = A2;
  p.b = b2;
  if (uniform_int(rng, 0, 2) == 0) {
    const int start = uniform_int(rng, 0, n - 1);
    const int size = uniform_int(rng, 1, n - start);
    const double fr = r.feasible.segment(start, size).squaredNorm();
    p.ball = BallConstraint{start, size, fr + uniform(rng, 0.0, 1.0)};
  }
  return r;
}

inline bool feasible(const QpProblem& p, const Vec& d, double tol) {
  if (p.E.rows() && (p.E * d - p.e).cwiseAbs().maxCoeff() > tol) return false;
  if (p.A.rows() && (p.A * d - p.b).maxCoeff() > tol) return false;
  if (p.ball && d.segment(p.ball->start, p.ball->size).squaredNorm() > p.ball->radius_sq + tol)
    return false;
  return true;
}

}  // namespace mpec::testing
