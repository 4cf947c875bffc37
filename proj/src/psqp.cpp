#include "mpec/psqp.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "mpec/errors.hpp"

namespace mpec {

void KktMpecInstance::validate() const {
  const int nz = n + m;
  auto bad = [](const char* what) { throw Error(ErrorCode::InvalidInstance, what); };
  if (n < 0 || m < 0 || ell < 0) bad("dimensions must be nonnegative");
  if (H.rows() != nz || H.cols() != nz) bad("H must be (n+m) x (n+m)");
  if (c.size() != nz) bad("c must have length n+m");
  if (Fz.rows() != m || Fz.cols() != nz || Fb.size() != m) bad("F must map R^(n+m) to R^m");
  if (Ag.rows() != ell || Ag.cols() != nz || bg.size() != ell) bad("g must map R^(n+m) to R^ell");
  const auto kk = au.size();
  if (Gu.rows() != kk || Gu.cols() != n || Hu.rows() != kk || Hu.cols() != m) {
    bad("upper rows must be Gu (k x n), Hu (k x m), au (k)");
  }
}

double KktMpecInstance::f(const Vec& z) const { return 0.5 * z.dot(H * z) + c.dot(z) + c0; }
Vec KktMpecInstance::grad_f(const Vec& z) const { return H * z + c; }
Vec KktMpecInstance::g(const Vec& z) const { return Ag * z + bg; }

Vec KktMpecInstance::L(const Vec& z, const Vec& lambda) const {
  return Fz * z + Fb + Ag.rightCols(m).transpose() * lambda;
}

Mat KktMpecInstance::L_jacobian() const {
  Mat J(m, n + m + ell);
  J << Fz, Ag.rightCols(m).transpose();
  return J;
}

KktMpecInstance kkt_from_lcp(const MpecInstance& inst) {
  if (!inst.is_lcp_form()) throw Error(ErrorCode::WrongForm, "conversion needs an LCP-form instance");
  const int n = inst.n(), m = inst.m();
  const int nz = n + m;
  Mat T = Mat::Zero(n + 2 * m, nz);
  T.topLeftCorner(nz, nz).setIdentity();
  T.block(nz, 0, m, n) = inst.N();
  T.block(nz, n, m, m) = inst.M();
  Vec t = Vec::Zero(n + 2 * m);
  t.tail(m) = inst.q();

  KktMpecInstance k;
  k.n = n;
  k.m = m;
  k.ell = m;
  const Mat& Hu = inst.hessian();
  const Vec& cu = inst.linear();
  k.H = T.transpose() * Hu * T;
  k.H = 0.5 * (k.H + k.H.transpose());
  k.c = T.transpose() * (Hu * t + cu);
  k.c0 = 0.5 * t.dot(Hu * t) + cu.dot(t) + inst.data().c0;
  k.Fz = Mat(m, nz);
  k.Fz << inst.N(), inst.M();
  k.Fb = inst.q();
  k.Ag = Mat::Zero(m, nz);
  k.Ag.rightCols(m) = -Mat::Identity(m, m);
  k.bg = Vec::Zero(m);
  k.Gu = inst.G();
  k.Hu = Mat::Zero(inst.k(), m);
  k.au = -inst.a();
  return k;
}

Vec KktPoint::z() const {
  Vec v(x.size() + y.size());
  v << x, y;
  return v;
}

Vec KktPoint::stacked() const {
  Vec v(x.size() + y.size() + lambda.size());
  v << x, y, lambda;
  return v;
}

KktPoint KktPoint::from_stacked(const KktMpecInstance& kkt, const Vec& v) {
  if (v.size() != kkt.n + kkt.m + kkt.ell) throw Error(ErrorCode::InvalidArgument, "wrong length");
  return KktPoint{v.head(kkt.n), v.segment(kkt.n, kkt.m), v.tail(kkt.ell)};
}

ActiveSets active_sets(const KktMpecInstance& kkt, const Vec& z, const Vec& lambda, double tol) {
  if (lambda.size() != kkt.ell || z.size() != kkt.n + kkt.m) {
    throw Error(ErrorCode::InvalidArgument, "point dimensions do not match the instance");
  }
  const Vec g = kkt.g(z);
  ActiveSets s;
  s.tol = tol;
  for (int i = 0; i < kkt.ell; ++i) {
    if (lambda(i) < -tol) throw Error(ErrorCode::InvalidArgument, "lambda below -tol", i);
    const bool lam_pos = lambda(i) > tol;
    if (g(i) < -tol) {
      if (lam_pos) {
        std::ostringstream os;
        os << "index " << i << " has g = " << g(i) << " and lambda = " << lambda(i);
        throw Error(ErrorCode::NotComplementary, os.str(), i);
      }
      s.inactive.push_back(i);
    } else if (lam_pos) {
      s.Iplus.push_back(i);
    } else {
      s.I0.push_back(i);
    }
  }
  return s;
}

Piece select_piece(const KktMpecInstance& kkt, const Vec& z, const Vec& lambda, double tol) {
  const ActiveSets s = active_sets(kkt, z, lambda, tol);
  const Vec g = kkt.g(z);
  Piece p;
  p.J2 = s.Iplus;
  p.J1 = s.inactive;
  for (int i : s.I0) {
    if (lambda(i) >= -g(i)) {
      p.J2.push_back(i);
    } else {
      p.J1.push_back(i);
    }
  }
  std::sort(p.J1.begin(), p.J1.end());
  std::sort(p.J2.begin(), p.J2.end());
  return p;
}

double classification_tol(const KktMpecInstance& kkt, const KktPoint& p, double tol0) {
  const Vec g = kkt.g(p.z());
  double v = 0.0;
  for (int i = 0; i < kkt.ell; ++i) v = std::max(v, std::abs(std::min(-g(i), p.lambda(i))));
  return std::max(tol0, 10.0 * v);
}

double kkt_infeasibility(const KktMpecInstance& kkt, const KktPoint& p) {
  const Vec z = p.z();
  const Vec g = kkt.g(z);
  double s = kkt.L(z, p.lambda).squaredNorm();
  for (int i = 0; i < kkt.ell; ++i) s += std::abs(std::min(-g(i), p.lambda(i)));
  return s;
}

QpProblem build_psqp_qp(const KktMpecInstance& kkt, const KktPoint& p, const Piece& piece) {
  kkt.validate();
  const int n = kkt.n, m = kkt.m, ell = kkt.ell, nz = n + m, N = nz + ell;
  if (static_cast<int>(piece.J1.size() + piece.J2.size()) != ell) {
    throw Error(ErrorCode::InvalidArgument, "piece must partition the complementarity indices");
  }
  const Vec z = p.z();
  const Vec g = kkt.g(z);
  QpProblem qp = QpProblem::zeros(N);
  qp.Q.topLeftCorner(nz, nz) = kkt.H;
  qp.c.head(nz) = kkt.grad_f(z);

  qp.E = Mat::Zero(m + ell, N);
  qp.e = Vec::Zero(m + ell);
  qp.E.topRows(m) = kkt.L_jacobian();
  qp.e.head(m) = -kkt.L(z, p.lambda);
  int row = m;
  for (int i : piece.J1) {
    qp.E(row, nz + i) = 1.0;
    qp.e(row++) = -p.lambda(i);
  }
  for (int i : piece.J2) {
    qp.E.block(row, 0, 1, nz) = kkt.Ag.row(i);
    qp.e(row++) = -g(i);
  }

  const int k = kkt.k();
  qp.A = Mat::Zero(k + ell, N);
  qp.b = Vec::Zero(k + ell);
  qp.A.block(0, 0, k, n) = kkt.Gu;
  qp.A.block(0, n, k, m) = kkt.Hu;
  qp.b.head(k) = -(kkt.Gu * p.x + kkt.Hu * p.y + kkt.au);
  row = k;
  for (int i : piece.J1) {
    qp.A.block(row, 0, 1, nz) = kkt.Ag.row(i);
    qp.b(row++) = -g(i);
  }
  for (int i : piece.J2) {
    qp.A(row, nz + i) = -1.0;
    qp.b(row++) = p.lambda(i);
  }
  return qp;
}

PsqpStep psqp_step(const KktMpecInstance& kkt, const KktPoint& p, const Vec& nu,
                   const Piece& piece) {
  if (nu.size() != kkt.m) throw Error(ErrorCode::InvalidArgument, "nu must have length m");
  const QpProblem qp = build_psqp_qp(kkt, p, piece);
  QpSolution s;
  try {
    s = solve_qp(qp);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Infeasible) {
      throw Error(ErrorCode::InconsistentPiece, "linearized piece constraints are infeasible");
    }
    throw;
  }
  PsqpStep out;
  out.dw = s.d;
  // J1 rows are equalities in dlambda alone; drop the elimination round-off
  for (int i : piece.J1) out.dw(kkt.n + kkt.m + i) = -p.lambda(i);
  out.nu = s.eq_multipliers.head(kkt.m);
  out.objective = s.objective;
  return out;
}

Vec initial_nu(const KktMpecInstance& kkt, const KktPoint& p) {
  const int nz = kkt.n + kkt.m;
  if (kkt.m == 0) return Vec::Zero(0);
  const Mat JzT = kkt.L_jacobian().leftCols(nz).transpose();
  return JzT.completeOrthogonalDecomposition().solve(-kkt.grad_f(p.z()));
}

SolveReport psqp_solve(const KktMpecInstance& kkt, const KktPoint& start, const PsqpParams& params) {
  kkt.validate();
  if (start.x.size() != kkt.n || start.y.size() != kkt.m || start.lambda.size() != kkt.ell) {
    throw Error(ErrorCode::InvalidArgument, "start dimensions do not match the instance");
  }
  if (!(params.tol_step > 0.0) || !(params.tol_active > 0.0) || params.max_iters < 0) {
    throw Error(ErrorCode::InvalidArgument, "psqp parameters out of range");
  }
  const int N = kkt.n + kkt.m + kkt.ell;
  if (params.reference && params.reference->size() != N) {
    throw Error(ErrorCode::InvalidArgument, "reference point has wrong length");
  }

  SolveReport rep;
  rep.algo = "psqp";
  KktPoint p = start;
  Vec nu = initial_nu(kkt, p);
  const double bound = 1e6 * (1.0 + start.stacked().norm());
  double stat = 0.0;
  int iter = 0;
  for (;; ++iter) {
    const Vec w = p.stacked();
    TraceRow row;
    row.iter = iter;
    row.phi = kkt_infeasibility(kkt, p);
    row.P_alpha = kkt.f(p.z());
    row.mu = kkt.ell ? std::abs(kkt.g(p.z()).dot(p.lambda)) / kkt.ell : 0.0;

    auto stop = [&](SolveStatus st, const std::string& msg) {
      rep.status = st;
      rep.message = msg;
      row.status = to_string(st);
      rep.trace.push_back(row);
    };

    const double tol = classification_tol(kkt, p, params.tol_active);
    Piece piece;
    PsqpStep step;
    try {
      piece = select_piece(kkt, p.z(), p.lambda, tol);
      step = psqp_step(kkt, p, nu, piece);
    } catch (const Error& e) {
      stop(SolveStatus::Failed, e.what());
      break;
    }
    row.piece_J2 = piece.J2;
    row.step_norm = step.dw.norm();
    row.norm_dx = step.dw.head(kkt.n).norm();
    stat = *row.step_norm;

    if (*row.step_norm <= params.tol_step * (1.0 + w.norm())) {
      const ActiveSets sets = active_sets(kkt, p.z(), p.lambda, tol);
      const int n0 = static_cast<int>(sets.I0.size());
      double worst = 0.0;
      if (n0 > 16) {
        stop(SolveStatus::PieceStationary, "degenerate set too large to check every piece");
        break;
      }
      for (Mask mask = 0; mask < (Mask(1) << n0); ++mask) {
        Piece alt;
        alt.J2 = sets.Iplus;
        alt.J1 = sets.inactive;
        for (int j = 0; j < n0; ++j) {
          ((mask & (Mask(1) << j)) ? alt.J2 : alt.J1).push_back(sets.I0[j]);
        }
        std::sort(alt.J1.begin(), alt.J1.end());
        std::sort(alt.J2.begin(), alt.J2.end());
        try {
          worst = std::max(worst, psqp_step(kkt, p, nu, alt).dw.norm());
        } catch (const Error&) {
          // pieces whose linearization is inconsistent do not contain p
        }
      }
      stat = worst;
      if (worst <= 1e-8 * (1.0 + w.norm())) {
        stop(SolveStatus::Converged, "");
      } else {
        stop(SolveStatus::PieceStationary, "another piece at the terminal point offers descent");
      }
      break;
    }
    if (iter >= params.max_iters) {
      stop(SolveStatus::MaxIterations, "iteration limit reached");
      break;
    }

    KktPoint next = KktPoint::from_stacked(kkt, w + step.dw);
    if (params.reference) {
      const double e0 = (w - *params.reference).norm();
      const double e1 = (next.stacked() - *params.reference).norm();
      if (e0 > 0.0) {
        row.ratio = e1 / e0;
        rep.ratios.push_back(e1 / e0);
      }
    }
    row.tau = 1.0;
    row.status = "step";
    rep.trace.push_back(row);
    rep.pieces.push_back(piece.J2);
    p = std::move(next);
    nu = step.nu;
    if (p.stacked().norm() > bound) {
      TraceRow last;
      last.iter = iter + 1;
      last.phi = kkt_infeasibility(kkt, p);
      last.P_alpha = kkt.f(p.z());
      last.status = to_string(SolveStatus::Diverged);
      rep.trace.push_back(last);
      rep.status = SolveStatus::Diverged;
      rep.message = "iterate norm exceeded 1e6 (1 + ||w0||)";
      ++iter;
      break;
    }
  }

  rep.iterations = iter;
  rep.final_point = Iterate{p.x, p.y, p.lambda, Vec::Zero(0)};
  rep.final_phi = kkt_infeasibility(kkt, p);
  rep.final_value = kkt.f(p.z());
  rep.stationarity_residual = stat;
  try {
    const double tol = classification_tol(kkt, p, params.tol_active);
    rep.terminal_degenerate = !active_sets(kkt, p.z(), p.lambda, tol).I0.empty();
  } catch (const Error&) {
    rep.terminal_degenerate = false;
  }
  return rep;
}

}  // namespace mpec
