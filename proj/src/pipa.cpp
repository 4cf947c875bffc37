#include "mpec/pipa.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "interior.hpp"
#include "mpec/errors.hpp"

namespace mpec {

void validate_params(const PipaParams& pr) {
  auto bad = [](const char* what) { throw Error(ErrorCode::InvalidArgument, what); };
  if (!(pr.sigma > 0.0 && pr.sigma < 1.0)) bad("sigma must lie in (0, 1)");
  if (!(pr.p < 1.0)) bad("p must lie in (0, 1)");
  if (!(pr.c > 0.0)) bad("c must be positive");
  if (!(pr.alpha0 > 0.0)) bad("alpha0 must be positive");
  if (!(pr.alpha_growth > 1.0)) bad("alpha_growth must exceed 1");
  if (!(pr.alpha_max >= pr.alpha0)) bad("alpha_max must be at least alpha0");
  if (!(pr.armijo_rho > 0.0 && pr.armijo_rho < 1.0)) bad("armijo_rho must lie in (0, 1)");
  if (!(pr.armijo_eta > 0.0 && pr.armijo_eta < 1.0)) bad("armijo_eta must lie in (0, 1)");
  if (!(pr.tol_phi > 0.0) || !(pr.tol_stat > 0.0)) bad("tolerances must be positive");
  if (pr.max_iters < 0) bad("max_iters must be nonnegative");
  if (pr.max_backtracks < 1) bad("max_backtracks must be positive");
}

Vec Direction::stacked() const {
  Vec d(dx.size() + dy.size() + dw.size() + dz.size());
  d << dx, dy, dw, dz;
  return d;
}

Mat default_qv(const MpecInstance& inst) {
  const int n = inst.n();
  double norm = 0.0;
  if (n > 0) {
    Eigen::JacobiSVD<Mat> svd(inst.hessian().topLeftCorner(n, n));
    norm = svd.singularValues()(0);
  }
  return (1.0 + norm) * Mat::Identity(n, n);
}

double centrality_fraction(const PipaParams& params, const Iterate& start) {
  if (params.p > 0.0) return params.p;
  const double mu = start.mu();
  if (start.y.size() == 0 || !(mu > 0.0)) return 0.1;
  const double ratio = start.y.cwiseProduct(start.w).minCoeff() / mu;
  return std::min(0.1, 0.9 * ratio);
}

static double first_trial(const StepBound& bound, double mu) {
  // fraction to the boundary, tending to 1 as mu -> 0; a fixed 1 - 1e-12 lets
  // y or w shrink by 1e12 per step and underflow
  const double theta = std::max(0.995, 1.0 - mu);
  return std::min(bound.tau, theta * bound.positivity);
}

Iterate advance(const Iterate& it, const Direction& d, double tau) {
  return Iterate{it.x + tau * d.dx, it.y + tau * d.dy, it.w + tau * d.dw, it.z + tau * d.dz};
}

double phi_directional_derivative(const MpecInstance& inst, const Iterate& it, const Direction& d,
                                  PhiKind kind) {
  const Vec F = lower_residual(inst, it);
  const Vec JF = inst.jacobian() * d.stacked();
  const double comp = it.w.dot(d.dy) + it.y.dot(d.dw);
  if (kind == PhiKind::General) return 2.0 * F.dot(JF) + comp;
  const double nr = F.norm();
  return comp + (nr > 0.0 ? F.dot(JF) / nr : JF.norm());
}

namespace detail {

namespace {

void check_interior(const Iterate& it) {
  if (it.y.size() && (it.y.minCoeff() <= 0.0 || it.w.minCoeff() <= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "iterate is not strictly interior (y > 0, w > 0)");
  }
}

}  // namespace

QpProblem full_direction_qp(const MpecInstance& inst, const Iterate& it, const Mat& Qv,
                            double sigma, double c) {
  check_interior(it);
  const int n = inst.n(), m = inst.m(), l = inst.l(), N = inst.dim(), k = inst.k();
  if (Qv.rows() != n || Qv.cols() != n) throw Error(ErrorCode::InvalidArgument, "Qv must be n x n");
  const Vec F = lower_residual(inst, it);
  const double mu = it.mu();

  QpProblem qp = QpProblem::zeros(N);
  qp.Q.topLeftCorner(n, n) = Qv;
  qp.c = objective_gradient(inst, it);
  qp.E = Mat::Zero(2 * m + l, N);
  qp.E.topRows(m + l) = inst.jacobian();
  qp.e = Vec::Zero(2 * m + l);
  qp.e.head(m + l) = -F;
  for (int i = 0; i < m; ++i) {
    qp.E(m + l + i, n + i) = it.w(i);
    qp.E(m + l + i, n + m + i) = it.y(i);
    qp.e(m + l + i) = -it.y(i) * it.w(i) + sigma * mu;
  }
  qp.A = Mat::Zero(k, N);
  qp.A.leftCols(n) = inst.G();
  qp.b = inst.a() - inst.G() * it.x;
  qp.ball = BallConstraint{0, n, c * (F.norm() + it.y.dot(it.w))};
  return qp;
}

Direction eliminated_direction(const MpecInstance& inst, const Iterate& it, const Mat& Qv,
                               double sigma, double c) {
  check_interior(it);
  const int n = inst.n(), m = inst.m(), l = inst.l();
  if (Qv.rows() != n || Qv.cols() != n) throw Error(ErrorCode::InvalidArgument, "Qv must be n x n");
  const Vec F = lower_residual(inst, it);
  const double mu = it.mu();
  const int nv = 2 * m + l;

  // K v = rhs0 - B dx with v = (dy, dw, dz)
  Mat K = Mat::Zero(nv, nv);
  K.topRows(m + l) = inst.jacobian().rightCols(nv);
  Mat B = Mat::Zero(nv, n);
  B.topRows(m + l) = inst.jacobian().leftCols(n);
  Vec rhs0(nv);
  rhs0.head(m + l) = -F;
  for (int i = 0; i < m; ++i) {
    K(m + l + i, i) = it.w(i);
    K(m + l + i, m + i) = it.y(i);
    rhs0(m + l + i) = -it.y(i) * it.w(i) + sigma * mu;
  }
  Vec v0;
  Mat D(nv, n);
  try {
    v0 = solve_linear(K, rhs0);
    for (int j = 0; j < n; ++j) D.col(j) = -solve_linear(K, B.col(j));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::Singular) throw;
    throw Error(ErrorCode::SingularLowerBlock, "linearized lower-level block is singular");
  }

  const Vec g = objective_gradient(inst, it);
  const Vec gv = g.tail(nv);
  Direction dir;
  if (n > 0) {
    QpProblem qp = QpProblem::zeros(n);
    qp.Q = 0.5 * (Qv + Qv.transpose());
    qp.c = g.head(n) + D.transpose() * gv;
    qp.A = inst.G();
    qp.b = inst.a() - inst.G() * it.x;
    qp.ball = BallConstraint{0, n, c * (F.norm() + it.y.dot(it.w))};
    const QpSolution sol = solve_qp(qp);
    dir.dx = sol.d;
    dir.ineq_multipliers = sol.ineq_multipliers;
    dir.ball_multiplier = sol.ball_multiplier;
  } else {
    dir.dx = Vec::Zero(0);
    dir.ineq_multipliers = Vec::Zero(inst.k());
  }
  const Vec v = v0 + D * dir.dx;
  dir.dy = v.head(m);
  dir.dw = v.segment(m, m);
  dir.dz = v.tail(l);
  dir.model_value = g.dot(dir.stacked()) + 0.5 * dir.dx.dot(Qv * dir.dx);
  return dir;
}

SolveReport run_interior(const MpecInstance& inst, const Iterate& start, const PipaParams& params,
                         const InteriorObserver& observer, bool lcp_variant) {
  validate_params(params);
  if (lcp_variant && !inst.is_lcp_form()) {
    throw Error(ErrorCode::WrongForm, "the LCP variant needs an LCP-form instance");
  }
  if (start.x.size() != inst.n() || start.y.size() != inst.m() || start.w.size() != inst.m() ||
      start.z.size() != inst.l()) {
    throw Error(ErrorCode::InvalidArgument, "start dimensions do not match the instance");
  }
  check_interior(start);
  const Mat Qv = params.Qv ? *params.Qv : default_qv(inst);
  if (Qv.rows() != inst.n() || Qv.cols() != inst.n()) {
    throw Error(ErrorCode::InvalidArgument, "Qv must be n x n");
  }
  const double p = centrality_fraction(params, start);
  if (!(p > 0.0 && p < 1.0)) throw Error(ErrorCode::InvalidArgument, "centrality fraction not in (0, 1)");
  if (inst.m() > 0 && start.y.cwiseProduct(start.w).minCoeff() - p * start.mu() < -1e-12) {
    throw Error(ErrorCode::InvalidArgument, "start violates centrality y_i w_i >= p mu");
  }
  if (inst.k() > 0 && (inst.G() * start.x - inst.a()).maxCoeff() > 1e-9) {
    throw Error(ErrorCode::InvalidArgument, "start x is not in X");
  }

  const PhiKind kind = lcp_variant ? PhiKind::Lcp : PhiKind::General;
  SolveReport rep;
  rep.algo = lcp_variant ? "pipa-lcp" : "pipa";
  double alpha = params.alpha0;
  Iterate it = start;
  double last_stat = -1.0;
  int iter = 0;
  for (;; ++iter) {
    const double phi_v = phi(inst, it, kind);
    const double f = objective_value(inst, it);
    TraceRow row;
    row.iter = iter;
    row.phi = phi_v;
    row.alpha = alpha;
    row.P_alpha = f + alpha * phi_v;
    row.mu = it.mu();

    auto stop = [&](SolveStatus st, const std::string& msg) {
      rep.status = st;
      rep.message = msg;
      row.status = to_string(st);
      rep.trace.push_back(row);
    };

    last_stat = -1.0;
    if (phi_v <= params.tol_phi) {
      try {
        last_stat = b_stationarity_residual(inst, it);
      } catch (const Error&) {
        last_stat = std::numeric_limits<double>::infinity();
      }
      if (last_stat <= params.tol_stat) {
        stop(SolveStatus::Converged, "");
        break;
      }
    }
    if (iter >= params.max_iters) {
      stop(SolveStatus::MaxIterations, "iteration limit reached");
      break;
    }

    Direction dir;
    try {
      dir = lcp_variant ? lcp_pipa_direction(inst, it, Qv, params)
                        : pipa_direction(inst, it, Qv, params);
    } catch (const Error& e) {
      stop(SolveStatus::Failed, e.what());
      break;
    }
    row.norm_dx = dir.dx.norm();
    if (phi_v <= params.tol_phi && row.norm_dx <= params.tol_stat) {
      std::ostringstream os;
      os << "step vanished with stationarity residual " << last_stat
         << " (possible nonstationary limit)";
      stop(SolveStatus::NonstationaryStall, os.str());
      break;
    }

    const double dphi = phi_directional_derivative(inst, it, dir, kind);
    const double dfd = objective_gradient(inst, it).dot(dir.stacked());
    bool raised = false;
    while (dfd + alpha * dphi > -params.armijo_eta * phi_v && alpha < params.alpha_max) {
      alpha = std::min(alpha * params.alpha_growth, params.alpha_max);
      raised = true;
    }
    if (raised) rep.penalty_updates.push_back(iter);
    row.alpha = alpha;
    row.P_alpha = f + alpha * phi_v;

    double tau = 0.0, tau_max = 0.0;
    Iterate next;
    try {
      if (lcp_variant) {
        const ArcState arc = make_arc(inst, it, dir, params.sigma);
        const StepBound bound = max_step(arc, p);
        tau_max = bound.tau;
        row.tau_max = bound.tau;
        row.binding_condition = to_string(bound.binding);
        const double P0 = row.P_alpha;
        const double slope = dfd + alpha * dphi;
        const double slack = 1e-15 * (1.0 + std::abs(P0));
        tau = first_trial(bound, it.mu());
        bool ok = false;
        for (int k = 0; k <= params.max_backtracks; ++k) {
          next = advance(it, dir, tau);
          const double Pn = penalty_value(inst, next, alpha, kind);
          if (Pn <= P0 + params.armijo_eta * tau * slope + slack) {
            ok = true;
            break;
          }
          tau *= params.armijo_rho;
        }
        if (!ok) throw Error(ErrorCode::LineSearchFailed, "Armijo backtracking exhausted");
        residual_on_arc(inst, arc, tau);
        complementarity_on_arc(arc, tau);
      } else {
        const LineSearchResult ls = pipa_linesearch(inst, it, dir, alpha, params, p);
        tau = ls.tau;
        tau_max = ls.bound.tau;
        next = ls.next;
      }
    } catch (const Error& e) {
      if (e.code() == ErrorCode::NoAdmissibleStep) {
        stop(SolveStatus::NoAdmissibleStep, e.what());
      } else if (e.code() == ErrorCode::LineSearchFailed) {
        stop(SolveStatus::LineSearchFailed, e.what());
      } else {
        stop(SolveStatus::Failed, e.what());
      }
      break;
    }

    row.tau = tau;
    row.status = raised ? "penalty_increased" : "step";
    rep.trace.push_back(row);
    if (observer) {
      InteriorStep ev;
      ev.iter = iter;
      ev.base = &it;
      ev.dir = &dir;
      ev.next = &next;
      ev.sigma = params.sigma;
      ev.p = p;
      ev.alpha = alpha;
      ev.tau = tau;
      ev.tau_max = tau_max;
      observer(ev);
    }
    it = std::move(next);
  }

  rep.iterations = iter;
  rep.final_point = it;
  rep.final_phi = phi(inst, it, kind);
  rep.final_value = objective_value(inst, it);
  rep.feasible_value = feasible_objective(inst, it.x);
  if (last_stat >= 0.0) {
    rep.stationarity_residual = last_stat;
  } else {
    try {
      rep.stationarity_residual = b_stationarity_residual(inst, it);
    } catch (const Error&) {
      rep.stationarity_residual = std::numeric_limits<double>::infinity();
    }
  }
  IndexSets sets;
  complementary_rounding(it, &sets);
  rep.terminal_degenerate = !sets.beta.empty();
  rep.final_alpha = alpha;
  rep.penalty_branch = alpha >= params.alpha_max ? "unbounded" : "bounded";
  return rep;
}

}  // namespace detail

QpProblem build_pipa_qp(const MpecInstance& inst, const Iterate& it, const Mat& Qv, double sigma,
                        double c) {
  return detail::full_direction_qp(inst, it, Qv, sigma, c);
}

Direction pipa_direction(const MpecInstance& inst, const Iterate& it, const Mat& Qv,
                         const PipaParams& params) {
  return detail::eliminated_direction(inst, it, Qv, params.sigma, params.c);
}

LineSearchResult pipa_linesearch(const MpecInstance& inst, const Iterate& it, const Direction& dir,
                                 double alpha, const PipaParams& params, double p) {
  if (dir.stacked().cwiseAbs().maxCoeff() == 0.0) {
    throw Error(ErrorCode::InvalidArgument, "zero direction; the caller should have terminated");
  }
  LineSearchResult out;
  out.bound = interior_step_bound(it.y, it.w, dir.dy, dir.dw, p, false, params.sigma);
  if (!(out.bound.tau >= 1e-14)) {
    throw Error(ErrorCode::LineSearchFailed, "no step keeps positivity and centrality");
  }
  const double phi0 = phi_general(inst, it);
  const double P0 = penalty_value(inst, it, alpha, PhiKind::General);
  const double slope = objective_gradient(inst, it).dot(dir.stacked()) +
                       alpha * phi_directional_derivative(inst, it, dir, PhiKind::General);
  const double slack = 1e-15 * (1.0 + std::abs(P0));
  double tau = first_trial(out.bound, it.mu());
  for (int k = 0; k <= params.max_backtracks; ++k) {
    Iterate cand = advance(it, dir, tau);
    const double phin = phi_general(inst, cand);
    const double Pn = penalty_value(inst, cand, alpha, PhiKind::General);
    const bool phi_ok = phin <= (1.0 - params.armijo_eta * tau * (1.0 - params.sigma)) * phi0;
    const bool merit_ok = Pn <= P0 + params.armijo_eta * tau * slope + slack;
    if (phi_ok && merit_ok) {
      out.tau = tau;
      out.next = std::move(cand);
      out.backtracks = k;
      return out;
    }
    tau *= params.armijo_rho;
  }
  throw Error(ErrorCode::LineSearchFailed, "backtracking exhausted");
}

SolveReport pipa_solve(const MpecInstance& inst, const Iterate& start, const PipaParams& params,
                       const InteriorObserver& observer) {
  return detail::run_interior(inst, start, params, observer, false);
}

}  // namespace mpec
