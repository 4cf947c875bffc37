#include "mpec/implicit.hpp"

#include <algorithm>
#include <cmath>

#include "mpec/errors.hpp"

namespace mpec {

namespace {

void require_lcp(const MpecInstance& inst) {
  if (!inst.is_lcp_form()) throw Error(ErrorCode::WrongForm, "implicit programming needs LCP form");
}

double reduced_value(const MpecInstance& inst, const Vec& x, const LowerSolution& sol) {
  return objective_value(inst, Iterate{x, sol.y, sol.w, Vec::Zero(0)});
}

}  // namespace

LowerSolution lower_solve(const MpecInstance& inst, const Vec& x) {
  require_lcp(inst);
  if (x.size() != inst.n()) throw Error(ErrorCode::InvalidArgument, "x has wrong length");
  const LcpSolution s = solve_lcp(inst.M(), inst.q() + inst.N() * x);
  LowerSolution out{s.y, s.w, {}};
  out.sets = index_sets(s.y, s.w, default_classification_tol(s.y, s.w));
  return out;
}

std::vector<BranchMap> branch_maps(const MpecInstance& inst, const LowerSolution& sol) {
  require_lcp(inst);
  const int n = inst.n(), m = inst.m();
  const auto& beta = sol.sets.beta;
  const int nb = static_cast<int>(beta.size());
  if (nb > 20) throw Error(ErrorCode::DimensionTooLarge, "degenerate set larger than 20");
  const Mat& M = inst.M();
  const Mat& N = inst.N();

  std::vector<BranchMap> maps;
  for (Mask mask = 0; mask < (Mask(1) << nb); ++mask) {
    BranchMap bm;
    bm.branch = mask;
    IndexList J = sol.sets.alpha;
    for (int j = 0; j < nb; ++j) {
      if (mask & (Mask(1) << j)) {
        bm.S.push_back(beta[j]);
        J.push_back(beta[j]);
      }
    }
    std::sort(J.begin(), J.end());
    const int nj = static_cast<int>(J.size());
    bm.Dy = Mat::Zero(m, n);
    if (nj > 0) {
      Mat MJJ(nj, nj), NJ(nj, n);
      for (int a = 0; a < nj; ++a) {
        NJ.row(a) = N.row(J[a]);
        for (int b = 0; b < nj; ++b) MJJ(a, b) = M(J[a], J[b]);
      }
      Mat DJ(nj, n);
      try {
        for (int c = 0; c < n; ++c) DJ.col(c) = -solve_linear(MJJ, NJ.col(c));
      } catch (const Error& e) {
        if (e.code() == ErrorCode::Singular) continue;
        throw;
      }
      for (int a = 0; a < nj; ++a) bm.Dy.row(J[a]) = DJ.row(a);
    }
    bm.Dw = N + M * bm.Dy;
    bm.cone = Mat::Zero(nb, n);
    for (int j = 0; j < nb; ++j) {
      const bool yside = (mask & (Mask(1) << j)) != 0;
      bm.cone.row(j) = yside ? -bm.Dy.row(beta[j]) : -bm.Dw.row(beta[j]);
    }
    maps.push_back(std::move(bm));
  }
  return maps;
}

Vec lower_directional_derivative(const MpecInstance& inst, const Vec& x, const LowerSolution& sol,
                                 const Vec& dx) {
  require_lcp(inst);
  if (x.size() != inst.n() || dx.size() != inst.n()) {
    throw Error(ErrorCode::InvalidArgument, "x or dx has wrong length");
  }
  const double tol = 1e-12 * (1.0 + (dx.size() ? dx.cwiseAbs().maxCoeff() : 0.0));
  for (const auto& bm : branch_maps(inst, sol)) {
    const Vec c = bm.cone * dx;
    if (c.size() == 0 || c.maxCoeff() <= tol) return bm.Dy * dx;
  }
  throw Error(ErrorCode::NoBranchFeasible, "no branch of the directional LCP contains dx");
}

double reduced_directional_derivative(const MpecInstance& inst, const Vec& x,
                                      const LowerSolution& sol, const Vec& dx) {
  const Vec dy = lower_directional_derivative(inst, x, sol, dx);
  const Vec dw = inst.N() * dx + inst.M() * dy;
  const Vec g = objective_gradient(inst, Iterate{x, sol.y, sol.w, Vec::Zero(0)});
  const int n = inst.n(), m = inst.m();
  return g.head(n).dot(dx) + g.segment(n, m).dot(dy) + g.segment(n + m, m).dot(dw);
}

std::vector<BranchQp> branch_qps(const MpecInstance& inst, const Vec& x, const LowerSolution& sol,
                                 const Mat& Qnu) {
  require_lcp(inst);
  const int n = inst.n(), m = inst.m();
  if (Qnu.rows() != n || Qnu.cols() != n) throw Error(ErrorCode::InvalidArgument, "Q must be n x n");
  const Vec g = objective_gradient(inst, Iterate{x, sol.y, sol.w, Vec::Zero(0)});
  const Vec gx = g.head(n), gy = g.segment(n, m), gw = g.segment(n + m, m);
  std::vector<BranchQp> out;
  for (auto& bm : branch_maps(inst, sol)) {
    BranchQp b;
    b.qp = QpProblem::zeros(n);
    b.qp.Q = 0.5 * (Qnu + Qnu.transpose());
    b.qp.c = gx + bm.Dy.transpose() * gy + bm.Dw.transpose() * gw;
    const int k = inst.k();
    const int nc = static_cast<int>(bm.cone.rows());
    b.qp.A = Mat(k + nc, n);
    b.qp.b = Vec::Zero(k + nc);
    b.qp.A.topRows(k) = inst.G();
    b.qp.A.bottomRows(nc) = bm.cone;
    b.qp.b.head(k) = inst.a() - inst.G() * x;
    b.map = std::move(bm);
    out.push_back(std::move(b));
  }
  return out;
}

SubproblemResult direction_subproblem(const MpecInstance& inst, const Vec& x,
                                      const LowerSolution& sol, const Mat& Qnu) {
  SubproblemResult best;
  best.dx = Vec::Zero(inst.n());
  best.value = 0.0;
  bool have = false;
  Mask best_mask = 0;
  const int nb = static_cast<int>(sol.sets.beta.size());
  for (const auto& b : branch_qps(inst, x, sol, Qnu)) {
    QpSolution s;
    try {
      s = solve_qp(b.qp);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::Infeasible || e.code() == ErrorCode::Unbounded) continue;
      throw;
    }
    ++best.branches_solved;
    const double v = s.objective;
    const double tie = 1e-14 * (1.0 + std::abs(v));
    if (!have || v < best.value - tie ||
        (std::abs(v - best.value) <= tie && lex_less(b.map.branch, best_mask, nb))) {
      have = true;
      best.dx = s.d;
      best.value = v;
      best.branch = b.map.S;
      best_mask = b.map.branch;
    }
  }
  if (!have) throw Error(ErrorCode::NoBranchFeasible, "every branch QP failed");
  if (best.value > 0.0) {
    // dx = 0 is always feasible with value 0
    best.value = 0.0;
    best.dx.setZero();
  }
  return best;
}

PathStep equilibrium_path_linesearch(const MpecInstance& inst, const Vec& x,
                                     const LowerSolution& sol, const Vec& dx, double value,
                                     const ImplicitParams& params) {
  if (!(value < 0.0)) throw Error(ErrorCode::InvalidArgument, "line search needs a negative model value");
  const double f0 = reduced_value(inst, x, sol);
  const double slack = 4.0 * 2.2e-16 * (1.0 + std::abs(f0));
  PathStep out;
  double tau = 1.0;
  for (int k = 0; k <= params.max_backtracks; ++k) {
    const Vec xt = x + tau * dx;
    LowerSolution st = lower_solve(inst, xt);
    ++out.lower_solves;
    if (reduced_value(inst, xt, st) <= f0 + params.armijo_eta * tau * value + slack) {
      out.tau = tau;
      out.x = xt;
      out.sol = std::move(st);
      return out;
    }
    tau *= params.armijo_rho;
  }
  throw Error(ErrorCode::LineSearchFailed, "Armijo backtracking along the equilibrium path exhausted");
}

SolveReport implicit_solve(const MpecInstance& inst, const Vec& x0, const ImplicitParams& params) {
  require_lcp(inst);
  if (x0.size() != inst.n()) throw Error(ErrorCode::InvalidArgument, "x0 has wrong length");
  if (!(params.armijo_rho > 0.0 && params.armijo_rho < 1.0) ||
      !(params.armijo_eta > 0.0 && params.armijo_eta < 1.0) || !(params.tol_stat >= 0.0) ||
      params.max_iters < 0 || params.max_backtracks < 1) {
    throw Error(ErrorCode::InvalidArgument, "implicit parameters out of range");
  }
  if (inst.k() > 0 && (inst.G() * x0 - inst.a()).maxCoeff() > 1e-9) {
    throw Error(ErrorCode::InvalidArgument, "x0 is not in X");
  }
  const Mat Q = params.Q ? *params.Q : Mat::Identity(inst.n(), inst.n());

  SolveReport rep;
  rep.algo = "implicit";
  Vec x = x0;
  LowerSolution sol = lower_solve(inst, x);
  int solves = 1;
  double last_value = 0.0;
  int iter = 0;
  for (;; ++iter) {
    const Iterate pt{x, sol.y, sol.w, Vec::Zero(0)};
    TraceRow row;
    row.iter = iter;
    row.phi = phi_lcp(inst, pt);
    row.P_alpha = objective_value(inst, pt);
    row.mu = pt.mu();
    row.beta_size = static_cast<int>(sol.sets.beta.size());

    auto stop = [&](SolveStatus st, const std::string& msg) {
      rep.status = st;
      rep.message = msg;
      row.status = to_string(st);
      row.lower_solves = solves;
      rep.trace.push_back(row);
    };

    SubproblemResult sub;
    try {
      sub = direction_subproblem(inst, x, sol, Q);
    } catch (const Error& e) {
      stop(SolveStatus::Failed, e.what());
      break;
    }
    last_value = sub.value;
    row.subproblem_value = sub.value;
    row.norm_dx = sub.dx.norm();
    if (sub.value >= -params.tol_stat) {
      stop(SolveStatus::Converged, "");
      break;
    }
    if (iter >= params.max_iters) {
      stop(SolveStatus::MaxIterations, "iteration limit reached");
      break;
    }
    PathStep step;
    try {
      step = equilibrium_path_linesearch(inst, x, sol, sub.dx, sub.value, params);
    } catch (const Error& e) {
      stop(e.code() == ErrorCode::LineSearchFailed ? SolveStatus::LineSearchFailed
                                                   : SolveStatus::Failed,
           e.what());
      break;
    }
    solves += step.lower_solves;
    row.tau = step.tau;
    row.status = "step";
    row.lower_solves = solves;
    rep.trace.push_back(row);
    x = step.x;
    sol = std::move(step.sol);
  }

  rep.iterations = iter;
  rep.final_point = Iterate{x, sol.y, sol.w, Vec::Zero(0)};
  rep.final_phi = phi_lcp(inst, rep.final_point);
  rep.final_value = objective_value(inst, rep.final_point);
  rep.feasible_value = rep.final_value;
  rep.stationarity_residual = std::max(0.0, -last_value);
  rep.lower_solves = solves;
  rep.terminal_degenerate = !sol.sets.beta.empty();
  return rep;
}

}  // namespace mpec
