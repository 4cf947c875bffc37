#pragma once

#include <optional>
#include <vector>

#include "mpec/model.hpp"
#include "mpec/report.hpp"
#include "mpec/subsolvers.hpp"

namespace mpec {

/// Solution of w = q + N x + M y, y >= 0, w >= 0, y'w = 0 at a given x.
struct LowerSolution {
  Vec y, w;
  IndexSets sets;
};

/// Requires LCP form.
LowerSolution lower_solve(const MpecInstance& inst, const Vec& x);

/// One piece of the directional derivative: for S subset of beta, y is free
/// (w = 0) on alpha and S, y = 0 on gamma and beta \ S. On its cone
/// {dx : dy_S >= 0, dw_{beta \ S} >= 0} the derivative is dy = Dy dx,
/// dw = Dw dx.
struct BranchMap {
  Mask branch = 0;  // bit j set: beta[j] in S
  IndexList S;
  Mat Dy, Dw;  // m x n
  Mat cone;    // rows c with c dx <= 0
};

/// Branches with nonsingular M_JJ, in increasing mask order. |beta| <= 20.
std::vector<BranchMap> branch_maps(const MpecInstance& inst, const LowerSolution& sol);

/// B-derivative of the solution map along dx: first branch (mask order)
/// whose cone contains dx. Throws NoBranchFeasible.
Vec lower_directional_derivative(const MpecInstance& inst, const Vec& x, const LowerSolution& sol,
                                 const Vec& dx);

/// grad_x f' dx + grad_y f' dy + grad_w f' dw along the equilibrium graph.
double reduced_directional_derivative(const MpecInstance& inst, const Vec& x,
                                      const LowerSolution& sol, const Vec& dx);

struct BranchQp {
  BranchMap map;
  QpProblem qp;
};

std::vector<BranchQp> branch_qps(const MpecInstance& inst, const Vec& x, const LowerSolution& sol,
                                 const Mat& Qnu);

struct SubproblemResult {
  Vec dx;
  double value = 0.0;
  IndexList branch;  // S of the winning branch
  int branches_solved = 0;
};

/// Global minimum over branches of the regularized first-order model; ties go
/// to the lexicographically smallest S.
SubproblemResult direction_subproblem(const MpecInstance& inst, const Vec& x,
                                      const LowerSolution& sol, const Mat& Qnu);

struct ImplicitParams {
  double armijo_rho = 0.5;
  double armijo_eta = 1e-4;
  double tol_stat = 1e-14;  // stop when the subproblem value is >= -tol_stat
  int max_iters = 500;
  int max_backtracks = 60;
  std::optional<Mat> Q;  // default identity
};

struct PathStep {
  double tau = 0.0;
  Vec x;
  LowerSolution sol;
  int lower_solves = 0;
};

/// Armijo along x + tau dx, re-solving the lower level at every trial.
/// Throws LineSearchFailed.
PathStep equilibrium_path_linesearch(const MpecInstance& inst, const Vec& x,
                                     const LowerSolution& sol, const Vec& dx, double value,
                                     const ImplicitParams& params);

SolveReport implicit_solve(const MpecInstance& inst, const Vec& x0, const ImplicitParams& params);

}  // namespace mpec
