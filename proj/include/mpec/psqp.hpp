#pragma once

#include <optional>

#include "mpec/model.hpp"
#include "mpec/report.hpp"
#include "mpec/subsolvers.hpp"

namespace mpec {

/// KKT-form MPEC over z = (x, y) and multipliers lambda:
///   min f(z) = 1/2 z'H z + c'z + c0
///   s.t. Gu x + Hu y + au <= 0,  L(z, lambda) = F(z) + grad_y g' lambda = 0,
///        g(z) <= 0, lambda >= 0, g(z)'lambda = 0
/// with F(z) = Fz z + Fb (m rows) and g(z) = Ag z + bg (ell rows).
struct KktMpecInstance {
  int n = 0;
  int m = 0;
  int ell = 0;
  Mat H;
  Vec c;
  double c0 = 0.0;
  Mat Fz;
  Vec Fb;
  Mat Ag;
  Vec bg;
  Mat Gu, Hu;
  Vec au;

  int k() const { return static_cast<int>(au.size()); }
  /// Checks shapes; throws InvalidInstance.
  void validate() const;

  double f(const Vec& z) const;
  Vec grad_f(const Vec& z) const;
  Vec g(const Vec& z) const;
  Vec L(const Vec& z, const Vec& lambda) const;
  /// d L / d(z, lambda): m x (n + m + ell).
  Mat L_jacobian() const;
};

/// g = -y, lambda = w, L = q + N x + M y - lambda; the objective is composed
/// with w = q + N x + M y. Requires LCP form.
KktMpecInstance kkt_from_lcp(const MpecInstance& inst);

struct KktPoint {
  Vec x, y, lambda;
  Vec z() const;
  Vec stacked() const;
  static KktPoint from_stacked(const KktMpecInstance& kkt, const Vec& v);
};

struct ActiveSets {
  IndexList I0;        // |g| <= tol, |lambda| <= tol
  IndexList Iplus;     // |g| <= tol, lambda > tol
  IndexList inactive;  // g < -tol, |lambda| <= tol
  double tol = 0.0;
};

/// Throws NotComplementary(i) when g_i < -tol and lambda_i > tol.
ActiveSets active_sets(const KktMpecInstance& kkt, const Vec& z, const Vec& lambda, double tol);

struct Piece {
  IndexList J1;  // lambda = 0, g <= 0
  IndexList J2;  // g = 0, lambda >= 0
  bool operator==(const Piece& o) const { return J1 == o.J1 && J2 == o.J2; }
};

/// Degenerate i goes to J2 when lambda_i >= -g_i (ties to J2), else to J1.
Piece select_piece(const KktMpecInstance& kkt, const Vec& z, const Vec& lambda, double tol);

/// max(tol0, 10 * max_i |min(-g_i, lambda_i)|), so points off the
/// complementarity set still classify.
double classification_tol(const KktMpecInstance& kkt, const KktPoint& p, double tol0);

QpProblem build_psqp_qp(const KktMpecInstance& kkt, const KktPoint& p, const Piece& piece);

struct PsqpStep {
  Vec dw;  // (dx, dy, dlambda)
  Vec nu;  // multipliers of the linearized L rows
  double objective = 0.0;
};

/// Throws InconsistentPiece when the piece's linearized rows are infeasible.
PsqpStep psqp_step(const KktMpecInstance& kkt, const KktPoint& p, const Vec& nu,
                   const Piece& piece);

/// Least-squares multipliers of the L rows from grad f + grad_z L' nu = 0.
Vec initial_nu(const KktMpecInstance& kkt, const KktPoint& p);

struct PsqpParams {
  double tol_step = 1e-12;
  double tol_active = 1e-8;
  int max_iters = 50;
  std::optional<Vec> reference;  // stacked (x*, y*, lambda*) for the ratio sequence
};

/// Full steps on the selected piece. Terminal points with a nonempty
/// degenerate set are checked on every piece; a descent step on some other
/// piece gives PieceStationary instead of Converged.
SolveReport psqp_solve(const KktMpecInstance& kkt, const KktPoint& start, const PsqpParams& params);

/// Trace infeasibility ||L||^2 + sum_i |min(-g_i, lambda_i)|.
double kkt_infeasibility(const KktMpecInstance& kkt, const KktPoint& p);

}  // namespace mpec
