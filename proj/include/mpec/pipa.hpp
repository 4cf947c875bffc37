#pragma once

#include <functional>
#include <optional>

#include "mpec/model.hpp"
#include "mpec/report.hpp"
#include "mpec/step_bounds.hpp"
#include "mpec/subsolvers.hpp"

namespace mpec {

struct PipaParams {
  double sigma = 0.5;         // centering, in (0, 1)
  double p = 0.0;             // centrality fraction; <= 0 selects min(0.1, 0.9 min_i y_i w_i / mu)
  double c = 10.0;            // step-bound coefficient
  double alpha0 = 1.0;
  double alpha_growth = 10.0;
  double alpha_max = 1e12;
  double armijo_rho = 0.5;
  double armijo_eta = 1e-4;
  double tol_phi = 1e-14;
  double tol_stat = 1e-6;
  int max_iters = 200;
  int max_backtracks = 60;
  std::optional<Mat> Qv;      // default (1 + ||Hxx||_2) I
};

/// Throws InvalidArgument on out-of-range parameters.
void validate_params(const PipaParams& params);

struct Direction {
  Vec dx, dy, dw, dz;
  Vec ineq_multipliers;  // rows of G
  double ball_multiplier = 0.0;
  /// grad f' d + 1/2 dx' Qv dx.
  double model_value = 0.0;

  Vec stacked() const;
};

Mat default_qv(const MpecInstance& inst);
double centrality_fraction(const PipaParams& params, const Iterate& start);

/// The direction QP in the full variable (dx, dy, dw, dz): Newton rows for F,
/// centering rows, x + dx in X and ||dx||^2 <= c (||F|| + y'w).
QpProblem build_pipa_qp(const MpecInstance& inst, const Iterate& it, const Mat& Qv, double sigma,
                        double c);

/// Same QP solved after eliminating (dy, dw, dz) through the lower block
/// [[F_y F_w F_z], [W Y 0]]. Throws SingularLowerBlock.
Direction pipa_direction(const MpecInstance& inst, const Iterate& it, const Mat& Qv,
                         const PipaParams& params);

/// Analytic grad(phi)' d from the block gradients of phi (not the identity).
double phi_directional_derivative(const MpecInstance& inst, const Iterate& it, const Direction& d,
                                  PhiKind kind);

Iterate advance(const Iterate& it, const Direction& d, double tau);

struct LineSearchResult {
  double tau = 0.0;
  Iterate next;
  StepBound bound;
  int backtracks = 0;
};

/// Backtracking tau = tau_max * rho^k with (i) positivity, (ii) centrality
/// guaranteed by tau_max, then (iii) phi decrease and (iv) Armijo on P_alpha.
LineSearchResult pipa_linesearch(const MpecInstance& inst, const Iterate& it, const Direction& dir,
                                 double alpha, const PipaParams& params, double p);

struct InteriorStep {
  int iter = 0;
  const Iterate* base = nullptr;
  const Direction* dir = nullptr;
  const Iterate* next = nullptr;
  double sigma = 0.0;
  double p = 0.0;
  double alpha = 0.0;
  double tau = 0.0;
  double tau_max = 0.0;
};
using InteriorObserver = std::function<void(const InteriorStep&)>;

SolveReport pipa_solve(const MpecInstance& inst, const Iterate& start, const PipaParams& params,
                       const InteriorObserver& observer = {});

}  // namespace mpec
