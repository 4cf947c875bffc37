#pragma once

#include "mpec/pipa.hpp"

namespace mpec {

/// Base point and direction with the products the arc identities use.
struct ArcState {
  Iterate base;
  Direction dir;
  double sigma = 0.0;
  double mu = 0.0;
  double wty = 0.0;
  double dwtdy = 0.0;
  Vec wy, cross, dwdy;  // w.*y, w.*dy + y.*dw, dw.*dy
  Vec r0;
};

ArcState make_arc(const MpecInstance& inst, const Iterate& base, const Direction& dir,
                  double sigma);

/// r at base + tau dir; throws IdentityViolated unless it equals (1 - tau) r0.
Vec residual_on_arc(const MpecInstance& inst, const ArcState& arc, double tau);

/// w(tau).*y(tau); throws IdentityViolated unless it equals
/// (1 - tau) w.*y + tau sigma mu e + tau^2 dw.*dy.
Vec complementarity_on_arc(const ArcState& arc, double tau);

/// Closed-form tau_max in (0, 1] for positivity, centrality and the limited
/// complementarity decrease. Throws NoAdmissibleStep below 1e-14.
StepBound max_step(const ArcState& arc, double p);

QpProblem build_lcp_pipa_qp(const MpecInstance& inst, const Iterate& it, const Mat& Qv,
                            double sigma, double c);

/// Requires LCP form (WrongForm otherwise).
Direction lcp_pipa_direction(const MpecInstance& inst, const Iterate& it, const Mat& Qv,
                             const PipaParams& params);

SolveReport lcp_pipa_solve(const MpecInstance& inst, const Iterate& start, const PipaParams& params,
                           const InteriorObserver& observer = {});

}  // namespace mpec
