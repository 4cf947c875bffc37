#include "mpec/pipa_lcp.hpp"

#include <cmath>

#include "interior.hpp"
#include "mpec/errors.hpp"

namespace mpec {

namespace {

void require_lcp(const MpecInstance& inst) {
  if (!inst.is_lcp_form()) throw Error(ErrorCode::WrongForm, "instance has no LCP block");
}

double max_abs(const Vec& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

ArcState make_arc(const MpecInstance& inst, const Iterate& base, const Direction& dir,
                  double sigma) {
  require_lcp(inst);
  ArcState arc;
  arc.base = base;
  arc.dir = dir;
  arc.sigma = sigma;
  arc.mu = base.mu();
  arc.wty = base.w.dot(base.y);
  arc.dwtdy = dir.dw.dot(dir.dy);
  arc.wy = base.w.cwiseProduct(base.y);
  arc.cross = base.w.cwiseProduct(dir.dy) + base.y.cwiseProduct(dir.dw);
  arc.dwdy = dir.dw.cwiseProduct(dir.dy);
  arc.r0 = lower_residual(inst, base);
  return arc;
}

Vec residual_on_arc(const MpecInstance& inst, const ArcState& arc, double tau) {
  if (!(tau >= 0.0 && tau <= 1.0)) throw Error(ErrorCode::InvalidArgument, "tau must lie in [0, 1]");
  const Vec r = lower_residual(inst, advance(arc.base, arc.dir, tau));
  const Vec expected = (1.0 - tau) * arc.r0;
  const double scale = 1.0 + max_abs(arc.r0);
  if (max_abs(r - expected) > 1e-12 * scale) {
    throw Error(ErrorCode::IdentityViolated, "residual along the arc is not (1 - tau) r");
  }
  return r;
}

Vec complementarity_on_arc(const ArcState& arc, double tau) {
  if (!(tau >= 0.0 && tau <= 1.0)) throw Error(ErrorCode::InvalidArgument, "tau must lie in [0, 1]");
  const Vec y = arc.base.y + tau * arc.dir.dy;
  const Vec w = arc.base.w + tau * arc.dir.dw;
  const Vec prod = w.cwiseProduct(y);
  const Vec expected = (1.0 - tau) * arc.wy +
                       Vec::Constant(arc.wy.size(), tau * arc.sigma * arc.mu) +
                       tau * tau * arc.dwdy;
  const double scale = 1.0 + max_abs(arc.wy) + max_abs(arc.dwdy);
  if (max_abs(prod - expected) > 1e-12 * scale) {
    throw Error(ErrorCode::IdentityViolated, "complementarity along the arc breaks the expansion");
  }
  return prod;
}

StepBound max_step(const ArcState& arc, double p) {
  const StepBound b =
      interior_step_bound(arc.base.y, arc.base.w, arc.dir.dy, arc.dir.dw, p, true, arc.sigma);
  if (!(b.tau >= 1e-14)) throw Error(ErrorCode::NoAdmissibleStep, "tau_max below 1e-14");
  return b;
}

QpProblem build_lcp_pipa_qp(const MpecInstance& inst, const Iterate& it, const Mat& Qv,
                            double sigma, double c) {
  require_lcp(inst);
  return detail::full_direction_qp(inst, it, Qv, sigma, c);
}

Direction lcp_pipa_direction(const MpecInstance& inst, const Iterate& it, const Mat& Qv,
                             const PipaParams& params) {
  require_lcp(inst);
  return detail::eliminated_direction(inst, it, Qv, params.sigma, params.c);
}

SolveReport lcp_pipa_solve(const MpecInstance& inst, const Iterate& start, const PipaParams& params,
                           const InteriorObserver& observer) {
  return detail::run_interior(inst, start, params, observer, true);
}

}  // namespace mpec
