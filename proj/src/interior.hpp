#pragma once

#include "mpec/pipa.hpp"
#include "mpec/pipa_lcp.hpp"

namespace mpec::detail {

/// Direction by elimination of (dy, dw, dz); shared by both variants.
Direction eliminated_direction(const MpecInstance& inst, const Iterate& it, const Mat& Qv,
                               double sigma, double c);

QpProblem full_direction_qp(const MpecInstance& inst, const Iterate& it, const Mat& Qv,
                            double sigma, double c);

/// Outer loop; `lcp_variant` selects phi_lcp, the closed-form step bound with
/// the limited complementarity decrease and merit-only backtracking.
SolveReport run_interior(const MpecInstance& inst, const Iterate& start, const PipaParams& params,
                         const InteriorObserver& observer, bool lcp_variant);

}  // namespace mpec::detail
