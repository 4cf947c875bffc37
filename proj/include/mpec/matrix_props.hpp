#pragma once

#include <cstdint>
#include <optional>
#include <utility>

#include "mpec/types.hpp"

namespace mpec {

/// Q = [A B C] with A, B of size (m+l) x m and C of size (m+l) x l.
struct PartitionedMatrix {
  Mat A, B, C;
};

struct MatrixPair {
  Mat W0, W1;
};

/// Column representative: column i from W1 when bit i of `mask` is set,
/// otherwise from W0.
Mat column_representative(const MatrixPair& pair, Mask mask);

/// All 2^d column representatives have nonzero determinants of one strict
/// sign; |det| <= 1e-12 * ||.||^d counts as zero. d <= 20.
bool has_w_property(const MatrixPair& pair);

/// C has full column rank and every [A_alpha B_complement C] is nonsingular.
/// Necessary for the mixed P property, not sufficient. m <= 20.
bool mixed_p_necessary(const PartitionedMatrix& Q);

struct MixedPWitness {
  Vec r, s, t;
};

/// Randomized search for (r, s, t) != 0 with A r + B s + C t = 0 and
/// r_i s_i <= 0 for all i. Directed probes from singular representatives come
/// first, then `samples` random null-space combinations.
std::optional<MixedPWitness> mixed_p_falsify(const PartitionedMatrix& Q, int samples,
                                             std::uint64_t seed = 0);

/// (DF_y dy + DF_w dw, min(dy, dw)).
std::pair<Vec, Vec> lh_star_eval(const Mat& DFy, const Mat& DFw, const Vec& dy, const Vec& dw);

/// W property of (DF_y, -DF_w).
bool lh_star_is_homeomorphism(const Mat& DFy, const Mat& DFw);

/// Inverse of lh_star_eval on the linear piece that contains the preimage;
/// std::nullopt when no piece reproduces (a, b). Used for injectivity checks.
std::optional<std::pair<Vec, Vec>> lh_star_solve(const Mat& DFy, const Mat& DFw, const Vec& a,
                                                 const Vec& b);

}  // namespace mpec
