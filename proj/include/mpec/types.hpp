#pragma once

#include <Eigen/Core>
#include <vector>

namespace mpec {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Sorted list of 0-based indices.
using IndexList = std::vector<int>;

/// Subset of {0..m-1} stored as a bit mask; used by the enumeration routines,
/// which are bounded well below 64 entries.
using Mask = unsigned long long;

IndexList mask_to_indices(Mask mask, int m);

/// Lexicographic order on the sorted index lists of two masks. Shared
/// tie-breaking rule of every branch/pattern enumeration.
bool lex_less(Mask a, Mask b, int m);

}  // namespace mpec
