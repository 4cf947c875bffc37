#pragma once

#include <functional>
#include <vector>

#include "mpec/implicit.hpp"
#include "mpec/model.hpp"

namespace mpec {

/// Minimizer of f on one complementarity piece: y_i free and w_i = 0 for i in
/// the pattern, y_i = 0 and w_i free otherwise.
struct PieceSolution {
  Mask pattern = 0;
  IndexList indices;
  Iterate point;
  double value = 0.0;
  bool approximate = false;  // nonconvex piece, sampled on a grid
};

struct GlobalResult {
  PieceSolution best;
  std::vector<PieceSolution> all;  // feasible pieces in mask order
  bool approximate = false;
};

/// Brute-force global minimum over all 2^m pieces (m <= 16). Convex pieces
/// are solved exactly as QPs; pieces with an indefinite reduced Hessian are
/// sampled on a 51-point-per-axis grid in x (n <= 3) and flagged.
/// Throws NoFeasiblePiece, Unbounded or DimensionTooLarge.
GlobalResult enumerate_global(const MpecInstance& inst);

using ScalarFn = std::function<double(const Vec&)>;

/// Central differences, one coordinate at a time.
Vec finite_difference_gradient(const ScalarFn& fn, const Vec& point, double h);

/// Central difference of fn along d; forward difference when one_sided.
double finite_difference_slope(const ScalarFn& fn, const Vec& point, const Vec& d, double h,
                               bool one_sided = false);

/// Vertical decomposition {d : A d <= 0} = L + P with L the lineality space.
struct ConeRays {
  Mat lineality;  // n x dim L, orthonormal columns
  std::vector<Vec> rays;  // unit extreme rays of P
};

/// Extreme rays by enumeration of rank-deficient active subsets (n <= 6).
ConeRays cone_rays(const Mat& A, int n);

struct StationarityCheck {
  bool stationary = true;
  double worst_slope = 0.0;
  Vec worst_direction;
  int rays_checked = 0;
  int branches_checked = 0;
};

/// Reduced directional derivative along the rays of the tangent cone of X at
/// x, intersected with each branch cone of the solution map. LCP form only.
/// Rows of X with slack <= active_tol (1 + |a_i|) count as active and pairs
/// with y_i, w_i <= active_tol as degenerate, so an inexact point near a kink
/// or a face is judged on that kink or face.
StationarityCheck tangent_cone_check(const MpecInstance& inst, const Vec& x,
                                     const LowerSolution& sol, double tol,
                                     double active_tol = 1e-8);

bool tangent_cone_stationarity(const MpecInstance& inst, const Vec& x, const LowerSolution& sol,
                               double tol, double active_tol = 1e-8);

}  // namespace mpec
