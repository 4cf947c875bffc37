#pragma once

#include <string>
#include <vector>

#include "mpec/types.hpp"

namespace mpec {

/// Raw instance data, one-to-one with the JSON instance file. Empty blocks
/// mean zero and are expanded to full shape by MpecInstance.
///
/// Objective (u = (x, y, w, z)):
///   f = 1/2 x'Hxx x + x'Hxy y + 1/2 y'Hyy y + x'Hxw w + 1/2 w'Hww w
///       + cx'x + cy'y + cw'w + cz'z + c0
/// Lower level, either LCP form  w = q + N x + M y  (l must be 0), or
///   F = Ax x + Ay y + Aw w + Az z + b = 0   with m + l rows.
/// Upper set X = {x : G x <= a}.
struct MpecData {
  int n = 0;
  int m = 0;
  int l = 0;

  Mat Hxx, Hxy, Hyy, Hxw, Hww;
  Vec cx, cy, cw, cz;
  double c0 = 0.0;

  bool lcp_form = false;
  Vec q;
  Mat N, M;
  Mat Ax, Ay, Aw, Az;
  Vec b;

  Mat G;
  Vec a;
};

/// Immutable quadratic-affine MPEC. Construction checks shapes only; the
/// semantic checks (symmetry, monotone M, nonempty X) live in
/// validate_instance.
class MpecInstance {
 public:
  explicit MpecInstance(MpecData data);

  const MpecData& data() const { return data_; }
  int n() const { return data_.n; }
  int m() const { return data_.m; }
  int l() const { return data_.l; }
  int k() const { return static_cast<int>(data_.a.size()); }
  /// Length of the stacked variable u = (x, y, w, z).
  int dim() const { return data_.n + 2 * data_.m + data_.l; }
  bool is_lcp_form() const { return data_.lcp_form; }

  /// Full symmetric Hessian and linear term of f over u.
  const Mat& hessian() const { return hessian_; }
  const Vec& linear() const { return linear_; }
  /// F(u) = jacobian() * u + offset(); (m + l) rows. In LCP form F = r.
  const Mat& jacobian() const { return jacobian_; }
  const Vec& offset() const { return offset_; }

  const Mat& G() const { return data_.G; }
  const Vec& a() const { return data_.a; }
  /// LCP blocks; throw WrongForm outside LCP form.
  const Vec& q() const;
  const Mat& N() const;
  const Mat& M() const;

 private:
  MpecData data_;
  Mat hessian_;
  Vec linear_;
  Mat jacobian_;
  Vec offset_;
};

struct Iterate {
  Vec x, y, w, z;

  /// Average complementarity product y'w / m (0 when m = 0).
  double mu() const;
  Vec stacked() const;
  static Iterate from_stacked(const MpecInstance& inst, const Vec& u);
  /// x given, y = w = e, z = 0.
  static Iterate interior_start(const MpecInstance& inst, const Vec& x);
};

struct IndexSets {
  IndexList alpha;  // y > 0 = w
  IndexList beta;   // y = 0 = w (degenerate)
  IndexList gamma;  // y = 0 < w
  double tol = 0.0;
};

struct MultiplierSet {
  Vec zeta;  // k, upper polyhedron
  Vec pi;    // m + l, lower equations
  Vec xi;    // m, complementarity
};

struct MultiplierEstimate {
  MultiplierSet multipliers;
  double residual = 0.0;
};

/// 1e-8 * (1 + ||(y, w)||_inf).
double default_classification_tol(const Vec& y, const Vec& w);

/// Throws NotComplementary(i) when y_i > tol and w_i > tol.
IndexSets index_sets(const Vec& y, const Vec& w, double tol);
bool strict_complementarity(const Vec& y, const Vec& w, double tol);

double objective_value(const MpecInstance& inst, const Iterate& it);
/// Gradient of f over the stacked u.
Vec objective_gradient(const MpecInstance& inst, const Iterate& it);
/// F(u), or r = q + Nx + My - w in LCP form.
Vec lower_residual(const MpecInstance& inst, const Iterate& it);

/// ||F||^2 + y'w.
double phi_general(const MpecInstance& inst, const Iterate& it);
/// y'w + ||r|| (Euclidean norm, not squared).
double phi_lcp(const MpecInstance& inst, const Iterate& it);

enum class PhiKind { General, Lcp };
/// Lcp for LCP-form instances, General otherwise.
PhiKind default_phi_kind(const MpecInstance& inst);
double phi(const MpecInstance& inst, const Iterate& it, PhiKind kind);

/// f + alpha * phi.
double penalty_value(const MpecInstance& inst, const Iterate& it, double alpha);
double penalty_value(const MpecInstance& inst, const Iterate& it, double alpha, PhiKind kind);

/// Max-norm of the four gradient equations of the strict-complementarity KKT
/// system plus zeta >= 0 and zeta'(a - Gx) = 0. Throws Degenerate if beta is
/// nonempty at the default tolerance.
double kkt_residual(const MpecInstance& inst, const Iterate& it, const MultiplierSet& mult);

/// Nonnegative least-squares fit of (zeta, pi, xi) to the KKT system; zeta is
/// zero on rows inactive at x.
MultiplierEstimate estimate_multipliers(const MpecInstance& inst, const Iterate& it);

/// B-stationarity residual at the complementary rounding of `it`: for every
/// branch of the degenerate set, the norm of the projection of -grad f onto
/// the linearized piece cone; the maximum over branches. Zero exactly at
/// B-stationary points. Works for degenerate points, unlike kkt_residual.
double b_stationarity_residual(const MpecInstance& inst, const Iterate& it);

/// Complementary rounding used by b_stationarity_residual: the smaller of each
/// (y_i, w_i) is zeroed, both when both are below a tolerance scaled with the
/// largest product.
Iterate complementary_rounding(const Iterate& it, IndexSets* sets = nullptr);

/// Euclidean projection of x onto X.
Vec project_onto_upper_set(const MpecInstance& inst, const Vec& x);

/// Semantic validation; returns human-readable issues (empty when valid).
std::vector<std::string> validate_instance(const MpecInstance& inst);

}  // namespace mpec
