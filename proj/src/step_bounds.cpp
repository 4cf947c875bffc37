#include "mpec/step_bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mpec {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

// Real roots of a2 t^2 + a1 t + a0, ascending; count returned.
int real_roots(double a0, double a1, double a2, double& r1, double& r2) {
  if (a2 == 0.0) {
    if (a1 == 0.0) return 0;
    r1 = r2 = -a0 / a1;
    return 1;
  }
  const double disc = a1 * a1 - 4.0 * a2 * a0;
  if (disc < 0.0) return 0;
  const double s = std::sqrt(disc);
  const double q = -0.5 * (a1 + (a1 >= 0.0 ? s : -s));
  if (q == 0.0) {
    r1 = r2 = 0.0;
    return 2;
  }
  r1 = q / a2;
  r2 = a0 / q;
  if (r1 > r2) std::swap(r1, r2);
  return 2;
}
}  // namespace

double quadratic_first_root(double a0, double a1, double a2) {
  double r1 = 0.0, r2 = 0.0;
  const int k = real_roots(a0, a1, a2, r1, r2);
  if (a0 > 0.0) {
    if (k == 0) return kInf;
    if (r1 > 0.0) return r1;
    if (r2 > 0.0) return r2;
    return kInf;
  }
  const bool rising = a1 > 0.0 || (a1 == 0.0 && a2 > 0.0);
  if (!rising) return 0.0;
  if (a2 < 0.0 && k > 0) return std::max(0.0, r2);
  return kInf;
}

const char* to_string(BindingCondition c) {
  switch (c) {
    case BindingCondition::Unit: return "unit";
    case BindingCondition::Positivity: return "positivity";
    case BindingCondition::Centrality: return "centrality";
    case BindingCondition::Complementarity: return "complementarity";
  }
  return "unit";
}

StepBound interior_step_bound(const Vec& y, const Vec& w, const Vec& dy, const Vec& dw, double p,
                              bool limited_complementarity, double sigma) {
  const int m = static_cast<int>(y.size());
  StepBound out;
  double pos = kInf;
  for (int i = 0; i < m; ++i) {
    if (dy(i) < 0.0) pos = std::min(pos, -y(i) / dy(i));
    if (dw(i) < 0.0) pos = std::min(pos, -w(i) / dw(i));
  }
  if (std::isfinite(pos)) pos *= 1.0 - 1e-12;

  double cen = kInf;
  if (m > 0) {
    const double inv_m = 1.0 / m;
    const double m0 = y.dot(w) * inv_m;
    const double m1 = (y.dot(dw) + w.dot(dy)) * inv_m;
    const double m2 = dy.dot(dw) * inv_m;
    for (int i = 0; i < m; ++i) {
      const double a0 = y(i) * w(i) - p * m0;
      const double a1 = y(i) * dw(i) + w(i) * dy(i) - p * m1;
      const double a2 = dy(i) * dw(i) - p * m2;
      cen = std::min(cen, quadratic_first_root(a0, a1, a2));
    }
  }

  double comp = kInf;
  if (limited_complementarity) {
    const double dwdy = dw.dot(dy);
    if (dwdy < 0.0) comp = sigma * w.dot(y) / (-dwdy);
  }

  out.positivity = pos;
  out.centrality = cen;
  out.complementarity = comp;
  out.tau = 1.0;
  out.binding = BindingCondition::Unit;
  if (pos < out.tau) {
    out.tau = pos;
    out.binding = BindingCondition::Positivity;
  }
  if (cen < out.tau) {
    out.tau = cen;
    out.binding = BindingCondition::Centrality;
  }
  if (comp < out.tau) {
    out.tau = comp;
    out.binding = BindingCondition::Complementarity;
  }
  return out;
}

}  // namespace mpec
