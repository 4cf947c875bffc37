#pragma once

#include <string>

#include "mpec/types.hpp"

namespace mpec {

/// sup{t >= 0 : a0 + a1 t + a2 t^2 >= 0 on [0, t]}; +inf when never violated.
/// A start at a0 <= 0 with increasing q counts as feasible (round-off on an
/// active boundary).
double quadratic_first_root(double a0, double a1, double a2);

enum class BindingCondition { Unit, Positivity, Centrality, Complementarity };
const char* to_string(BindingCondition c);

struct StepBound {
  double tau = 1.0;
  BindingCondition binding = BindingCondition::Unit;
  double positivity = 0.0;       // bound from y, w > 0
  double centrality = 0.0;       // bound from y_i w_i >= p mu
  double complementarity = 0.0;  // bound from sigma w'y + t dw'dy >= 0
};

/// Largest t in (0, 1] keeping positivity and centrality along
/// (y + t dy, w + t dw), optionally also the limited complementarity decrease
/// sigma w'y + t dw'dy >= 0. Closed form, no sampling.
StepBound interior_step_bound(const Vec& y, const Vec& w, const Vec& dy, const Vec& dw, double p,
                              bool limited_complementarity, double sigma);

}  // namespace mpec
