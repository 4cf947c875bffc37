#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "mpec/step_bounds.hpp"
#include "support.hpp"

using namespace mpec;
using namespace mpec::testing;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

Vec v1(double a) { return Vec::Constant(1, a); }

struct Check {
  bool positive, central, complementary;
};

Check evaluate(const Vec& y, const Vec& w, const Vec& dy, const Vec& dw, double p, double sigma,
               double t) {
  const Vec yt = y + t * dy, wt = w + t * dw;
  const double mu = yt.dot(wt) / y.size();
  const double scale = 1e-12 * (1 + y.dot(w));
  Check c;
  c.positive = yt.minCoeff() > 0 && wt.minCoeff() > 0;
  c.central = (yt.cwiseProduct(wt).array() - p * mu).minCoeff() >= -scale;
  c.complementary = sigma * w.dot(y) + t * dw.dot(dy) >= -scale;
  return c;
}

}  // namespace

TEST(QuadraticRoot, Examples) {
  EXPECT_DOUBLE_EQ(quadratic_first_root(1, -2, 0), 0.5);
  EXPECT_EQ(quadratic_first_root(1, 0, 0), kInf);
  EXPECT_DOUBLE_EQ(quadratic_first_root(1, 0, -1), 1.0);
  EXPECT_EQ(quadratic_first_root(1, 1, 1), kInf);
  EXPECT_NEAR(quadratic_first_root(1, -3, 2), 0.5, 1e-15);
  EXPECT_EQ(quadratic_first_root(0, 1, 0), kInf);
  EXPECT_EQ(quadratic_first_root(0, -1, 0), 0.0);
}

TEST(QuadraticRoot, RandomRootIsFirstSignChange) {
  Rng rng(1);
  for (int t = 0; t < 2000; ++t) {
    const double a0 = uniform(rng, 0.01, 2), a1 = uniform(rng, -3, 3), a2 = uniform(rng, -3, 3);
    const double r = quadratic_first_root(a0, a1, a2);
    auto q = [&](double s) { return a0 + a1 * s + a2 * s * s; };
    if (std::isinf(r)) {
      for (double s = 0; s < 50; s += 0.37) EXPECT_GE(q(s), -1e-12);
      continue;
    }
    EXPECT_NEAR(q(r), 0.0, 1e-10 * (1 + std::abs(a1) + std::abs(a2)));
    for (int k = 0; k <= 20; ++k) EXPECT_GE(q(r * k / 20.0), -1e-10);
  }
}

TEST(StepBound, PositivityCap) {
  const StepBound b = interior_step_bound(v1(1), v1(1), v1(-2), v1(0), 0.0, false, 0.5);
  EXPECT_LT(b.tau, 0.5);
  EXPECT_GT(b.tau, 0.4999);
  EXPECT_EQ(b.binding, BindingCondition::Positivity);
}

TEST(StepBound, ComplementarityNeverBindsWithNonnegativeCross) {
  const StepBound b = interior_step_bound(v1(1), v1(1), v1(0.5), v1(0.5), 0.1, true, 0.5);
  EXPECT_EQ(b.complementarity, kInf);
  EXPECT_EQ(b.tau, 1.0);
  EXPECT_EQ(b.binding, BindingCondition::Unit);
}

TEST(StepBound, ComplementarityBoundAtOne) {
  // dw'dy = -sigma w'y gives exactly tau <= 1.
  Vec y(2), w(2), dy(2), dw(2);
  y << 1, 2;
  w << 2, 1;
  const double sigma = 0.5;
  dy << 1, -0.5;
  dw << -1, 0.0;
  ASSERT_DOUBLE_EQ(dw.dot(dy), -sigma * w.dot(y) / 2);
  dw << -2, 0.0;
  ASSERT_DOUBLE_EQ(dw.dot(dy), -sigma * w.dot(y));
  const StepBound b = interior_step_bound(y, w, dy, dw, 0.0, true, sigma);
  EXPECT_DOUBLE_EQ(b.complementarity, 1.0);
}

TEST(StepBound, StringNames) {
  EXPECT_STREQ(to_string(BindingCondition::Unit), "unit");
  EXPECT_STREQ(to_string(BindingCondition::Positivity), "positivity");
  EXPECT_STREQ(to_string(BindingCondition::Centrality), "centrality");
  EXPECT_STREQ(to_string(BindingCondition::Complementarity), "complementarity");
}

TEST(StepBound, RandomArcsTight) {
  Rng rng(2);
  int binding = 0;
  for (int t = 0; t < 2000; ++t) {
    const int m = uniform_int(rng, 1, 6);
    const Vec y = positive_vec(rng, m, 0.1, 2), w = positive_vec(rng, m, 0.1, 2);
    const Vec dy = random_vec(rng, m, -3, 3), dw = random_vec(rng, m, -3, 3);
    const double mu = y.dot(w) / m;
    const double p = 0.9 * std::min(0.1, y.cwiseProduct(w).minCoeff() / mu);
    const double sigma = uniform(rng, 0.1, 0.9);
    const StepBound b = interior_step_bound(y, w, dy, dw, p, true, sigma);
    ASSERT_GT(b.tau, 0.0);
    ASSERT_LE(b.tau, 1.0);
    for (int k = 1; k <= 10; ++k) {
      const Check c = evaluate(y, w, dy, dw, p, sigma, b.tau * k / 10.0);
      ASSERT_TRUE(c.positive && c.central && c.complementary);
    }
    if (b.tau < 1.0) {
      ++binding;
      const Check c = evaluate(y, w, dy, dw, p, sigma, 1.01 * b.tau);
      EXPECT_FALSE(c.positive && c.central && c.complementary);
    }
  }
  EXPECT_GT(binding, 100);
}
