#include <gtest/gtest.h>

#include <cmath>

#include "mpec/errors.hpp"
#include "mpec/implicit.hpp"
#include "mpec/model.hpp"
#include "mpec/oracle.hpp"
#include "support.hpp"

using namespace mpec;
using namespace mpec::testing;

namespace {

Vec v1(double a) { return Vec::Constant(1, a); }
Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

MpecInstance scalar_general(double b) {
  MpecData d;
  d.n = 1;
  d.m = 1;
  d.Ax = Mat::Constant(1, 1, 1.0);
  d.Ay = Mat::Constant(1, 1, 1.0);
  d.Aw = Mat::Constant(1, 1, -1.0);
  d.b = v1(b);
  return MpecInstance(d);
}

// Straight-line recomputation of f, F, phi without matrix expressions.
double loop_phi_general(const MpecData& d, const Iterate& it) {
  double s = 0.0;
  for (int i = 0; i < d.m + d.l; ++i) {
    double F = d.b(i);
    for (int j = 0; j < d.n; ++j) F += d.Ax(i, j) * it.x(j);
    for (int j = 0; j < d.m; ++j) F += d.Ay(i, j) * it.y(j) + d.Aw(i, j) * it.w(j);
    for (int j = 0; j < d.l; ++j) F += d.Az(i, j) * it.z(j);
    s += F * F;
  }
  for (int i = 0; i < d.m; ++i) s += it.y(i) * it.w(i);
  return s;
}

double loop_phi_lcp(const MpecData& d, const Iterate& it) {
  double r2 = 0.0, c = 0.0;
  for (int i = 0; i < d.m; ++i) {
    double r = d.q(i) - it.w(i);
    for (int j = 0; j < d.n; ++j) r += d.N(i, j) * it.x(j);
    for (int j = 0; j < d.m; ++j) r += d.M(i, j) * it.y(j);
    r2 += r * r;
    c += it.y(i) * it.w(i);
  }
  return c + std::sqrt(r2);
}

}  // namespace

TEST(IndexSets, DegenerateScalar) {
  const IndexSets s = index_sets(v1(0), v1(0), 1e-8);
  EXPECT_TRUE(s.alpha.empty());
  EXPECT_EQ(s.beta, IndexList{0});
  EXPECT_TRUE(s.gamma.empty());
}

TEST(IndexSets, AxisCases) {
  IndexSets s = index_sets(v1(1), v1(0), 1e-8);
  EXPECT_EQ(s.alpha, IndexList{0});
  EXPECT_TRUE(s.beta.empty());
  s = index_sets(v2(0, 2), v2(3, 0), 1e-8);
  EXPECT_EQ(s.gamma, IndexList{0});
  EXPECT_EQ(s.alpha, IndexList{1});
  EXPECT_TRUE(s.beta.empty());
}

TEST(IndexSets, NotComplementaryReportsIndex) {
  try {
    index_sets(v2(0, 1), v2(1, 1), 1e-8);
    FAIL() << "expected NotComplementary";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotComplementary);
    EXPECT_EQ(e.index(), 1);
  }
}

TEST(IndexSets, NegativeBelowTolRejected) {
  try {
    index_sets(v1(-1e-3), v1(0), 1e-8);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NegativeVariables);
  }
}

TEST(IndexSets, RandomPartition) {
  Rng rng(11);
  for (int trial = 0; trial < 500; ++trial) {
    const int m = uniform_int(rng, 1, 8);
    const double tol = std::pow(10.0, uniform(rng, -10, -1));
    Vec y(m), w(m);
    for (int i = 0; i < m; ++i) {
      const int kind = uniform_int(rng, 0, 2);
      const double big = uniform(rng, 2 * tol, 5.0), small = uniform(rng, -tol, tol);
      y(i) = kind == 0 ? big : small;
      w(i) = kind == 1 ? big : uniform(rng, -tol, tol);
    }
    const IndexSets s = index_sets(y, w, tol);
    std::vector<int> seen(m, 0);
    for (int i : s.alpha) ++seen[i];
    for (int i : s.beta) ++seen[i];
    for (int i : s.gamma) ++seen[i];
    for (int i = 0; i < m; ++i) ASSERT_EQ(seen[i], 1);
  }
}

TEST(StrictComplementarity, Examples) {
  EXPECT_FALSE(strict_complementarity(v1(0), v1(0), 1e-8));
  EXPECT_TRUE(strict_complementarity(v1(1), v1(0), 1e-8));
  EXPECT_FALSE(strict_complementarity(v2(0, 1), v2(0, 0), 1e-8));
}

TEST(Iterate, MuAndStacking) {
  Rng rng(3);
  const MpecInstance inst = random_general_instance(rng, 2, 3, 1);
  const Iterate it = random_interior(rng, inst);
  EXPECT_NEAR(it.mu(), it.y.dot(it.w) / 3.0, 1e-14);
  const Iterate back = Iterate::from_stacked(inst, it.stacked());
  EXPECT_EQ(back.stacked(), it.stacked());
  const Iterate s = Iterate::interior_start(inst, Vec::Zero(2));
  EXPECT_EQ(s.y, Vec::Ones(3));
  EXPECT_EQ(s.w, Vec::Ones(3));
  EXPECT_EQ(s.z, Vec::Zero(1));
}

TEST(PhiGeneral, FeasibleComplementaryIsZero) {
  const MpecInstance inst = scalar_general(0.0);
  EXPECT_EQ(phi_general(inst, Iterate{v1(1), v1(0), v1(1), Vec()}), 0.0);
}

TEST(PhiGeneral, DirectFormula) {
  // F = y - w + 2 = 1 at (y, w) = (1, 2); y'w = 2.
  const MpecInstance inst = scalar_general(2.0);
  EXPECT_DOUBLE_EQ(phi_general(inst, Iterate{v1(0), v1(1), v1(2), Vec()}), 3.0);
}

TEST(PhiGeneral, MatchesStraightLineEvaluator) {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const MpecInstance inst = random_general_instance(rng, uniform_int(rng, 1, 3),
                                                      uniform_int(rng, 1, 4), uniform_int(rng, 0, 2));
    const Iterate it = random_interior(rng, inst);
    const double a = phi_general(inst, it), b = loop_phi_general(inst.data(), it);
    ASSERT_NEAR(a, b, 1e-14 * std::max(1.0, std::abs(b)));
  }
}

TEST(PhiGeneral, NegativeVariablesRejected) {
  const MpecInstance inst = scalar_general(0.0);
  EXPECT_THROW(phi_general(inst, Iterate{v1(0), v1(-1), v1(1), Vec()}), Error);
}

TEST(PhiLcp, ProblemTwoStart) {
  const MpecInstance inst = load_instance(data_path("problem2.json"));
  const Iterate it{v1(1), v1(2), v1(1), Vec()};
  EXPECT_EQ(lower_residual(inst, it)(0), 0.0);
  EXPECT_EQ(phi_lcp(inst, it), 2.0);
}

TEST(PhiLcp, ZeroOnLowerSolutions) {
  Rng rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    const MpecInstance inst = random_lcp_instance(rng, 2, 3);
    const Vec x = random_vec(rng, 2);
    const LowerSolution s = lower_solve(inst, x);
    EXPECT_NEAR(phi_lcp(inst, Iterate{x, s.y, s.w, Vec()}), 0.0, 1e-9);
  }
}

TEST(PhiLcp, MatchesStraightLineEvaluator) {
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const MpecInstance inst = random_lcp_instance(rng, uniform_int(rng, 1, 3), uniform_int(rng, 1, 5));
    const Iterate it = random_interior(rng, inst);
    const double a = phi_lcp(inst, it), b = loop_phi_lcp(inst.data(), it);
    ASSERT_NEAR(a, b, 1e-14 * std::max(1.0, std::abs(b)));
    ASSERT_GE(a, 0.0);
  }
}

TEST(PhiLcp, WrongFormRejected) {
  try {
    phi_lcp(scalar_general(0.0), Iterate{v1(0), v1(1), v1(1), Vec()});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::WrongForm);
  }
}

TEST(PenaltyValue, ProblemTwo) {
  const MpecInstance inst = load_instance(data_path("problem2.json"));
  const Iterate it{v1(1), v1(2), v1(1), Vec()};
  EXPECT_DOUBLE_EQ(objective_value(inst, it), 6.5);
  EXPECT_DOUBLE_EQ(penalty_value(inst, it, 10.0), 26.5);
}

TEST(PenaltyValue, FeasiblePointGivesObjective) {
  const MpecInstance inst = load_instance(data_path("problem3.json"));
  const Iterate it{v1(0.5), v1(0.5), v1(0.0), Vec()};
  EXPECT_EQ(penalty_value(inst, it, 7.0), objective_value(inst, it));
}

TEST(PenaltyValue, LinearInAlpha) {
  Rng rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    const MpecInstance inst = random_lcp_instance(rng, 2, 2);
    const Iterate it = random_interior(rng, inst);
    const double a1 = uniform(rng, 0.1, 10), a2 = a1 + uniform(rng, 0.1, 10);
    const double p1 = penalty_value(inst, it, a1), p2 = penalty_value(inst, it, a2);
    EXPECT_GT(p2, p1);
    EXPECT_NEAR(p2 - p1, (a2 - a1) * phi_lcp(inst, it), 1e-14 * (1 + std::abs(p2)) * 4);
  }
  const MpecInstance inst = random_lcp_instance(rng, 1, 1);
  EXPECT_THROW(penalty_value(inst, random_interior(rng, inst), 0.0), Error);
}

TEST(KktResidual, ZeroGradientInactiveRows) {
  MpecData d;
  d.n = 1;
  d.m = 1;
  d.lcp_form = true;
  d.q = v1(1);
  d.N = Mat::Zero(1, 1);
  d.M = Mat::Identity(1, 1);
  d.G = Mat::Constant(1, 1, 1.0);
  d.a = v1(5);
  const MpecInstance inst(d);
  const Iterate it{v1(0), v1(0), v1(1), Vec()};
  EXPECT_EQ(kkt_residual(inst, it, MultiplierSet{Vec::Zero(1), Vec::Zero(1), Vec::Zero(1)}), 0.0);
  const MultiplierEstimate est = estimate_multipliers(inst, it);
  EXPECT_EQ(est.multipliers.zeta.norm(), 0.0);
  EXPECT_LE(est.multipliers.pi.norm() + est.multipliers.xi.norm(), 1e-14);
}

TEST(KktResidual, DegenerateRejected) {
  const MpecInstance inst = load_instance(data_path("problem3.json"));
  try {
    kkt_residual(inst, Iterate{v1(0), v1(0), v1(0), Vec()},
                 MultiplierSet{Vec::Zero(2), Vec::Zero(1), Vec::Zero(1)});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Degenerate);
  }
}

TEST(KktResidual, OracleMinimizersAndPerturbation) {
  Rng rng(21);
  int certified = 0, perturbed = 0;
  for (int trial = 0; trial < 200 && certified < 20; ++trial) {
    const MpecInstance inst = random_lcp_instance(rng, uniform_int(rng, 1, 3), uniform_int(rng, 1, 3));
    const GlobalResult g = enumerate_global(inst);
    const Iterate& p = g.best.point;
    const Vec mx = p.y.cwiseMax(p.w);
    if (mx.minCoeff() < 1e-4) continue;
    ++certified;
    const MultiplierEstimate est = estimate_multipliers(inst, p);
    EXPECT_LE(est.residual, 1e-8);

    const Vec dir = random_vec(rng, inst.n()).normalized();
    for (double sgn : {1.0, -1.0}) {
      const Vec x = p.x + sgn * 1e-2 * dir;
      if ((inst.G() * x - inst.a()).maxCoeff() > 0) continue;
      const LowerSolution s = lower_solve(inst, x);
      const Iterate q{x, s.y, s.w, Vec()};
      if (!strict_complementarity(q.y, q.w, default_classification_tol(q.y, q.w))) continue;
      EXPECT_GT(estimate_multipliers(inst, q).residual, 1e-4);
      ++perturbed;
      break;
    }
  }
  EXPECT_GE(certified, 20);
  EXPECT_GE(perturbed, 10);
}

TEST(EstimateMultipliers, NonstationaryPointHasResidual) {
  Rng rng(22);
  for (int trial = 0; trial < 30; ++trial) {
    const MpecInstance inst = random_lcp_instance(rng, 2, 2);
    const GlobalResult g = enumerate_global(inst);
    const Vec x = random_vec(rng, 2, -0.5, 0.5);
    if ((x - g.best.point.x).norm() < 0.1) continue;
    const LowerSolution s = lower_solve(inst, x);
    const Iterate it{x, s.y, s.w, Vec()};
    if (!strict_complementarity(it.y, it.w, default_classification_tol(it.y, it.w))) continue;
    // A strictly convex reduced objective has one stationary point per piece.
    if (b_stationarity_residual(inst, it) < 1e-6) continue;
    EXPECT_GT(estimate_multipliers(inst, it).residual, 0.0);
  }
}

TEST(BStationarity, ProblemThree) {
  const MpecInstance inst = load_instance(data_path("problem3.json"));
  EXPECT_LE(b_stationarity_residual(inst, Iterate{v1(0.5), v1(0.5), v1(0), Vec()}), 1e-12);
  EXPECT_GT(b_stationarity_residual(inst, Iterate{v1(0), v1(0), v1(0), Vec()}), 0.1);
}

TEST(BStationarity, ProblemTwoDegenerateOptimum) {
  const MpecInstance inst = load_instance(data_path("problem2.json"));
  EXPECT_LE(b_stationarity_residual(inst, Iterate{v1(2), v1(0), v1(0), Vec()}), 1e-12);
  EXPECT_GT(b_stationarity_residual(inst, Iterate{v1(1), v1(1), v1(0), Vec()}), 1e-3);
}

TEST(Instance, ShapeErrors) {
  MpecData d;
  d.n = 1;
  d.m = 1;
  d.l = 1;
  d.lcp_form = true;
  d.q = v1(0);
  EXPECT_THROW(MpecInstance{d}, Error);
  MpecData e;
  e.n = 2;
  e.m = 1;
  e.Hxx = Mat::Identity(3, 3);
  EXPECT_THROW(MpecInstance{e}, Error);
  MpecData f;
  f.n = 1;
  f.m = 1;
  f.cx = v1(std::nan(""));
  EXPECT_THROW(MpecInstance{f}, Error);
}

TEST(Instance, AccessorsExpandZeros) {
  MpecData d;
  d.n = 2;
  d.m = 1;
  d.l = 1;
  const MpecInstance inst(d);
  EXPECT_EQ(inst.dim(), 5);
  EXPECT_EQ(inst.hessian().rows(), 5);
  EXPECT_EQ(inst.jacobian().rows(), 2);
  EXPECT_EQ(inst.k(), 0);
  EXPECT_THROW(inst.M(), Error);
}

TEST(Validate, ReportsIssues) {
  MpecData d;
  d.n = 1;
  d.m = 2;
  d.lcp_form = true;
  d.q = Vec::Zero(2);
  d.N = Mat::Zero(2, 1);
  d.M = Mat::Identity(2, 2);
  d.M(1, 1) = -1.0;
  d.G = Mat(2, 1);
  d.G << 1, -1;
  d.a = v2(-1, -1);  // x <= -1 and x >= 1
  d.Hxy = Mat::Zero(1, 2);
  const auto issues = validate_instance(MpecInstance(d));
  EXPECT_EQ(issues.size(), 2u);
  EXPECT_TRUE(validate_instance(load_instance(data_path("problem2.json"))).empty());
}

TEST(Projection, OntoBox) {
  const MpecInstance inst = load_instance(data_path("problem3.json"));
  EXPECT_NEAR(project_onto_upper_set(inst, v1(3))(0), 1.0, 1e-12);
  EXPECT_NEAR(project_onto_upper_set(inst, v1(0.2))(0), 0.2, 1e-12);
}
