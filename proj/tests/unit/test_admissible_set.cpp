#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "../support/random_instances.hpp"
#include "cvpm/admissible_set.hpp"
#include "cvpm/collision.hpp"
#include "cvpm/errors.hpp"

using namespace cvpm;

namespace {

Vector v2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

LinearSystem road_system() { return discretize_double_integrator(0.1); }

ViolationContext road_context(const Vector& x0, const Vector& ybar, double w) {
  return {x0, ybar, 2.8, w, Polytope::box(v2(1, -3.5), v2(9, 3.5))};
}

}  // namespace

TEST(Substitute, SquareIsMonotone) {
  EXPECT_EQ(SquaredSubstitute::value(0.0), 0.0);
  double prev = -1.0;
  for (int i = 0; i <= 100; ++i) {
    const double v = SquaredSubstitute::value(0.1 * i);
    EXPECT_GT(v, prev);
    prev = v;
  }
  EXPECT_EQ(SquaredSubstitute::threshold(2.95), 2.95 * 2.95);
}

TEST(ComputeAdmissibleSet, FarObstacleIsCase1) {
  const auto sys = road_system();
  const auto ctx = road_context(v2(0, 4), v2(50, 4), 0.15);
  const auto adm = compute_admissible_set(sys, ctx);
  ASSERT_TRUE(adm.is_case1());
  EXPECT_EQ(adm.label, CaseLabel::kCase1);
  EXPECT_EQ(std::get<Case1Full>(adm.variant).set, ctx.U_x0);
  EXPECT_GE(adm.h_min, adm.threshold);
}

TEST(ComputeAdmissibleSet, UnavoidableObstacleIsCase2AtFarthestVertex) {
  const auto sys = road_system();
  const auto ctx = road_context(v2(0, 4), v2(0.5, 4.1), 0.9);
  const auto adm = compute_admissible_set(sys, ctx);
  ASSERT_TRUE(adm.is_case2());
  EXPECT_LT(adm.h_max, adm.threshold);
  const Vector u = std::get<Case2Singleton>(adm.variant).u;
  for (const auto& v : enumerate_vertices(ctx.U_x0))
    EXPECT_GE(squared_distance(sys, ctx, u), squared_distance(sys, ctx, v));
  EXPECT_TRUE(u.isApprox(v2(9, -3.5)));
}

TEST(ComputeAdmissibleSet, PartialIsCase3WithSupportingCut) {
  const auto sys = road_system();
  // Vehicle at (0, 4), obstacle ahead in the lane below: driving slowly keeps
  // the distance, driving fast does not.
  const auto ctx = road_context(v2(0, 4), v2(3.1, 3), 0.15);
  const auto adm = compute_admissible_set(sys, ctx);
  ASSERT_TRUE(adm.is_case3());
  const auto& c3 = std::get<Case3Restricted>(adm.variant);
  EXPECT_NEAR(std::sqrt(squared_distance(sys, ctx, c3.p)), 2.95, 1e-4);
  EXPECT_GE(squared_distance(sys, ctx, c3.p), adm.threshold);
  const Vector grad = gradient_at(sys, ctx, c3.p);
  EXPECT_TRUE(c3.cut.normal.isApprox(-grad));
  EXPECT_NEAR(c3.cut.offset, -grad.dot(c3.p), 1e-12);
}

TEST(ComputeAdmissibleSet, EmptyInputSetThrows) {
  auto ctx = road_context(v2(0, 4), v2(3, 3), 0.15);
  ctx.U_x0 = intersect(ctx.U_x0, Halfspace(v2(1, 0), 0.0));
  EXPECT_THROW(compute_admissible_set(road_system(), ctx), Infeasible);
}

TEST(ComputeAdmissibleSet, ThresholdTieLandsInCase3WithArgmax) {
  // One-dimensional distance along u1 only: h_max equals the threshold exactly.
  const LinearSystem sys(Matrix::Identity(2, 2), Matrix::Identity(2, 2), Matrix::Identity(2, 2));
  const ViolationContext ctx{v2(0, 0), v2(0, 0), 1.0, 1.0, Polytope::box(v2(0, 0), v2(2, 0))};
  const auto adm = compute_admissible_set(sys, ctx);
  EXPECT_EQ(adm.h_max, adm.threshold);
  ASSERT_TRUE(adm.is_case3());
  EXPECT_EQ(std::get<Case3Restricted>(adm.variant).p, v2(2, 0));
}

TEST(ComputeAdmissibleSet, SinglePointSetUsesNonStrictCase1) {
  // h_min = h_max = threshold = 0 lands in case 1 by the >= rule; the
  // gradient at the obstacle image vanishes.
  const LinearSystem sys(Matrix::Identity(2, 2), Matrix::Identity(2, 2), Matrix::Identity(2, 2));
  const ViolationContext ctx{v2(0, 0), v2(1, 1), 0.0, 0.0, Polytope::box(v2(1, 1), v2(1, 1))};
  EXPECT_TRUE(compute_admissible_set(sys, ctx).is_case1());
  EXPECT_EQ(gradient_at(sys, ctx, v2(1, 1)), v2(0, 0));
}

TEST(FindBoundaryPoint, OneDimensionalAnalogue) {
  // h(u) = u1^2 along the segment [0, 2]; threshold 1.
  const LinearSystem sys(Matrix::Identity(2, 2), Matrix::Identity(2, 2), Matrix::Identity(2, 2));
  const ViolationContext ctx{v2(0, 0), v2(0, 0), 0.5, 0.5, Polytope::box(v2(0, 0), v2(2, 0))};
  const Vector p = find_boundary_point(sys, ctx, v2(0, 0), v2(2, 0));
  EXPECT_NEAR(p(0), 1.0, 1e-6);
  EXPECT_GE(p(0) * p(0), 1.0);
  EXPECT_EQ(find_boundary_point(sys, ctx, v2(0, 0), v2(1, 0)), v2(1, 0));
  EXPECT_THROW(find_boundary_point(sys, ctx, v2(1.5, 0), v2(2, 0)), InvalidArgument);
  EXPECT_THROW(find_boundary_point(sys, ctx, v2(0, 0), v2(3, 0)), InvalidArgument);
}

TEST(FindBoundaryPoint, RandomCase3InstancesHitLevelSet) {
  std::mt19937_64 rng(31);
  int hits = 0;
  for (int t = 0; t < 400 && hits < 100; ++t) {
    const auto sys = testutil::random_system(rng);
    const auto ctx = testutil::random_context(rng, sys);
    const auto adm = compute_admissible_set(sys, ctx);
    if (!(adm.h_max >= adm.threshold && adm.h_min < adm.threshold)) continue;
    ++hits;
    const Vector p = find_boundary_point(sys, ctx, adm.u_min, adm.u_max);
    EXPECT_LT(std::abs(std::sqrt(squared_distance(sys, ctx, p)) - (ctx.c1 + ctx.w_max0)), 1e-4);
    EXPECT_TRUE(contains(ctx.U_x0, p, 1e-7));
  }
  EXPECT_GT(hits, 20);
}

TEST(Gradient, RoadSystemClosedForm) {
  const auto sys = road_system();
  const auto ctx = road_context(v2(1, 4), v2(3, 3), 0.15);
  const Vector p = v2(2, -1);
  const double b = sys.B()(0, 0);
  const Vector expected = 2.0 * b * (ctx.x0 + b * p - ctx.ybar_r1);
  EXPECT_TRUE(gradient_at(sys, ctx, p).isApprox(expected, 1e-14));
}

TEST(Gradient, MatchesCentralDifferences) {
  std::mt19937_64 rng(37);
  for (int t = 0; t < 100; ++t) {
    const auto sys = testutil::random_system(rng);
    const auto ctx = testutil::random_context(rng, sys);
    const Vector p = testutil::random_vector(rng, 2, -3, 3);
    const Vector g = gradient_at(sys, ctx, p);
    Vector fd(2);
    for (int i = 0; i < 2; ++i) {
      Vector e = Vector::Zero(2);
      e(i) = 1e-6;
      fd(i) = (squared_distance(sys, ctx, p + e) - squared_distance(sys, ctx, p - e)) / 2e-6;
    }
    EXPECT_LT((fd - g).norm() / std::max(1e-8, g.norm()), 1e-5);
  }
}

TEST(Properties, TrichotomyAndSoundness) {
  std::mt19937_64 rng(41);
  int counts[4] = {0, 0, 0, 0};
  for (int t = 0; t < 300; ++t) {
    const auto sys = testutil::random_system(rng);
    const auto ctx = testutil::random_context(rng, sys);
    const auto adm = compute_admissible_set(sys, ctx);
    ++counts[static_cast<int>(adm.label)];
    EXPECT_LE(adm.h_min, adm.h_max);
    EXPECT_EQ(adm.is_case1(), adm.h_min >= adm.threshold);
    if (adm.label == CaseLabel::kCase2) EXPECT_LT(adm.h_max, adm.threshold);
    const double thr = adm.threshold;
    if (const auto* c1 = std::get_if<Case1Full>(&adm.variant)) {
      for (const auto& u : testutil::sample_polytope(rng, c1->set, 200))
        EXPECT_GE(std::sqrt(squared_distance(sys, ctx, u)), ctx.c1 + ctx.w_max0 - 1e-7);
    } else if (const auto* c3 = std::get_if<Case3Restricted>(&adm.variant)) {
      EXPECT_FALSE(is_empty(c3->set));
      for (const auto& u : testutil::sample_polytope(rng, c3->set, 200))
        EXPECT_GE(squared_distance(sys, ctx, u), thr - 1e-7);
    } else {
      const Vector s = std::get<Case2Singleton>(adm.variant).u;
      for (const auto& u : testutil::sample_polytope(rng, ctx.U_x0, 200))
        EXPECT_GE(squared_distance(sys, ctx, s), squared_distance(sys, ctx, u));
    }
  }
  EXPECT_GT(counts[0], 10);
  EXPECT_GT(counts[1], 10);
  EXPECT_GT(counts[2], 10);
}

TEST(Properties, SupportChangeOnlyMovesThreshold) {
  std::mt19937_64 rng(43);
  for (int t = 0; t < 100; ++t) {
    const auto sys = testutil::random_system(rng);
    auto ctx = testutil::random_context(rng, sys);
    const auto a = compute_admissible_set(sys, ctx);
    ctx.w_max0 = ctx.w_max0 > 0.5 ? 0.15 : 0.9;
    const auto b = compute_admissible_set(sys, ctx);
    EXPECT_EQ(a.h_min, b.h_min);
    EXPECT_EQ(a.h_max, b.h_max);
    EXPECT_EQ(b.threshold, SquaredSubstitute::threshold(ctx.c1 + ctx.w_max0));
    EXPECT_EQ(b.is_case1(), b.h_min >= b.threshold);
  }
}

TEST(SampledGeneral, AgreesWithCaseLogic) {
  std::mt19937_64 rng(47);
  int checked = 0;
  for (int t = 0; t < 60; ++t) {
    const auto sys = testutil::random_system(rng);
    const auto ctx = testutil::random_context(rng, sys);
    const auto adm = compute_admissible_set(sys, ctx);
    const TruncatedRadialGaussian dens(1.0, ctx.w_max0);
    auto prob = [&](const Vector& u) {
      return collision_probability(ctx.c1, dens, std::sqrt(squared_distance(sys, ctx, u)));
    };
    const auto best = sampled_general_uopt(sys, ctx, prob, 200);
    ASSERT_FALSE(best.empty());
    if (adm.is_case1()) {
      EXPECT_GE(best.size(), 200u);
    } else if (adm.is_case2()) {
      // With positive probability everywhere the sampled minimum sits at the
      // farthest vertex, which is among the candidates.
      const Vector s = std::get<Case2Singleton>(adm.variant).u;
      bool found = false;
      for (const auto& u : best) found = found || (u - s).norm() < 1e-9;
      EXPECT_TRUE(found);
    } else if (adm.is_case3()) {
      for (const auto& u : best) EXPECT_LE(prob(u), 1e-9);
      for (const auto& u : testutil::sample_polytope(rng, std::get<Case3Restricted>(adm.variant).set, 100))
        EXPECT_EQ(prob(u), 0.0);
    }
    ++checked;
  }
  EXPECT_EQ(checked, 60);
}

TEST(SampledGeneral, ConstantProbabilityKeepsEverything) {
  const auto sys = road_system();
  const auto ctx = road_context(v2(0, 4), v2(3, 3), 0.15);
  const auto all = sampled_general_uopt(sys, ctx, [](const Vector&) { return 0.25; }, 50);
  EXPECT_EQ(all.size(), 54u);
  EXPECT_THROW(sampled_general_uopt(sys, ctx, [](const Vector&) { return 0.0; }, 0), InvalidArgument);
}

TEST(MultiStep, SingleStepReducesToOneStep) {
  std::mt19937_64 rng(53);
  for (int t = 0; t < 100; ++t) {
    const auto sys = testutil::random_system(rng);
    const auto ctx = testutil::random_context(rng, sys);
    const auto a = compute_admissible_set(sys, ctx);
    const auto b = multi_step_admissible_set(sys, {ctx}, 1);
    ASSERT_EQ(a.label, b.label);
    EXPECT_EQ(a.h_min, b.h_min);
    EXPECT_EQ(a.h_max, b.h_max);
    if (a.is_case2()) EXPECT_EQ(std::get<Case2Singleton>(a.variant).u, std::get<Case2Singleton>(b.variant).u);
    if (a.is_case3()) EXPECT_EQ(std::get<Case3Restricted>(a.variant).set, std::get<Case3Restricted>(b.variant).set);
  }
}

TEST(MultiStep, ThresholdSumsSupports) {
  const auto sys = road_system();
  const auto c0 = road_context(v2(0, 4), v2(40, 4), 0.15);
  const auto c1 = road_context(v2(0, 4), v2(40, 4), 0.15);
  const auto adm = multi_step_admissible_set(sys, {c0, c1}, 2);
  EXPECT_DOUBLE_EQ(adm.threshold, (2.8 + 0.30) * (2.8 + 0.30));
  EXPECT_TRUE(adm.is_case1());
  EXPECT_EQ(adm.u_max.size(), 4);
}

TEST(MultiStep, FarStaticObstacleThreeStepsIsCase1) {
  const auto sys = road_system();
  const auto ctx = road_context(v2(0, 4), v2(100, -50), 0.9);
  EXPECT_TRUE(multi_step_admissible_set(sys, {ctx, ctx, ctx}, 3).is_case1());
  EXPECT_THROW(multi_step_admissible_set(sys, {ctx}, 2), InvalidArgument);
}

TEST(ReverseTriangle, EqualityCase) {
  // ||y - ybar|| = c + w exactly and w aligned: the shifted distance is c.
  const Vector y = v2(3, 0), ybar = v2(0, 0);
  EXPECT_TRUE(reverse_triangle_implication_holds(y, ybar, 2.0, 1.0, {v2(1, 0)}));
  EXPECT_EQ((y - ybar - v2(1, 0)).norm(), 2.0);
  // Antecedent false: vacuous.
  EXPECT_TRUE(reverse_triangle_implication_holds(v2(1, 0), ybar, 2.0, 1.0, {v2(1, 0)}));
}

TEST(ReverseTriangle, RoundingSlackDoesNotHideRealViolations) {
  // A sample outside the support ball breaks the implication by 1e-9.
  const Vector y = v2(3, 0), ybar = v2(0, 0);
  EXPECT_FALSE(reverse_triangle_implication_holds(y, ybar, 2.0, 1.0, {v2(1 + 1e-9, 0)}));
}

TEST(ReverseTriangle, RandomBoundaryInstancesHold) {
  std::mt19937_64 rng(31);
  for (int t = 0; t < 2000; ++t) {
    const double c = testutil::uniform(rng, 0.0, 4.0), w = testutil::uniform(rng, 0.0, 2.0);
    const double phi = testutil::uniform(rng, 0.0, 6.283185307179586);
    const Vector dir = v2(std::cos(phi), std::sin(phi));
    const Vector ybar = testutil::random_vector(rng, 2, -10, 10);
    const Vector y = ybar + (c + w) * dir;
    EXPECT_TRUE(reverse_triangle_implication_holds(y, ybar, c, w, {w * dir}));
  }
}
