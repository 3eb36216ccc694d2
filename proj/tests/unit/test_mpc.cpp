#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "cvpm/errors.hpp"
#include "cvpm/mpc.hpp"
#include "cvpm/sim.hpp"

using namespace cvpm;

namespace {

Vector v2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

ObstacleModel obstacle_at(const Vector& y, const Vector& drift, double w) {
  ObstacleModel o;
  o.y_r0 = y;
  o.u_r_schedule.entries = {{0, drift}};
  o.w_max_schedule.entries = {{0, w}};
  return o;
}

}  // namespace

TEST(FirstStepPolytope, RoadConstraints) {
  const auto cfg = builtin_scenario_2();
  const Polytope U = first_step_input_polytope(cfg.system, cfg.mpc, v2(0, 4));
  const auto vs = enumerate_vertices(U);
  ASSERT_EQ(vs.size(), 4u);
  EXPECT_TRUE(vs.front().isApprox(v2(1, -3.5)));
  EXPECT_TRUE(vs.back().isApprox(v2(9, 3.5)));
}

TEST(FirstStepPolytope, StateBoundCanBind) {
  const auto cfg = builtin_scenario_1();
  // At y = 8 the upper road bound forbids any upward input.
  const Polytope U = first_step_input_polytope(cfg.system, cfg.mpc, v2(0, 8));
  EXPECT_FALSE(contains(U, v2(5, 0.1), 1e-9));
  EXPECT_TRUE(contains(U, v2(5, 0.0), 1e-9));
  EXPECT_TRUE(contains(U, v2(5, -3.5), 1e-9));
}

TEST(FirstStepPolytope, WholeSpaceAndUnrecoverable) {
  auto cfg = builtin_scenario_1();
  cfg.mpc.state_set = Polytope(2);
  cfg.mpc.terminal_set = Polytope(2);
  EXPECT_EQ(first_step_input_polytope(cfg.system, cfg.mpc, v2(0, 4)), cfg.mpc.input_set);
  const auto base = builtin_scenario_1();
  EXPECT_TRUE(is_empty(first_step_input_polytope(base.system, base.mpc, v2(0, 20))));
}

TEST(Riccati, ZeroDynamicsGivesQ) {
  const LinearSystem sys(Matrix::Zero(2, 2), Matrix::Identity(2, 2), Matrix::Identity(2, 2));
  Matrix Q(2, 2);
  Q << 2, 0.5, 0.5, 1;
  EXPECT_TRUE(riccati_terminal_weight(sys, Q, Matrix::Identity(2, 2)).isApprox(Q, 1e-14));
}

TEST(Riccati, ScalarRoot) {
  Matrix A(1, 1), B(1, 1), C(1, 1), one(1, 1);
  A << 0.5;
  B << 1;
  C << 1;
  one << 1;
  const Matrix P = riccati_terminal_weight(LinearSystem(A, B, C), one, one);
  // Root of p^2 - 0.25 p - 1 = 0 (mpmath).
  EXPECT_NEAR(P(0, 0), 1.1327822185373187065, 1e-9);
  const double p = P(0, 0);
  EXPECT_NEAR(p, 0.25 * p - 0.25 * p * p / (1 + p) + 1, 1e-10);
}

TEST(Riccati, RoadSystem) {
  const auto sys = discretize_double_integrator(0.1);
  const Matrix Q = Matrix::Identity(2, 2);
  const Matrix R = 0.1 * Matrix::Identity(2, 2);
  const Matrix P = riccati_terminal_weight(sys, Q, R);
  EXPECT_TRUE(P.isApprox(P.transpose()));
  EXPECT_GT(Eigen::SelfAdjointEigenSolver<Matrix>(P).eigenvalues().minCoeff(), 0.0);
  EXPECT_LT(riccati_residual(sys, Q, R, P), 1e-9);
  // Diagonal value (1 + sqrt(1 + 4 r / b^2)) / 2 from mpmath.
  EXPECT_NEAR(P(0, 0), 3.54808753765422028, 1e-8);
}

TEST(Riccati, NonStabilizableFails) {
  Matrix A(1, 1), B(1, 1), C(1, 1), one(1, 1);
  A << 2.0;
  B << 0.0;
  C << 1;
  one << 1;
  EXPECT_THROW(riccati_terminal_weight(LinearSystem(A, B, C), one, one), NumericalFailure);
}

TEST(SolveStep, AbsentObstacleIsPlainTracking) {
  auto cfg = builtin_scenario_2();
  cfg.mpc.reference.offset = v2(0, 4);
  cfg.mpc.reference.rate = v2(0, 0);
  cfg.mpc.input_set = Polytope::box(v2(-9, -3.5), v2(9, 3.5));
  const auto o = obstacle_at(v2(1e6, 1e6), v2(0, 0), 0.0);
  const auto dec = solve_step(cfg.system, cfg.mpc, v2(0, 4), o, o.y_r0, 0, 2.8);
  EXPECT_EQ(dec.case_label, CaseLabel::kCase1);
  EXPECT_LT(dec.u0.norm(), 1e-9);
  EXPECT_EQ(dec.predicted_violation_probability, 0.0);
  EXPECT_NEAR(dec.cost, 0.0, 1e-12);
}

TEST(SolveStep, Case1IsTransparent) {
  // Same decision with and without a distant obstacle.
  const auto cfg = builtin_scenario_2();
  const auto far = obstacle_at(v2(500, 3), v2(0.25, 0), 0.9);
  const auto farther = obstacle_at(v2(900, 3), v2(0.25, 0), 0.15);
  const auto a = solve_step(cfg.system, cfg.mpc, v2(0, 4), far, far.y_r0, 0, 2.8);
  const auto b = solve_step(cfg.system, cfg.mpc, v2(0, 4), farther, farther.y_r0, 0, 2.8);
  ASSERT_EQ(a.case_label, CaseLabel::kCase1);
  ASSERT_EQ(b.case_label, CaseLabel::kCase1);
  EXPECT_EQ(a.u0, b.u0);
  EXPECT_EQ(a.cost, b.cost);
}

TEST(SolveStep, BlockingObstacleSlowsVehicle) {
  const auto cfg = builtin_scenario_1();
  const auto free = obstacle_at(v2(500, 4), v2(0.5, 0), 0.15);
  const auto dec_free = solve_step(cfg.system, cfg.mpc, v2(0, 8), free, free.y_r0, 0, 2.8);
  // Obstacle 2.9 below the road edge and just ahead: the clearance 2.95 needs
  // x1 <= 0.26, which only a slower input reaches.
  const auto block = obstacle_at(v2(0.3, 5.1), v2(0.5, 0), 0.15);
  const auto dec = solve_step(cfg.system, cfg.mpc, v2(0, 8), block, block.y_r0, 0, 2.8);
  EXPECT_EQ(dec.case_label, CaseLabel::kCase3);
  EXPECT_LT(dec.u0(0), dec_free.u0(0));
  EXPECT_EQ(dec.predicted_violation_probability, 0.0);
  EXPECT_GE(dec.predicted_distance, 2.95 - 1e-9);
}

TEST(SolveStep, InfeasibleStartRejected) {
  const auto cfg = builtin_scenario_1();
  const auto o = obstacle_at(v2(100, 4), v2(0.5, 0), 0.15);
  EXPECT_THROW(solve_step(cfg.system, cfg.mpc, v2(0, 30), o, o.y_r0, 0, 2.8), Infeasible);
}

TEST(SolveStep, ConvergesWhenObstacleDeparts) {
  const auto cfg = builtin_scenario_2();
  const auto o = obstacle_at(v2(-1000, 3), v2(-1, 0), 0.15);
  Vector x = v2(0, 2.5);
  Vector y_r = o.y_r0;
  double last_err = 1e9;
  for (long k = 0; k < 60; ++k) {
    const auto dec = solve_step(cfg.system, cfg.mpc, x, o, y_r, k, 2.8);
    x = cfg.system.step(x, dec.u0);
    y_r = nominal_next_obstacle(o, y_r, k);
    const double err = (x - cfg.mpc.reference.at(k + 1)).norm();
    if (k >= 30) EXPECT_LT(err, 1e-3) << k;
    last_err = err;
  }
  EXPECT_LT(last_err, 1e-3);
}

TEST(SolveStep, RandomizedClosedLoopStaysFeasible) {
  const auto cfg = builtin_scenario_2();
  std::mt19937_64 rng(77);
  ObstacleModel o = obstacle_at(v2(6, 3), v2(0.25, 0), 0.15);
  Vector x = cfg.x0;
  Vector y_r = o.y_r0;
  for (long k = 0; k < 300; ++k) {
    o.w_max_schedule.entries = {{0, (k / 7) % 2 ? 0.9 : 0.15}};
    const auto dec = solve_step(cfg.system, cfg.mpc, x, o, y_r, k, 2.8);
    EXPECT_TRUE(contains(cfg.mpc.input_set, dec.u0, 1e-6));
    x = cfg.system.step(x, dec.u0);
    EXPECT_TRUE(contains(cfg.mpc.state_set, x, 1e-6));
    y_r = nominal_next_obstacle(o, y_r, k) + sample_obstacle_step(o.density(k), rng);
    if (y_r(0) < x(0) - 15) y_r(0) = x(0) + 15;  // keep the obstacle in play
  }
}
