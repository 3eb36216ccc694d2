#pragma once

#include <chrono>
#include <vector>

#include "cvpm/admissible_set.hpp"
#include "cvpm/geometry.hpp"
#include "cvpm/model.hpp"

namespace cvpm {

/// State reference x_ref at plant step t: offset + rate * t. Horizon step j
/// of a solve at plant step k uses t = k + j.
struct TrackingReference {
  Vector offset;
  Vector rate;

  Vector at(long t) const { return offset + rate * static_cast<double>(t); }
  bool operator==(const TrackingReference& other) const;
};

struct MpcConfig {
  int N = 10;
  Matrix Q;
  Matrix R;
  Matrix P_f;
  Polytope input_set{1};     ///< U_j, the same for every step
  Polytope state_set{1};     ///< X, imposed on x_1 .. x_N
  Polytope terminal_set{1};  ///< X_f, imposed on x_N
  TrackingReference reference;

  /// Throws InvalidArgument on inconsistent dimensions, Q not PSD or R not PD.
  void validate(const LinearSystem& sys) const;
  bool operator==(const MpcConfig& other) const;
};

struct ControlDecision {
  Vector u0;
  CaseLabel case_label = CaseLabel::kCase1;
  double cost = 0.0;  ///< optimal V_N including the constant x_0 term
  double predicted_violation_probability = 0.0;
  double h_min = 0.0;
  double h_max = 0.0;
  double threshold = 0.0;
  double predicted_distance = 0.0;  ///< ||C(A x0 + B u0) - ybar_r1||
  int qp_iterations = 0;
  std::chrono::duration<double> solve_time{0};
};

/// {u in U_0 : A x0 + B u in X (and in X_f when N = 1)}.
Polytope first_step_input_polytope(const LinearSystem& sys, const MpcConfig& cfg, const Vector& x0);

/// One receding-horizon step. c1 is the minimal admissible distance between
/// the system output and the obstacle; the obstacle's current support and
/// radial density come from `obstacle` at step k. Throws Infeasible when the
/// first-step set is empty or the QP is infeasible and NumericalFailure when
/// the QP solver fails.
ControlDecision solve_step(const LinearSystem& sys, const MpcConfig& cfg, const Vector& x0,
                           const ObstacleModel& obstacle, const Vector& y_r, long k, double c1);

/// Discrete algebraic Riccati solution by fixed-point iteration from P = Q,
/// stopped when successive iterates differ by less than 1e-10 (max norm).
/// Throws NumericalFailure after 10,000 iterations.
Matrix riccati_terminal_weight(const LinearSystem& sys, const Matrix& Q, const Matrix& R);

/// Max-norm residual of the Riccati equation at P.
double riccati_residual(const LinearSystem& sys, const Matrix& Q, const Matrix& R, const Matrix& P);

}  // namespace cvpm
