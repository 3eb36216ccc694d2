#pragma once

#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "cvpm/geometry.hpp"

namespace cvpm {

/// minimize 0.5 x'Hx + f'x  s.t.  ineq (A x <= b)  and  eq_A x = eq_b.
struct QuadraticProgram {
  Matrix H;
  Vector f;
  Polytope ineq;
  Matrix eq_A;  ///< may have zero rows
  Vector eq_b;

  QuadraticProgram(Matrix H, Vector f, Polytope ineq);
  QuadraticProgram(Matrix H, Vector f, Polytope ineq, Matrix eq_A, Vector eq_b);

  Eigen::Index dim() const { return f.size(); }
  /// Throws InvalidArgument on inconsistent sizes, asymmetric or indefinite H.
  void validate() const;
};

enum class SolveStatus { kOptimal, kInfeasible, kUnbounded, kNumericalFailure };

std::string_view to_string(SolveStatus s);

struct SolveReport {
  Vector minimizer;
  double objective = 0.0;
  SolveStatus status = SolveStatus::kNumericalFailure;
  /// Inequality indices active at the solution, ascending.
  std::vector<int> active_set;
  int iterations = 0;

  bool optimal() const { return status == SolveStatus::kOptimal; }
};

struct SolverOptions {
  double feasibility_tol = 1e-9;
  double optimality_tol = 1e-9;
  int max_iterations = 0;  ///< 0 picks a bound from the problem size
};

/// Primal active-set method for convex QPs (PSD Hessian, LP when H = 0).
/// Phase 1 finds a feasible point by minimizing the maximal constraint
/// violation; phase 2 runs a null-space active-set iteration. Blocking and
/// dropping ties are broken by the lowest constraint index, so repeated
/// solves of the same problem are bit-identical.
SolveReport solve_qp(const QuadraticProgram& qp, const SolverOptions& options = {});

/// KKT residuals of a reported solution: max constraint violation and
/// the stationarity residual ||H x + f + A_act' lambda + E' mu||.
struct KktResiduals {
  double max_violation = 0.0;
  double stationarity = 0.0;
  double min_multiplier = 0.0;
};
KktResiduals kkt_residuals(const QuadraticProgram& qp, const SolveReport& report);

struct NormExtremum {
  Vector u;
  double value = 0.0;  ///< ||M u - b||_2
};

/// argmin_{u in P} ||M u - b||_2, solved as a QP on the squared norm.
/// Throws Infeasible when P is empty.
NormExtremum min_norm_to_point(const Matrix& M, const Vector& b, const Polytope& P);

/// argmax_{u in P} ||M u - b||_2 over the vertices of P (dim <= 3). Ties go to
/// the lexicographically smallest vertex. Throws InvalidArgument for unbounded
/// or higher-dimensional P and Infeasible for empty P.
NormExtremum max_norm_to_point(const Matrix& M, const Vector& b, const Polytope& P);

/// Same as max_norm_to_point but over an explicit candidate vertex list.
NormExtremum max_norm_over_vertices(const Matrix& M, const Vector& b, const std::vector<Vector>& vertices);

}  // namespace cvpm
