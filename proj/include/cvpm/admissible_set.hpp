#pragma once

#include <functional>
#include <string_view>
#include <variant>
#include <vector>

#include "cvpm/geometry.hpp"
#include "cvpm/model.hpp"
#include "cvpm/solver.hpp"

namespace cvpm {

/// Monotone substitute for the violation probability, h(xi) = xi^2, used both
/// on the achieved distance and on the required distance (threshold).
struct SquaredSubstitute {
  static double value(double xi) { return xi * xi; }
  static double threshold(double xi) { return xi * xi; }
};

/// Everything known at the start of a step about the first-step norm
/// constraint ||y_1 - y_r,1|| >= c_1.
struct ViolationContext {
  Vector x0;        ///< current state
  Vector ybar_r1;   ///< nominal obstacle output at the next step
  double c1 = 0.0;  ///< minimal admissible distance
  double w_max0 = 0.0;
  Polytope U_x0;    ///< admissible first inputs (input + state constraints)

  void validate(const LinearSystem& sys) const;
};

/// Case 1: every admissible input keeps the constraint with certainty.
struct Case1Full {
  Polytope set;
};
/// Case 2: no input can guarantee the constraint; the farthest input is kept.
struct Case2Singleton {
  Vector u;
};
/// Case 3: the admissible set cut by the supporting halfspace at p.
struct Case3Restricted {
  Polytope set;
  Halfspace cut;
  Vector p;
};

enum class CaseLabel { kCase1, kCase2, kCase3, kCase3Fallback };
std::string_view to_string(CaseLabel c);

struct AdmissibleInputSet {
  std::variant<Case1Full, Case2Singleton, Case3Restricted> variant{Case2Singleton{}};
  CaseLabel label = CaseLabel::kCase1;
  double h_min = 0.0;
  double h_max = 0.0;
  double threshold = 0.0;
  Vector u_min;  ///< minimizer of the distance over the admissible set
  Vector u_max;  ///< maximizing vertex

  bool is_case1() const { return std::holds_alternative<Case1Full>(variant); }
  bool is_case2() const { return std::holds_alternative<Case2Singleton>(variant); }
  bool is_case3() const { return std::holds_alternative<Case3Restricted>(variant); }
};

/// Classifies the step into the three cases and returns the tightened set.
AdmissibleInputSet compute_admissible_set(const LinearSystem& sys, const ViolationContext& ctx);

/// Point on the segment [u_lo, u_hi] where the squared distance crosses the
/// threshold. Requires h(u_lo) < threshold <= h(u_hi); the returned point has
/// h(p) >= threshold and |h(p) - threshold| <= 1e-9 max(1, threshold).
Vector find_boundary_point(const LinearSystem& sys, const ViolationContext& ctx, const Vector& u_lo,
                           const Vector& u_hi);

/// Gradient of ||C(A x0 + B u) - ybar_r1||^2 with respect to u at p.
Vector gradient_at(const LinearSystem& sys, const ViolationContext& ctx, const Vector& p);

/// Squared distance h(u) = ||C(A x0 + B u) - ybar_r1||^2.
double squared_distance(const LinearSystem& sys, const ViolationContext& ctx, const Vector& u);

/// Sampling approximation of the violation-minimizing input set for an
/// arbitrary probability function: Halton samples of U_x0, keeping those
/// whose probability is within 1e-9 of the sampled minimum.
std::vector<Vector> sampled_general_uopt(const LinearSystem& sys, const ViolationContext& ctx,
                                         const std::function<double(const Vector&)>& prob_fn, int n_samples);

/// Multi-step extension over the stacked inputs (u_0, ..., u_{l-1}).
/// contexts[j] carries the admissible set of u_j and the nominal obstacle
/// output at step j + 1; the distance at step l is compared with
/// c + sum_j w_max,j. The stacked admissible set is the product of the
/// per-step sets. For l = 1 this is compute_admissible_set.
AdmissibleInputSet multi_step_admissible_set(const LinearSystem& sys, const std::vector<ViolationContext>& contexts,
                                             int l);

/// Checks ||y - ybar|| >= c + w_max  =>  ||y - ybar - w|| >= c for each sample,
/// up to a rounding slack of 8 eps (||y - ybar|| + ||w|| + c).
bool reverse_triangle_implication_holds(const Vector& y, const Vector& ybar_r, double c, double w_max,
                                  const std::vector<Vector>& w_samples);

/// Affine form of the distance map: ||M u - b|| with M = C B, b = ybar - C A x0.
struct DistanceMap {
  Matrix M;
  Vector b;
};
DistanceMap distance_map(const LinearSystem& sys, const ViolationContext& ctx);

}  // namespace cvpm
