#pragma once

#include <vector>

#include "cvpm/model.hpp"

namespace cvpm {

/// {u : normal' u <= offset}. The normal must be nonzero.
struct Halfspace {
  Vector normal;
  double offset = 0.0;

  Halfspace() = default;
  Halfspace(Vector normal, double offset);
};

/// H-representation polytope in R^dim. An empty halfspace list is the whole
/// space. Redundant halfspaces are allowed and kept.
class Polytope {
 public:
  explicit Polytope(Eigen::Index dim);
  Polytope(Eigen::Index dim, std::vector<Halfspace> halfspaces);
  /// Builds {u : A u <= b}; each row of A becomes one halfspace.
  static Polytope from_matrix(const Matrix& A, const Vector& b);
  /// Axis-aligned box lo <= u <= hi.
  static Polytope box(const Vector& lo, const Vector& hi);

  Eigen::Index dim() const { return dim_; }
  const std::vector<Halfspace>& halfspaces() const { return halfspaces_; }
  std::size_t size() const { return halfspaces_.size(); }

  Matrix normals() const;  ///< one row per halfspace
  Vector offsets() const;

  void add(Halfspace h);

  bool operator==(const Polytope& other) const;

 private:
  Eigen::Index dim_;
  std::vector<Halfspace> halfspaces_;
};

bool contains(const Polytope& P, const Vector& u, double tol = 1e-9);

/// P with H appended; membership is the conjunction of both.
Polytope intersect(const Polytope& P, const Halfspace& H);

/// Chebyshev-center test: empty iff the largest inscribed ball radius is
/// below -tol. Degenerate (measure-zero) sets are not empty.
bool is_empty(const Polytope& P, double tol = 1e-9);

/// Radius and center of the largest inscribed ball, capped at `radius_cap`.
struct ChebyshevBall {
  Vector center;
  double radius = 0.0;
};
ChebyshevBall chebyshev_ball(const Polytope& P, double radius_cap = 1.0);

/// True iff every coordinate direction has a finite support value.
/// Throws Infeasible for an empty polytope.
bool is_bounded(const Polytope& P);

/// All vertices of a bounded polytope with dim <= 3, in lexicographic order,
/// duplicates within 1e-8 merged. Empty polytopes give an empty list.
/// Throws InvalidArgument when the polytope is unbounded or dim > 3.
std::vector<Vector> enumerate_vertices(const Polytope& P);

/// Vertices of a Cartesian product of polytopes in stacking order. Each factor
/// is enumerated separately, so the stacked dimension may exceed 3.
std::vector<Vector> enumerate_product_vertices(const std::vector<Polytope>& factors);

/// Lexicographic comparison used to order vertices.
bool lexicographic_less(const Vector& a, const Vector& b);

}  // namespace cvpm
