#pragma once

#include <random>
#include <vector>

#include "cvpm/admissible_set.hpp"
#include "cvpm/geometry.hpp"
#include "cvpm/model.hpp"

namespace cvpm::testutil {

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Vector random_vector(std::mt19937_64& rng, Eigen::Index n, double lo, double hi) {
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = uniform(rng, lo, hi);
  return v;
}

/// Box with random extents, optionally cut by a halfspace through an
/// interior point so the result stays nonempty and bounded.
inline Polytope random_polytope(std::mt19937_64& rng, Eigen::Index dim, bool cut) {
  Vector lo = random_vector(rng, dim, -3.0, 0.0);
  Vector hi = lo + random_vector(rng, dim, 0.5, 4.0);
  Polytope P = Polytope::box(lo, hi);
  if (cut) {
    Vector a = random_vector(rng, dim, -1.0, 1.0);
    if (a.norm() < 0.1) a(0) = 1.0;
    const Vector inner = lo + (hi - lo).cwiseProduct(random_vector(rng, dim, 0.3, 0.7));
    P.add(Halfspace(a, a.dot(inner)));
  }
  return P;
}

/// Uniform points of P by rejection from its vertex bounding box.
inline std::vector<Vector> sample_polytope(std::mt19937_64& rng, const Polytope& P, int count) {
  const auto vs = enumerate_vertices(P);
  Vector lo = vs.front();
  Vector hi = vs.front();
  for (const auto& v : vs) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  std::vector<Vector> out;
  for (long tries = 0; static_cast<int>(out.size()) < count && tries < 1000L * count; ++tries) {
    Vector u = lo + (hi - lo).cwiseProduct(random_vector(rng, P.dim(), 0.0, 1.0));
    if (contains(P, u, 0.0)) out.push_back(std::move(u));
  }
  return out;
}

inline LinearSystem random_system(std::mt19937_64& rng) {
  Matrix A = Matrix::Identity(2, 2);
  A(0, 0) += uniform(rng, -0.2, 0.2);
  A(1, 1) += uniform(rng, -0.2, 0.2);
  Matrix B(2, 2);
  do {
    for (int i = 0; i < 4; ++i) B(i / 2, i % 2) = uniform(rng, -1.0, 1.0);
  } while (std::abs(B.determinant()) < 0.2);
  Matrix C = Matrix::Identity(2, 2);
  A(0, 1) = uniform(rng, -0.2, 0.2);
  A(1, 0) = uniform(rng, -0.2, 0.2);
  return LinearSystem(A, B, C);
}

/// Context whose nominal obstacle sits at a random distance from a reachable
/// output, so all three cases occur with reasonable frequency.
inline ViolationContext random_context(std::mt19937_64& rng, const LinearSystem& sys, bool cut = true) {
  const Vector x0 = random_vector(rng, 2, -2.0, 2.0);
  Polytope U = random_polytope(rng, 2, cut);
  const double c1 = uniform(rng, 0.2, 2.0);
  const double w = uniform(rng, 0.0, 1.0);
  ViolationContext ctx{x0, Vector::Zero(2), c1, w, std::move(U)};
  const auto vs = enumerate_vertices(ctx.U_x0);
  const Vector u_c = vs[static_cast<std::size_t>(std::uniform_int_distribution<std::size_t>(0, vs.size() - 1)(rng))];
  const Vector y_c = sys.C() * (sys.A() * ctx.x0 + sys.B() * u_c);
  const double radius = uniform(rng, 0.0, 3.0) * (ctx.c1 + ctx.w_max0);
  const double phi = uniform(rng, 0.0, 6.283185307179586);
  Vector dir(2);
  dir << std::cos(phi), std::sin(phi);
  ctx.ybar_r1 = y_c + radius * dir;
  return ctx;
}

}  // namespace cvpm::testutil
