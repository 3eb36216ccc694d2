#include "cvpm/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "cvpm/errors.hpp"
#include "cvpm/solver.hpp"

namespace cvpm {

namespace {

constexpr double kVertexTol = 1e-8;

void check_dim(const Polytope& P, Eigen::Index d, const char* where) {
  if (P.dim() != d)
    throw InvalidArgument(std::string(where) + ": dimension mismatch (" + std::to_string(P.dim()) + " vs " +
                          std::to_string(d) + ")");
}

// Support value max_{u in P} dir' u. Returns false when unbounded.
bool support_value(const Polytope& P, const Vector& dir, double& value) {
  const auto d = P.dim();
  const SolveReport rep = solve_qp(QuadraticProgram(Matrix::Zero(d, d), -dir, P));
  switch (rep.status) {
    case SolveStatus::kOptimal:
      value = -rep.objective;
      return true;
    case SolveStatus::kUnbounded:
      return false;
    case SolveStatus::kInfeasible:
      throw Infeasible("support_value: polytope is empty");
    case SolveStatus::kNumericalFailure:
      break;
  }
  throw NumericalFailure("support_value: LP solver failed");
}

}  // namespace

Halfspace::Halfspace(Vector normal_, double offset_) : normal(std::move(normal_)), offset(offset_) {
  if (!(normal.norm() > 1e-12)) throw InvalidArgument("Halfspace: normal must be nonzero");
  if (!std::isfinite(offset) || !normal.allFinite()) throw InvalidArgument("Halfspace: non-finite coefficients");
}

Polytope::Polytope(Eigen::Index dim) : dim_(dim) {
  if (dim <= 0) throw InvalidArgument("Polytope: dimension must be positive");
}

Polytope::Polytope(Eigen::Index dim, std::vector<Halfspace> halfspaces) : Polytope(dim) {
  for (auto& h : halfspaces) add(std::move(h));
}

Polytope Polytope::from_matrix(const Matrix& A, const Vector& b) {
  if (A.rows() != b.size()) throw InvalidArgument("Polytope::from_matrix: row count mismatch");
  Polytope P(A.cols());
  for (Eigen::Index i = 0; i < A.rows(); ++i) P.add(Halfspace(A.row(i).transpose(), b(i)));
  return P;
}

Polytope Polytope::box(const Vector& lo, const Vector& hi) {
  if (lo.size() != hi.size()) throw InvalidArgument("Polytope::box: bound sizes differ");
  Polytope P(lo.size());
  for (Eigen::Index i = 0; i < lo.size(); ++i) {
    Vector e = Vector::Zero(lo.size());
    e(i) = 1.0;
    P.add(Halfspace(e, hi(i)));
    P.add(Halfspace(-e, -lo(i)));
  }
  return P;
}

Matrix Polytope::normals() const {
  Matrix A(static_cast<Eigen::Index>(halfspaces_.size()), dim_);
  for (std::size_t i = 0; i < halfspaces_.size(); ++i) A.row(static_cast<Eigen::Index>(i)) = halfspaces_[i].normal.transpose();
  return A;
}

Vector Polytope::offsets() const {
  Vector b(static_cast<Eigen::Index>(halfspaces_.size()));
  for (std::size_t i = 0; i < halfspaces_.size(); ++i) b(static_cast<Eigen::Index>(i)) = halfspaces_[i].offset;
  return b;
}

void Polytope::add(Halfspace h) {
  if (h.normal.size() != dim_) throw InvalidArgument("Polytope::add: halfspace normal has wrong length");
  if (!(h.normal.norm() > 1e-12)) throw InvalidArgument("Polytope::add: zero normal");
  halfspaces_.push_back(std::move(h));
}

bool Polytope::operator==(const Polytope& other) const {
  if (dim_ != other.dim_ || halfspaces_.size() != other.halfspaces_.size()) return false;
  for (std::size_t i = 0; i < halfspaces_.size(); ++i) {
    if (halfspaces_[i].offset != other.halfspaces_[i].offset || halfspaces_[i].normal != other.halfspaces_[i].normal)
      return false;
  }
  return true;
}

bool contains(const Polytope& P, const Vector& u, double tol) {
  if (u.size() != P.dim()) throw InvalidArgument("contains: dimension mismatch");
  for (const auto& h : P.halfspaces()) {
    if (h.normal.dot(u) > h.offset + tol) return false;
  }
  return true;
}

Polytope intersect(const Polytope& P, const Halfspace& H) {
  check_dim(P, H.normal.size(), "intersect");
  Polytope out = P;
  out.add(H);
  return out;
}

ChebyshevBall chebyshev_ball(const Polytope& P, double radius_cap) {
  const auto d = P.dim();
  if (P.size() == 0) return {Vector::Zero(d), radius_cap};
  // Variables (x, r): maximize r  s.t.  a' x + ||a|| r <= b,  r <= cap.
  Polytope lifted(d + 1);
  for (const auto& h : P.halfspaces()) {
    Vector a(d + 1);
    a.head(d) = h.normal;
    a(d) = h.normal.norm();
    lifted.add(Halfspace(a, h.offset));
  }
  Vector cap = Vector::Zero(d + 1);
  cap(d) = 1.0;
  lifted.add(Halfspace(cap, radius_cap));
  Vector f = Vector::Zero(d + 1);
  f(d) = -1.0;
  const SolveReport rep = solve_qp(QuadraticProgram(Matrix::Zero(d + 1, d + 1), f, lifted));
  if (!rep.optimal())
    throw NumericalFailure(std::string("chebyshev_ball: LP returned ") + std::string(to_string(rep.status)));
  return {rep.minimizer.head(d), rep.minimizer(d)};
}

bool is_empty(const Polytope& P, double tol) { return chebyshev_ball(P).radius < -tol; }

bool is_bounded(const Polytope& P) {
  const auto d = P.dim();
  for (Eigen::Index i = 0; i < d; ++i) {
    for (double sign : {1.0, -1.0}) {
      Vector dir = Vector::Zero(d);
      dir(i) = sign;
      double value = 0.0;
      if (!support_value(P, dir, value)) return false;
    }
  }
  return true;
}

bool lexicographic_less(const Vector& a, const Vector& b) {
  return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
}

std::vector<Vector> enumerate_vertices(const Polytope& P) {
  const auto d = P.dim();
  if (d > 3) throw InvalidArgument("enumerate_vertices: only dimensions up to 3 are supported");
  try {
    if (!is_bounded(P)) throw InvalidArgument("enumerate_vertices: polytope is unbounded");
  } catch (const Infeasible&) {
    return {};
  }

  const Matrix A = P.normals();
  const Vector b = P.offsets();
  const auto m = static_cast<int>(A.rows());
  Vector row_norms(m);
  for (int i = 0; i < m; ++i) row_norms(i) = A.row(i).norm();

  std::vector<Vector> found;
  std::vector<int> idx(static_cast<std::size_t>(d));
  auto try_combo = [&]() {
    Matrix S(d, d);
    Vector rhs(d);
    double norm_prod = 1.0;
    for (Eigen::Index r = 0; r < d; ++r) {
      S.row(r) = A.row(idx[static_cast<std::size_t>(r)]);
      rhs(r) = b(idx[static_cast<std::size_t>(r)]);
      norm_prod *= row_norms(idx[static_cast<std::size_t>(r)]);
    }
    Eigen::FullPivLU<Matrix> lu(S);
    if (std::abs(lu.determinant()) <= 1e-12 * norm_prod) return;
    const Vector v = lu.solve(rhs);
    for (int i = 0; i < m; ++i) {
      if ((A.row(i).dot(v) - b(i)) / row_norms(i) > kVertexTol) return;
    }
    for (const auto& w : found) {
      if ((w - v).cwiseAbs().maxCoeff() <= kVertexTol) return;
    }
    found.push_back(v);
  };

  // Enumerate all d-subsets of the halfspaces in increasing index order.
  std::function<void(int, int)> rec = [&](int start, int depth) {
    if (depth == d) {
      try_combo();
      return;
    }
    for (int i = start; i < m; ++i) {
      idx[static_cast<std::size_t>(depth)] = i;
      rec(i + 1, depth + 1);
    }
  };
  rec(0, 0);
  std::sort(found.begin(), found.end(), lexicographic_less);
  return found;
}

std::vector<Vector> enumerate_product_vertices(const std::vector<Polytope>& factors) {
  if (factors.empty()) return {};
  std::vector<std::vector<Vector>> per;
  Eigen::Index total = 0;
  for (const auto& f : factors) {
    per.push_back(enumerate_vertices(f));
    if (per.back().empty()) return {};
    total += f.dim();
  }
  std::vector<Vector> out;
  std::vector<std::size_t> pick(per.size(), 0);
  while (true) {
    Vector v(total);
    Eigen::Index off = 0;
    for (std::size_t i = 0; i < per.size(); ++i) {
      const Vector& part = per[i][pick[i]];
      v.segment(off, part.size()) = part;
      off += part.size();
    }
    out.push_back(std::move(v));
    // Odometer increment, last factor fastest, which keeps the output
    // lexicographically sorted.
    std::size_t k = per.size();
    while (k > 0) {
      --k;
      if (++pick[k] < per[k].size()) break;
      pick[k] = 0;
      if (k == 0) return out;
    }
  }
}

}  // namespace cvpm
