#include "cvpm/admissible_set.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "cvpm/errors.hpp"

namespace cvpm {

namespace {

constexpr double kMembershipTol = 1e-7;

double squared(const DistanceMap& dm, const Vector& u) { return (dm.M * u - dm.b).squaredNorm(); }

Vector bisect_level_set(const DistanceMap& dm, const Vector& u_lo, const Vector& u_hi, double threshold) {
  const double tol = 1e-9 * std::max(1.0, threshold);
  if (squared(dm, u_hi) == threshold) return u_hi;
  const Vector dir = u_hi - u_lo;
  double lo = 0.0;
  double hi = 1.0;
  Vector p = u_hi;
  for (int it = 0; it < 200; ++it) {
    const double h_hi = squared(dm, p);
    if (h_hi - threshold <= tol) break;
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    const Vector u_mid = u_lo + mid * dir;
    if (squared(dm, u_mid) >= threshold) {
      hi = mid;
      p = u_mid;
    } else {
      lo = mid;
    }
  }
  return p;
}

AdmissibleInputSet classify(const DistanceMap& dm, const Polytope& U, const std::vector<Vector>& vertices,
                            double threshold) {
  if (vertices.empty()) throw Infeasible("compute_admissible_set: admissible input set is empty");
  const NormExtremum lo = min_norm_to_point(dm.M, dm.b, U);
  const NormExtremum hi = max_norm_over_vertices(dm.M, dm.b, vertices);

  AdmissibleInputSet out;
  out.h_max = SquaredSubstitute::value(hi.value);
  out.h_min = std::min(SquaredSubstitute::value(lo.value), out.h_max);
  out.threshold = threshold;
  out.u_min = lo.u;
  out.u_max = hi.u;

  if (out.h_min >= threshold) {
    out.variant = Case1Full{U};
    out.label = CaseLabel::kCase1;
    return out;
  }
  if (out.h_max < threshold) {
    out.variant = Case2Singleton{hi.u};
    out.label = CaseLabel::kCase2;
    return out;
  }

  const Vector p = bisect_level_set(dm, lo.u, hi.u, threshold);
  const Vector grad = 2.0 * dm.M.transpose() * (dm.M * p - dm.b);
  const bool degenerate = !(grad.norm() > 1e-12 * std::max(1.0, dm.M.norm()));
  if (!degenerate) {
    // {u : grad'(u - p) >= 0} stored as {u : -grad' u <= -grad' p}.
    Halfspace cut(-grad, -grad.dot(p));
    Polytope restricted = intersect(U, cut);
    if (!is_empty(restricted)) {
      out.variant = Case3Restricted{std::move(restricted), std::move(cut), p};
      out.label = CaseLabel::kCase3;
      return out;
    }
  }
  out.variant = Case2Singleton{hi.u};
  out.label = CaseLabel::kCase3Fallback;
  return out;
}

double radical_inverse(unsigned long index, unsigned base) {
  double result = 0.0;
  double f = 1.0 / base;
  while (index > 0) {
    result += f * static_cast<double>(index % base);
    index /= base;
    f /= base;
  }
  return result;
}

}  // namespace

std::string_view to_string(CaseLabel c) {
  switch (c) {
    case CaseLabel::kCase1: return "1";
    case CaseLabel::kCase2: return "2";
    case CaseLabel::kCase3: return "3";
    case CaseLabel::kCase3Fallback: return "3-fallback";
  }
  return "?";
}

void ViolationContext::validate(const LinearSystem& sys) const {
  if (x0.size() != sys.state_dim()) throw InvalidArgument("ViolationContext: x0 has wrong dimension");
  if (ybar_r1.size() != sys.output_dim()) throw InvalidArgument("ViolationContext: ybar_r1 has wrong dimension");
  if (U_x0.dim() != sys.input_dim()) throw InvalidArgument("ViolationContext: U_x0 has wrong dimension");
  if (!(c1 >= 0.0)) throw InvalidArgument("ViolationContext: c1 must be nonnegative");
  if (!(w_max0 >= 0.0)) throw InvalidArgument("ViolationContext: w_max0 must be nonnegative");
}

DistanceMap distance_map(const LinearSystem& sys, const ViolationContext& ctx) {
  return {sys.C() * sys.B(), ctx.ybar_r1 - sys.C() * (sys.A() * ctx.x0)};
}

double squared_distance(const LinearSystem& sys, const ViolationContext& ctx, const Vector& u) {
  return squared(distance_map(sys, ctx), u);
}

AdmissibleInputSet compute_admissible_set(const LinearSystem& sys, const ViolationContext& ctx) {
  ctx.validate(sys);
  const double threshold = SquaredSubstitute::threshold(ctx.c1 + ctx.w_max0);
  return classify(distance_map(sys, ctx), ctx.U_x0, enumerate_vertices(ctx.U_x0), threshold);
}

Vector find_boundary_point(const LinearSystem& sys, const ViolationContext& ctx, const Vector& u_lo,
                           const Vector& u_hi) {
  ctx.validate(sys);
  const DistanceMap dm = distance_map(sys, ctx);
  const double threshold = SquaredSubstitute::threshold(ctx.c1 + ctx.w_max0);
  if (!contains(ctx.U_x0, u_lo, kMembershipTol) || !contains(ctx.U_x0, u_hi, kMembershipTol))
    throw InvalidArgument("find_boundary_point: segment end points must lie in U_x0");
  if (!(squared(dm, u_lo) < threshold) || !(squared(dm, u_hi) >= threshold))
    throw InvalidArgument("find_boundary_point: threshold is not bracketed by the segment");
  return bisect_level_set(dm, u_lo, u_hi, threshold);
}

Vector gradient_at(const LinearSystem& sys, const ViolationContext& ctx, const Vector& p) {
  if (p.size() != sys.input_dim()) throw InvalidArgument("gradient_at: p has wrong dimension");
  const Vector residual = sys.C() * (sys.A() * ctx.x0 + sys.B() * p) - ctx.ybar_r1;
  return 2.0 * sys.B().transpose() * sys.C().transpose() * residual;
}

std::vector<Vector> sampled_general_uopt(const LinearSystem& sys, const ViolationContext& ctx,
                                         const std::function<double(const Vector&)>& prob_fn, int n_samples) {
  ctx.validate(sys);
  if (n_samples < 1) throw InvalidArgument("sampled_general_uopt: n_samples must be at least 1");
  const std::vector<Vector> vertices = enumerate_vertices(ctx.U_x0);
  if (vertices.empty()) throw Infeasible("sampled_general_uopt: U_x0 is empty");

  const auto m = ctx.U_x0.dim();
  Vector lo = vertices.front();
  Vector hi = vertices.front();
  for (const auto& v : vertices) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }

  // Vertices first (they carry the extreme distances), then Halton points.
  std::vector<Vector> candidates = vertices;
  constexpr std::array<unsigned, 3> kBases{2, 3, 5};
  const unsigned long max_draws = 1000ul * static_cast<unsigned long>(n_samples) + 1000ul;
  int accepted = 0;
  for (unsigned long i = 1; i <= max_draws && accepted < n_samples; ++i) {
    Vector u(m);
    for (Eigen::Index j = 0; j < m; ++j) u(j) = lo(j) + radical_inverse(i, kBases[static_cast<std::size_t>(j)]) * (hi(j) - lo(j));
    if (!contains(ctx.U_x0, u, 1e-12)) continue;
    candidates.push_back(std::move(u));
    ++accepted;
  }

  std::vector<double> probs;
  probs.reserve(candidates.size());
  double best = std::numeric_limits<double>::infinity();
  for (const auto& u : candidates) {
    probs.push_back(prob_fn(u));
    best = std::min(best, probs.back());
  }
  std::vector<Vector> out;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (probs[i] <= best + 1e-9) out.push_back(candidates[i]);
  }
  return out;
}

AdmissibleInputSet multi_step_admissible_set(const LinearSystem& sys, const std::vector<ViolationContext>& contexts,
                                             int l) {
  if (l < 1) throw InvalidArgument("multi_step_admissible_set: l must be at least 1");
  if (contexts.size() < static_cast<std::size_t>(l))
    throw InvalidArgument("multi_step_admissible_set: need one context per step");
  for (int j = 0; j < l; ++j) contexts[static_cast<std::size_t>(j)].validate(sys);

  const auto m = sys.input_dim();
  const auto& first = contexts.front();
  const auto& last = contexts[static_cast<std::size_t>(l - 1)];

  // y_l = C A^l x0 + sum_j C A^{l-1-j} B u_j
  DistanceMap dm{Matrix(sys.output_dim(), m * l), Vector()};
  Matrix A_pow = Matrix::Identity(sys.state_dim(), sys.state_dim());
  for (int j = l - 1; j >= 0; --j) {
    dm.M.middleCols(j * m, m) = sys.C() * A_pow * sys.B();
    A_pow = sys.A() * A_pow;
  }
  dm.b = last.ybar_r1 - sys.C() * (A_pow * first.x0);

  double w_sum = 0.0;
  std::vector<Polytope> factors;
  Polytope stacked(m * l);
  for (int j = 0; j < l; ++j) {
    const auto& ctx = contexts[static_cast<std::size_t>(j)];
    w_sum += ctx.w_max0;
    factors.push_back(ctx.U_x0);
    for (const auto& h : ctx.U_x0.halfspaces()) {
      Vector a = Vector::Zero(m * l);
      a.segment(j * m, m) = h.normal;
      stacked.add(Halfspace(std::move(a), h.offset));
    }
  }
  const double threshold = SquaredSubstitute::threshold(first.c1 + w_sum);
  return classify(dm, stacked, enumerate_product_vertices(factors), threshold);
}

bool reverse_triangle_implication_holds(const Vector& y, const Vector& ybar_r, double c, double w_max,
                                  const std::vector<Vector>& w_samples) {
  const double gap = (y - ybar_r).norm();
  if (gap < c + w_max) return true;
  for (const auto& w : w_samples) {
    // Allow a few ulp of the operands: at equality the two norms round differently.
    const double slack = 8.0 * std::numeric_limits<double>::epsilon() * (gap + w.norm() + c);
    if ((y - ybar_r - w).norm() < c - slack) return false;
  }
  return true;
}

}  // namespace cvpm
