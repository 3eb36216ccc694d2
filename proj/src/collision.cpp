#include "cvpm/collision.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "cvpm/errors.hpp"

namespace cvpm {

namespace {

constexpr double kClampWindow = 1e-12;
constexpr double kQuadTol = 1e-7;
// Distances this close to the safety distance count as reaching it, so a
// vehicle held exactly on the boundary by the solver logs probability 0.
constexpr double kSeamTol = 1e-9;

double simpson(double fa, double fm, double fb, double a, double b) { return (b - a) / 6.0 * (fa + 4.0 * fm + fb); }

template <typename F>
double adaptive_simpson(const F& f, double a, double b, double fa, double fm, double fb, double whole, double eps,
                        int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = simpson(fa, flm, fm, a, m);
  const double right = simpson(fm, frm, fb, m, b);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * eps) return left + right + delta / 15.0;
  return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1);
}

template <typename F>
double integrate(const F& f, double a, double b, double eps) {
  if (!(b > a)) return 0.0;
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  return adaptive_simpson(f, a, b, fa, fm, fb, simpson(fa, fm, fb, a, b), eps, 50);
}

}  // namespace

CollisionGeometry::CollisionGeometry(double r_cv_, double r_r_, TruncatedRadialGaussian density_)
    : r_cv(r_cv_), r_r(r_r_), density(density_) {
  if (!(r_cv > 0.0) || !(r_r > 0.0)) throw InvalidArgument("CollisionGeometry: radii must be positive");
}

CollisionGeometry CollisionGeometry::with_w_max(double w_max) const {
  CollisionGeometry g = *this;
  g.density = TruncatedRadialGaussian(density.sigma, w_max);
  return g;
}

double intersection_half_angle(const CollisionGeometry& g, double d) {
  const double R = g.r_comb();
  const double w = g.density.w_max;
  if (!(d > 0.0) || !(w > 0.0)) throw InvalidArgument("intersection_half_angle: d and w_max must be positive");
  if (!(std::abs(d - w) < R + kClampWindow) || !(R <= d + w + kClampWindow))
    throw InvalidArgument("intersection_half_angle: circles do not intersect at d = " + std::to_string(d));
  const double k = d * d - R * R + w * w;
  const double radicand = std::max(0.0, 4.0 * d * d * w * w - k * k);
  const double a = std::sqrt(radicand) / d;
  double arg = a / (2.0 * w);
  if (arg > 1.0 && arg <= 1.0 + kClampWindow) arg = 1.0;
  return std::asin(arg);
}

double inner_radius(const CollisionGeometry& g, double d, double theta) {
  const double R = g.r_comb();
  const double two_d_cos = 2.0 * d * std::cos(theta);
  double radicand = two_d_cos * two_d_cos - 4.0 * (d * d - R * R);
  if (radicand < -kClampWindow) throw InvalidArgument("inner_radius: theta beyond the intersection angle");
  radicand = std::max(0.0, radicand);
  return 0.5 * (two_d_cos - std::sqrt(radicand));
}

double collision_probability(const CollisionGeometry& g, double d) {
  return collision_probability(g.r_comb(), g.density, d);
}

double collision_probability(double R, const TruncatedRadialGaussian& dens, double d) {
  if (!(d >= 0.0)) throw InvalidArgument("collision_probability: d must be nonnegative");
  if (!(R > 0.0)) throw InvalidArgument("collision_probability: r_comb must be positive");
  const double w = dens.w_max;
  if (d + w < R) return 1.0;
  if (d - w >= R - kSeamTol) return 0.0;

  // Obstacle step in polar coordinates (r, theta) around the nominal obstacle
  // position, theta measured from the direction to the vehicle. Along each
  // ray the collision disc occupies r in [r-, r+] with
  // r+- = d cos(theta) +- sqrt(R^2 - d^2 sin^2(theta)); the radial integral of
  // the truncated density is a CDF difference and the angle is uniform.
  auto integrand = [&](double theta) {
    const double s = d * std::sin(theta);
    const double rad = R * R - s * s;
    if (rad < 0.0) return 0.0;
    const double root = std::sqrt(rad);
    const double c = d * std::cos(theta);
    const double lo = std::max(0.0, c - root);
    const double hi = std::min(w, c + root);
    return hi > lo ? dens.cdf(hi) - dens.cdf(lo) : 0.0;
  };

  // Split at the kinks: where the support circle meets the collision circle
  // and where rays become tangent to the collision circle.
  std::vector<double> breaks{0.0, std::numbers::pi};
  const double cos_int = (d * d + w * w - R * R) / (2.0 * d * w);
  if (d > 0.0 && std::abs(cos_int) < 1.0) breaks.push_back(std::acos(cos_int));
  if (d > R) breaks.push_back(std::asin(R / d));
  std::sort(breaks.begin(), breaks.end());

  const double eps = kQuadTol * std::numbers::pi / static_cast<double>(breaks.size() - 1);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) total += integrate(integrand, breaks[i], breaks[i + 1], eps);
  const double p = total / std::numbers::pi;
  if (!(p >= -1e-9 && p <= 1.0 + 1e-9))
    throw NumericalFailure("collision_probability: quadrature left [0, 1]: " + std::to_string(p));
  return std::clamp(p, 0.0, 1.0);
}

Vector sample_obstacle_step(const TruncatedRadialGaussian& density, std::mt19937_64& rng) {
  const double r = density.w_max > 0.0 ? density.quantile(uniform01(rng)) : 0.0;
  const double phi = 2.0 * std::numbers::pi * uniform01(rng);
  Vector w(2);
  w << r * std::cos(phi), r * std::sin(phi);
  return w;
}

double monte_carlo_collision_estimate(const CollisionGeometry& g, double d, std::int64_t samples,
                                      std::uint64_t seed) {
  if (samples < 1) throw InvalidArgument("monte_carlo_collision_estimate: samples must be at least 1");
  std::mt19937_64 rng(seed);
  const double R2 = g.r_comb() * g.r_comb();
  std::int64_t hits = 0;
  for (std::int64_t i = 0; i < samples; ++i) {
    const Vector w = sample_obstacle_step(g.density, rng);
    const double dx = w(0) - d;
    if (dx * dx + w(1) * w(1) < R2) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(samples);
}

}  // namespace cvpm
