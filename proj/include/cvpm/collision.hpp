#pragma once

#include <cstdint>
#include <random>

#include "cvpm/model.hpp"

namespace cvpm {

/// Two discs (vehicle and obstacle) and the one-step obstacle density.
/// The centres collide when closer than r_comb = r_cv + r_r.
struct CollisionGeometry {
  double r_cv = 0.0;
  double r_r = 0.0;
  TruncatedRadialGaussian density;

  CollisionGeometry() = default;
  CollisionGeometry(double r_cv, double r_r, TruncatedRadialGaussian density);

  double r_comb() const { return r_cv + r_r; }
  CollisionGeometry with_w_max(double w_max) const;

  bool operator==(const CollisionGeometry&) const = default;
};

/// Half-angle at the nominal obstacle position between the line towards the
/// vehicle and an intersection point of the circles of radius w_max (around
/// the obstacle) and r_comb (around the vehicle), in [0, pi/2].
/// Requires |d - w_max| < r_comb <= d + w_max.
double intersection_half_angle(const CollisionGeometry& g, double d);

/// Distance from the nominal obstacle position to the near side of the
/// vehicle's r_comb circle along angle theta (law of cosines, smaller root).
double inner_radius(const CollisionGeometry& g, double d, double theta);

/// Probability that the obstacle centre lands within r_comb of the vehicle
/// after one step, given nominal distance d. Piecewise: 1 when the obstacle
/// disc lies inside the collision disc, 0 when it cannot reach it, otherwise
/// the density integrated over the lens by adaptive Simpson in the angle with
/// the radial integral in closed form.
double collision_probability(const CollisionGeometry& g, double d);
/// Same with the combined radius given directly.
double collision_probability(double r_comb, const TruncatedRadialGaussian& density, double d);

/// Fraction of `samples` seeded obstacle steps that end within r_comb of a
/// vehicle at distance d. Radius by inverse CDF, angle uniform.
double monte_carlo_collision_estimate(const CollisionGeometry& g, double d, std::int64_t samples,
                                      std::uint64_t seed);

/// Uniform double in [0, 1) from the top 53 bits of one engine draw. Written
/// out so results do not depend on the standard library's distributions.
inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// One draw of the obstacle step w: radius by inverse CDF, angle uniform.
Vector sample_obstacle_step(const TruncatedRadialGaussian& density, std::mt19937_64& rng);

}  // namespace cvpm
