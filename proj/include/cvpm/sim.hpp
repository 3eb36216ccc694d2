#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cvpm/collision.hpp"
#include "cvpm/mpc.hpp"

namespace cvpm {

enum class NoiseMode { kDeterministic, kSampled };

struct ScenarioConfig {
  std::string name;
  LinearSystem system{Matrix::Identity(2, 2), Matrix::Identity(2, 2), Matrix::Identity(2, 2)};
  MpcConfig mpc;
  ObstacleModel obstacle;
  /// Radii of vehicle and obstacle. Its density is ignored: the obstacle model
  /// supplies sigma and the current support.
  CollisionGeometry geometry;
  Vector x0;
  long duration_steps = 1;
  double dt = 0.1;
  double reference_velocity = 0.0;
  double y_ref = 0.0;
  NoiseMode noise = NoiseMode::kSampled;  ///< default when the caller does not choose

  void validate() const;
  bool operator==(const ScenarioConfig& other) const;
};

/// Record k holds the state and input at step k and the outcome of that input
/// at step k + 1: nominal distance, analytic collision probability for the
/// nominal obstacle position and whether the true obstacle collides.
struct StepRecord {
  long k = 0;
  double t = 0.0;
  Vector x;
  Vector u;
  Vector y_r;
  CaseLabel case_label = CaseLabel::kCase1;
  double predicted_violation_probability = 0.0;
  double analytic_collision_probability = 0.0;
  double distance_d = 0.0;       ///< to the nominal obstacle position at k + 1
  double true_distance = 0.0;    ///< to the realized obstacle position at k + 1
  double w_max_active = 0.0;
  bool collided = false;
  double solve_time_s = 0.0;
};

struct TrajectoryLog {
  std::vector<StepRecord> records;
  std::uint64_t seed = 0;
  std::string scenario_name;
};

/// Vehicle on the upper road bound, obstacle in the lane below at the same
/// x-position with the same speed as the reference.
ScenarioConfig builtin_scenario_1();
/// Vehicle overtaking a slower obstacle whose support jumps from 0.15 to 0.9
/// for two seconds.
ScenarioConfig builtin_scenario_2();

/// Closed-loop rollout. The controller sees the true obstacle position and the
/// current support; the obstacle moves by its drift plus sampled or zero noise.
/// Solver errors are rethrown with the step attached.
TrajectoryLog run_scenario(const ScenarioConfig& cfg, std::uint64_t seed, NoiseMode noise);

/// First step at which the support of the obstacle step grows, or -1.
long support_jump_step(const ObstacleModel& obstacle, long duration_steps);

struct MonteCarloResult {
  long runs = 0;
  long collisions = 0;
  double frequency = 0.0;
  double analytic_at_jump = 0.0;
  long jump_step = -1;
  double distance_at_jump = 0.0;
};

/// Replays the scenario without noise up to the support jump, then draws one
/// obstacle step per run (seed base_seed + i) and counts collisions at the
/// next step. Worker threads are capped by CVPM_MC_THREADS; the result does
/// not depend on the thread count.
MonteCarloResult monte_carlo_validation(const ScenarioConfig& cfg, long runs, std::uint64_t base_seed);

/// Worker count from CVPM_MC_THREADS, else the hardware concurrency.
unsigned monte_carlo_threads();

}  // namespace cvpm
