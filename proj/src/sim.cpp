#include "cvpm/sim.hpp"

#include <algorithm>
#include <cstdlib>
#include <random>
#include <string>
#include <thread>

#include "cvpm/errors.hpp"

namespace cvpm {

namespace {

// Obstacle start in scenario 2, chosen so that the support jump finds the
// vehicle beside the obstacle.
constexpr double kScenario2ObstacleX0 = 5.3;

Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

// Road and actuator limits shared by both scenarios.
ScenarioConfig road_scenario(std::string name, const Vector& x0, double v_ref, double y_ref) {
  ScenarioConfig cfg;
  cfg.name = std::move(name);
  cfg.dt = 0.1;
  cfg.system = discretize_double_integrator(cfg.dt);
  cfg.x0 = x0;
  cfg.reference_velocity = v_ref;
  cfg.y_ref = y_ref;

  MpcConfig& mpc = cfg.mpc;
  mpc.N = 10;
  mpc.Q = Matrix::Identity(2, 2);
  mpc.R = 0.1 * Matrix::Identity(2, 2);
  mpc.P_f = riccati_terminal_weight(cfg.system, mpc.Q, mpc.R);
  mpc.input_set = Polytope::box(vec2(1.0, -3.5), vec2(9.0, 3.5));
  Polytope road(2);
  road.add(Halfspace(vec2(0.0, 1.0), 8.0));
  road.add(Halfspace(vec2(0.0, -1.0), -2.0));
  mpc.state_set = road;
  mpc.terminal_set = road;
  mpc.reference.offset = vec2(x0(0), y_ref);
  mpc.reference.rate = vec2(v_ref * cfg.dt, 0.0);

  cfg.geometry = CollisionGeometry(2.0, 0.8, TruncatedRadialGaussian(1.0, 0.15));
  cfg.obstacle.sigma = 1.0;
  return cfg;
}

}  // namespace

void ScenarioConfig::validate() const {
  if (duration_steps < 1) throw InvalidArgument("ScenarioConfig: duration_steps must be at least 1");
  if (!(dt > 0.0)) throw InvalidArgument("ScenarioConfig: dt must be positive");
  if (x0.size() != system.state_dim()) throw InvalidArgument("ScenarioConfig: x0 has wrong dimension");
  if (!(geometry.r_cv > 0.0) || !(geometry.r_r > 0.0))
    throw InvalidArgument("ScenarioConfig: collision radii must be positive");
  mpc.validate(system);
  obstacle.validate();
  if (obstacle.y_r0.size() != system.output_dim())
    throw InvalidArgument("ScenarioConfig: obstacle dimension differs from the output dimension");
}

bool ScenarioConfig::operator==(const ScenarioConfig& o) const {
  return name == o.name && system == o.system && mpc == o.mpc && obstacle == o.obstacle && geometry == o.geometry &&
         x0.size() == o.x0.size() && x0 == o.x0 && duration_steps == o.duration_steps && dt == o.dt &&
         reference_velocity == o.reference_velocity && y_ref == o.y_ref && noise == o.noise;
}

ScenarioConfig builtin_scenario_1() {
  // The vehicle starts on the upper road bound; starting at (0, 4) would put
  // it on top of the obstacle.
  ScenarioConfig cfg = road_scenario("builtin:1", vec2(0.0, 8.0), 5.0, 8.0);
  cfg.obstacle.y_r0 = vec2(0.0, 4.0);
  cfg.obstacle.u_r_schedule.entries = {{0, vec2(0.5, 0.0)}};
  cfg.obstacle.w_max_schedule.entries = {{0, 0.15}};
  cfg.duration_steps = 120;
  return cfg;
}

ScenarioConfig builtin_scenario_2() {
  ScenarioConfig cfg = road_scenario("builtin:2", vec2(0.0, 4.0), 4.0, 4.0);
  cfg.obstacle.y_r0 = vec2(kScenario2ObstacleX0, 3.0);
  cfg.obstacle.u_r_schedule.entries = {{0, vec2(0.25, 0.0)}};
  cfg.obstacle.w_max_schedule.entries = {{0, 0.15}, {30, 0.9}, {50, 0.15}};
  cfg.duration_steps = 70;
  cfg.noise = NoiseMode::kDeterministic;
  return cfg;
}

TrajectoryLog run_scenario(const ScenarioConfig& cfg, std::uint64_t seed, NoiseMode noise) {
  cfg.validate();
  TrajectoryLog log;
  log.seed = seed;
  log.scenario_name = cfg.name;
  log.records.reserve(static_cast<std::size_t>(cfg.duration_steps));

  std::mt19937_64 rng(seed);
  const double r_comb = cfg.geometry.r_comb();
  Vector x = cfg.x0;
  Vector y_r = cfg.obstacle.y_r0;
  for (long k = 0; k < cfg.duration_steps; ++k) {
    ControlDecision dec;
    try {
      dec = solve_step(cfg.system, cfg.mpc, x, cfg.obstacle, y_r, k, r_comb);
    } catch (const Infeasible& e) {
      throw Infeasible(cfg.name + " step " + std::to_string(k) + ": " + e.what());
    } catch (const NumericalFailure& e) {
      throw NumericalFailure(cfg.name + " step " + std::to_string(k) + ": " + e.what());
    }
    const TruncatedRadialGaussian dens = cfg.obstacle.density(k);
    const Vector y_nom = nominal_next_obstacle(cfg.obstacle, y_r, k);
    Vector y_next = y_nom;
    if (noise == NoiseMode::kSampled) y_next += sample_obstacle_step(dens, rng);
    const Vector x_next = cfg.system.step(x, dec.u0);
    const Vector y_veh = cfg.system.output(x_next);

    StepRecord rec;
    rec.k = k;
    rec.t = static_cast<double>(k) * cfg.dt;
    rec.x = x;
    rec.u = dec.u0;
    rec.y_r = y_r;
    rec.case_label = dec.case_label;
    rec.predicted_violation_probability = dec.predicted_violation_probability;
    rec.distance_d = (y_veh - y_nom).norm();
    rec.analytic_collision_probability = collision_probability(r_comb, dens, rec.distance_d);
    rec.true_distance = (y_veh - y_next).norm();
    rec.collided = rec.true_distance < r_comb;
    rec.w_max_active = dens.w_max;
    rec.solve_time_s = dec.solve_time.count();
    log.records.push_back(std::move(rec));

    x = x_next;
    y_r = std::move(y_next);
  }
  return log;
}

long support_jump_step(const ObstacleModel& obstacle, long duration_steps) {
  for (long k = 1; k < duration_steps; ++k) {
    if (obstacle.w_max(k) > obstacle.w_max(k - 1)) return k;
  }
  return -1;
}

unsigned monte_carlo_threads() {
  if (const char* env = std::getenv("CVPM_MC_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

MonteCarloResult monte_carlo_validation(const ScenarioConfig& cfg, long runs, std::uint64_t base_seed) {
  if (runs < 1) throw InvalidArgument("monte_carlo_validation: runs must be at least 1");
  const long jump = support_jump_step(cfg.obstacle, cfg.duration_steps);
  if (jump < 0) throw InvalidArgument("monte_carlo_validation: scenario has no support jump");

  ScenarioConfig replay = cfg;
  replay.duration_steps = jump + 1;
  const TrajectoryLog log = run_scenario(replay, 0, NoiseMode::kDeterministic);
  const StepRecord& at = log.records.back();
  const Vector y_veh = cfg.system.output(cfg.system.step(at.x, at.u));
  const Vector y_nom = nominal_next_obstacle(cfg.obstacle, at.y_r, jump);
  const TruncatedRadialGaussian dens = cfg.obstacle.density(jump);
  const double r_comb = cfg.geometry.r_comb();

  std::vector<char> hit(static_cast<std::size_t>(runs), 0);
  auto work = [&](long begin, long end) {
    for (long i = begin; i < end; ++i) {
      std::mt19937_64 rng(base_seed + static_cast<std::uint64_t>(i));
      const Vector y_next = y_nom + sample_obstacle_step(dens, rng);
      hit[static_cast<std::size_t>(i)] = (y_veh - y_next).norm() < r_comb;
    }
  };
  const long workers = std::min<long>(monte_carlo_threads(), runs);
  if (workers <= 1) {
    work(0, runs);
  } else {
    std::vector<std::thread> pool;
    const long chunk = (runs + workers - 1) / workers;
    for (long w = 0; w < workers; ++w) pool.emplace_back(work, w * chunk, std::min(runs, (w + 1) * chunk));
    for (auto& t : pool) t.join();
  }

  MonteCarloResult out;
  out.runs = runs;
  out.collisions = std::count(hit.begin(), hit.end(), 1);
  out.frequency = static_cast<double>(out.collisions) / static_cast<double>(runs);
  out.analytic_at_jump = at.analytic_collision_probability;
  out.jump_step = jump;
  out.distance_at_jump = at.distance_d;
  return out;
}

}  // namespace cvpm
