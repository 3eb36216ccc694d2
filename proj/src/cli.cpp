#include "cvpm/cli.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "cvpm/config_io.hpp"
#include "cvpm/errors.hpp"

#ifndef CVPM_VERSION
#define CVPM_VERSION "0.0.0"
#endif

namespace cvpm::cli {

namespace {

using nlohmann::json;

// printf-style formatting keeps the output independent of stream locales.
std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string g9(double v) { return fmt("%.9g", v); }

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json manifest(const std::string& command, const std::string& scenario, std::uint64_t seed,
              const std::vector<std::string>& outputs) {
  return {{"command", command},   {"scenario", scenario},      {"seed", seed},
          {"outputs", outputs},   {"version", CVPM_VERSION},   {"timestamp", utc_timestamp()}};
}

void write_trajectory(const std::string& path, const TrajectoryLog& log, const json& man) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write '" + path + "'");
  f << "# manifest: " << man.dump() << "\n" << trajectory_csv_header() << "\n";
  for (const auto& r : log.records) {
    f << r.k << ',' << g9(r.t) << ',' << g9(r.x(0)) << ',' << g9(r.x(1)) << ',' << g9(r.u(0)) << ','
      << g9(r.u(1)) << ',' << g9(r.y_r(0)) << ',' << g9(r.y_r(1)) << ',' << to_string(r.case_label) << ','
      << g9(r.predicted_violation_probability) << ',' << g9(r.analytic_collision_probability) << ','
      << g9(r.distance_d) << ',' << g9(r.w_max_active) << ',' << (r.collided ? 1 : 0) << "\n";
  }
  if (!f) throw ConfigError("failed writing '" + path + "'");
}

struct RunArgs {
  std::string scenario = "builtin:1";
  std::uint64_t seed = 0;
  std::string noise;
  std::string out = "trajectory.csv";
};

struct MonteCarloArgs {
  std::string scenario = "builtin:2";
  long runs = 2000;
  std::uint64_t seed = 1;
  std::string out = "montecarlo_summary.json";
};

struct ProbabilityArgs {
  double d = 0.0;
  double rcv = 2.0;
  double rr = 0.8;
  double wmax = 0.9;
  double sigma = 1.0;
  std::string sweep;
};

int cmd_run(const RunArgs& a, std::ostream& out) {
  const ScenarioConfig cfg = load_scenario(a.scenario);
  if (cfg.x0.size() != 2 || cfg.system.input_dim() != 2 || cfg.system.output_dim() != 2)
    throw ConfigError("trajectory export needs n = m = q = 2");
  const NoiseMode noise = a.noise.empty() ? cfg.noise : parse_noise_mode(a.noise);
  const TrajectoryLog log = run_scenario(cfg, a.seed, noise);
  json man = manifest("run", a.scenario, a.seed, {a.out});
  man["noise"] = to_string(noise);
  write_trajectory(a.out, log, man);
  out << "wrote " << log.records.size() << " records to " << a.out << "\n";
  return kExitOk;
}

int cmd_montecarlo(const MonteCarloArgs& a, std::ostream& out) {
  if (a.runs < 1) throw ConfigError("--runs must be at least 1");
  const ScenarioConfig cfg = load_scenario(a.scenario);
  const MonteCarloResult r = monte_carlo_validation(cfg, a.runs, a.seed);
  json summary = {{"manifest", manifest("montecarlo", a.scenario, a.seed, {a.out})},
                  {"runs", r.runs},
                  {"collisions", r.collisions},
                  {"frequency", r.frequency},
                  {"analytic", r.analytic_at_jump},
                  {"jump_step", r.jump_step},
                  {"distance_at_jump", r.distance_at_jump}};
  std::ofstream f(a.out);
  if (!f) throw ConfigError("cannot write '" + a.out + "'");
  f << summary.dump(2) << "\n";
  out << "runs=" << r.runs << " collisions=" << r.collisions << " frequency=" << fmt("%.6f", r.frequency)
      << " analytic=" << fmt("%.6f", r.analytic_at_jump) << "\n";
  return kExitOk;
}

int cmd_probability(const ProbabilityArgs& a, std::ostream& out) {
  if (!(a.rcv > 0.0) || !(a.rr > 0.0)) throw ConfigError("--rcv and --rr must be positive");
  if (!(a.wmax >= 0.0) || !(a.sigma > 0.0)) throw ConfigError("--wmax must be nonnegative and --sigma positive");
  const CollisionGeometry g(a.rcv, a.rr, TruncatedRadialGaussian(a.sigma, a.wmax));
  if (a.sweep.empty()) {
    if (!(a.d >= 0.0)) throw ConfigError("--d must be nonnegative");
    out << fmt("%.6f", collision_probability(g, a.d)) << "\n";
    return kExitOk;
  }
  double d0 = 0.0;
  double d1 = 0.0;
  long n = 0;
  char tail = 0;
  if (std::sscanf(a.sweep.c_str(), "%lf:%lf:%ld%c", &d0, &d1, &n, &tail) != 3 || n < 1 || !(d0 >= 0.0) ||
      !(d1 >= d0))
    throw ConfigError("--sweep expects d0:d1:n with 0 <= d0 <= d1 and n >= 1");
  out << "d,probability\n";
  for (long i = 0; i < n; ++i) {
    const double d = n == 1 ? d0 : d0 + (d1 - d0) * static_cast<double>(i) / static_cast<double>(n - 1);
    out << g9(d) << ',' << fmt("%.6f", collision_probability(g, d)) << "\n";
  }
  return kExitOk;
}

}  // namespace

std::string trajectory_csv_header() {
  return "k,t,x1,x2,u1,u2,yr1,yr2,case,p_cv_pred,p_col_analytic,d,w_max,collided";
}

int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Collision-probability-minimizing MPC simulator", "cvpm"};
  app.set_version_flag("--version", CVPM_VERSION);
  std::string dump_config;
  app.add_option("--dump-config", dump_config, "Print a scenario (builtin:1, builtin:2 or a path) as JSON");

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "Closed-loop simulation, writes a trajectory CSV");
  run->add_option("--scenario", run_args.scenario, "builtin:1, builtin:2 or a JSON config path");
  run->add_option("--seed", run_args.seed, "Noise seed");
  run->add_option("--noise", run_args.noise, "deterministic or sampled (default from the scenario)");
  run->add_option("--out", run_args.out, "Trajectory CSV path");

  MonteCarloArgs mc_args;
  auto* mc = app.add_subcommand("montecarlo", "Sample the obstacle step at the support jump");
  mc->add_option("--runs", mc_args.runs, "Number of runs");
  mc->add_option("--seed", mc_args.seed, "Base seed; run i uses seed + i");
  mc->add_option("--scenario", mc_args.scenario, "Scenario with a support jump");
  mc->add_option("--out", mc_args.out, "Summary JSON path");

  ProbabilityArgs p_args;
  auto* prob = app.add_subcommand("probability", "Analytic one-step collision probability");
  prob->add_option("--d", p_args.d, "Nominal distance between centres");
  prob->add_option("--rcv", p_args.rcv, "Vehicle radius");
  prob->add_option("--rr", p_args.rr, "Obstacle radius");
  prob->add_option("--wmax", p_args.wmax, "Support radius of the obstacle step");
  prob->add_option("--sigma", p_args.sigma, "Gaussian scale of the radial density");
  prob->add_option("--sweep", p_args.sweep, "d0:d1:n, emit a CSV over n distances");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o;
    std::ostringstream e2;
    const int code = app.exit(e, o, e2);
    out << o.str();
    err << e2.str();
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (!dump_config.empty()) {
      out << scenario_to_json(load_scenario(dump_config));
      return kExitOk;
    }
    if (run->parsed()) return cmd_run(run_args, out);
    if (mc->parsed()) return cmd_montecarlo(mc_args, out);
    if (prob->parsed()) return cmd_probability(p_args, out);
    err << app.help();
    return kExitConfig;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const InvalidArgument& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const Infeasible& e) {
    err << "solver failure: " << e.what() << "\n";
    return kExitSolver;
  } catch (const NumericalFailure& e) {
    err << "solver failure: " << e.what() << "\n";
    return kExitSolver;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInternal;
  }
}

}  // namespace cvpm::cli
