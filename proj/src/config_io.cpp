#include "cvpm/config_io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

#include "cvpm/errors.hpp"

namespace cvpm {

using nlohmann::json;

namespace {

json mat_to_json(const Matrix& M) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vec_to_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Vector vec_from_json(const json& j, const char* what) {
  if (!j.is_array()) throw ConfigError(std::string(what) + ": expected an array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ConfigError(std::string(what) + ": expected numbers");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

Matrix mat_from_json(const json& j, const char* what) {
  if (!j.is_array() || j.empty()) throw ConfigError(std::string(what) + ": expected a nonempty array of rows");
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  if (cols == 0) throw ConfigError(std::string(what) + ": rows must be nonempty arrays");
  Matrix M(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    const Vector row = vec_from_json(j[r], what);
    if (static_cast<std::size_t>(row.size()) != cols) throw ConfigError(std::string(what) + ": ragged rows");
    M.row(static_cast<Eigen::Index>(r)) = row.transpose();
  }
  return M;
}

json poly_to_json(const Polytope& P) {
  return {{"dim", P.dim()}, {"A", P.size() ? mat_to_json(P.normals()) : json::array()}, {"b", vec_to_json(P.offsets())}};
}

Polytope poly_from_json(const json& j, const char* what) {
  const auto dim = j.at("dim").get<Eigen::Index>();
  const Vector b = vec_from_json(j.at("b"), what);
  if (b.size() == 0) return Polytope(dim);
  const Matrix A = mat_from_json(j.at("A"), what);
  if (A.cols() != dim) throw ConfigError(std::string(what) + ": A has the wrong number of columns");
  return Polytope::from_matrix(A, b);
}

const json& section(const json& root, const char* key) {
  if (!root.contains(key) || !root[key].is_object()) throw ConfigError(std::string("missing section '") + key + "'");
  return root[key];
}

}  // namespace

std::string to_string(NoiseMode mode) { return mode == NoiseMode::kSampled ? "sampled" : "deterministic"; }

NoiseMode parse_noise_mode(const std::string& text) {
  if (text == "sampled") return NoiseMode::kSampled;
  if (text == "deterministic") return NoiseMode::kDeterministic;
  throw ConfigError("noise mode must be 'deterministic' or 'sampled', got '" + text + "'");
}

std::string scenario_to_json(const ScenarioConfig& cfg) {
  json root;
  root["system"] = {{"A", mat_to_json(cfg.system.A())}, {"B", mat_to_json(cfg.system.B())},
                    {"C", mat_to_json(cfg.system.C())}};
  root["mpc"] = {{"N", cfg.mpc.N},
                 {"Q", mat_to_json(cfg.mpc.Q)},
                 {"R", mat_to_json(cfg.mpc.R)},
                 {"P_f", mat_to_json(cfg.mpc.P_f)},
                 {"input_set", poly_to_json(cfg.mpc.input_set)},
                 {"state_set", poly_to_json(cfg.mpc.state_set)},
                 {"terminal_set", poly_to_json(cfg.mpc.terminal_set)},
                 {"reference", {{"offset", vec_to_json(cfg.mpc.reference.offset)},
                                {"rate", vec_to_json(cfg.mpc.reference.rate)}}}};
  json u_r = json::array();
  for (const auto& e : cfg.obstacle.u_r_schedule.entries)
    u_r.push_back({{"from_step", e.from_step}, {"value", vec_to_json(e.value)}});
  json w_max = json::array();
  for (const auto& e : cfg.obstacle.w_max_schedule.entries)
    w_max.push_back({{"from_step", e.from_step}, {"value", e.value}});
  root["obstacle"] = {{"y_r0", vec_to_json(cfg.obstacle.y_r0)},
                      {"u_r_schedule", u_r},
                      {"w_max_schedule", w_max},
                      {"sigma", cfg.obstacle.sigma}};
  root["geometry"] = {{"r_cv", cfg.geometry.r_cv},
                      {"r_r", cfg.geometry.r_r},
                      {"sigma", cfg.geometry.density.sigma},
                      {"w_max", cfg.geometry.density.w_max}};
  root["simulation"] = {{"name", cfg.name},
                        {"x0", vec_to_json(cfg.x0)},
                        {"duration_steps", cfg.duration_steps},
                        {"dt", cfg.dt},
                        {"reference_velocity", cfg.reference_velocity},
                        {"y_ref", cfg.y_ref},
                        {"noise", to_string(cfg.noise)}};
  return root.dump(2) + "\n";
}

ScenarioConfig scenario_from_json(const std::string& text) {
  try {
    const json root = json::parse(text);
    if (!root.is_object()) throw ConfigError("config must be a JSON object");
    ScenarioConfig cfg;

    const json& sys = section(root, "system");
    cfg.system = LinearSystem(mat_from_json(sys.at("A"), "system.A"), mat_from_json(sys.at("B"), "system.B"),
                              mat_from_json(sys.at("C"), "system.C"));

    const json& mpc = section(root, "mpc");
    cfg.mpc.N = mpc.at("N").get<int>();
    cfg.mpc.Q = mat_from_json(mpc.at("Q"), "mpc.Q");
    cfg.mpc.R = mat_from_json(mpc.at("R"), "mpc.R");
    cfg.mpc.P_f = mat_from_json(mpc.at("P_f"), "mpc.P_f");
    cfg.mpc.input_set = poly_from_json(mpc.at("input_set"), "mpc.input_set");
    cfg.mpc.state_set = poly_from_json(mpc.at("state_set"), "mpc.state_set");
    cfg.mpc.terminal_set = poly_from_json(mpc.at("terminal_set"), "mpc.terminal_set");
    cfg.mpc.reference.offset = vec_from_json(mpc.at("reference").at("offset"), "mpc.reference.offset");
    cfg.mpc.reference.rate = vec_from_json(mpc.at("reference").at("rate"), "mpc.reference.rate");

    const json& obs = section(root, "obstacle");
    cfg.obstacle.y_r0 = vec_from_json(obs.at("y_r0"), "obstacle.y_r0");
    for (const auto& e : obs.at("u_r_schedule"))
      cfg.obstacle.u_r_schedule.entries.push_back(
          {e.at("from_step").get<long>(), vec_from_json(e.at("value"), "obstacle.u_r_schedule")});
    for (const auto& e : obs.at("w_max_schedule"))
      cfg.obstacle.w_max_schedule.entries.push_back({e.at("from_step").get<long>(), e.at("value").get<double>()});
    cfg.obstacle.sigma = obs.value("sigma", 1.0);

    const json& geo = section(root, "geometry");
    cfg.geometry = CollisionGeometry(
        geo.at("r_cv").get<double>(), geo.at("r_r").get<double>(),
        TruncatedRadialGaussian(geo.value("sigma", cfg.obstacle.sigma), geo.value("w_max", 0.0)));

    const json& sim = section(root, "simulation");
    cfg.name = sim.value("name", std::string("config"));
    cfg.x0 = vec_from_json(sim.at("x0"), "simulation.x0");
    cfg.duration_steps = sim.at("duration_steps").get<long>();
    cfg.dt = sim.at("dt").get<double>();
    cfg.reference_velocity = sim.value("reference_velocity", 0.0);
    cfg.y_ref = sim.value("y_ref", 0.0);
    cfg.noise = parse_noise_mode(sim.value("noise", std::string("sampled")));

    cfg.validate();
    return cfg;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

ScenarioConfig load_scenario(const std::string& spec) {
  if (spec == "builtin:1") return builtin_scenario_1();
  if (spec == "builtin:2") return builtin_scenario_2();
  if (spec.rfind("builtin:", 0) == 0) throw ConfigError("unknown builtin scenario '" + spec + "'");
  std::ifstream in(spec);
  if (!in) throw ConfigError("cannot read config file '" + spec + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return scenario_from_json(buf.str());
}

}  // namespace cvpm
