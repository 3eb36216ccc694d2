#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>

#include "cvpm/admissible_set.hpp"
#include "cvpm/collision.hpp"
#include "cvpm/config_io.hpp"
#include "cvpm/errors.hpp"
#include "cvpm/mpc.hpp"
#include "cvpm/sim.hpp"

namespace py = pybind11;
using namespace cvpm;

namespace {

ScenarioConfig scenario_arg(const std::string& spec) {
  // Inline JSON is accepted as well as builtin names and file paths.
  if (!spec.empty() && spec.front() == '{') return scenario_from_json(spec);
  return load_scenario(spec);
}

py::dict trajectory_dict(const TrajectoryLog& log) {
  const auto n = static_cast<Eigen::Index>(log.records.size());
  Eigen::VectorXi k(n), collided(n);
  Vector t(n), p_pred(n), p_col(n), d(n), w(n), solve(n);
  Matrix x(n, 2), u(n, 2), y_r(n, 2);
  py::list cases;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = log.records[static_cast<std::size_t>(i)];
    k(i) = static_cast<int>(r.k);
    t(i) = r.t;
    x.row(i) = r.x.transpose();
    u.row(i) = r.u.transpose();
    y_r.row(i) = r.y_r.transpose();
    cases.append(std::string(to_string(r.case_label)));
    p_pred(i) = r.predicted_violation_probability;
    p_col(i) = r.analytic_collision_probability;
    d(i) = r.distance_d;
    w(i) = r.w_max_active;
    collided(i) = r.collided ? 1 : 0;
    solve(i) = r.solve_time_s;
  }
  py::dict out;
  out["scenario"] = log.scenario_name;
  out["seed"] = log.seed;
  out["k"] = k;
  out["t"] = t;
  out["x"] = x;
  out["u"] = u;
  out["y_r"] = y_r;
  out["case"] = cases;
  out["p_cv_pred"] = p_pred;
  out["p_col_analytic"] = p_col;
  out["d"] = d;
  out["w_max"] = w;
  out["collided"] = collided;
  out["solve_time_s"] = solve;
  return out;
}

py::dict admissible_dict(const AdmissibleInputSet& s) {
  py::dict out;
  out["case"] = std::string(to_string(s.label));
  out["h_min"] = s.h_min;
  out["h_max"] = s.h_max;
  out["threshold"] = s.threshold;
  out["u_min"] = s.u_min;
  out["u_max"] = s.u_max;
  if (const auto* c1 = std::get_if<Case1Full>(&s.variant)) {
    out["A"] = c1->set.normals();
    out["b"] = c1->set.offsets();
  } else if (const auto* c3 = std::get_if<Case3Restricted>(&s.variant)) {
    out["A"] = c3->set.normals();
    out["b"] = c3->set.offsets();
    out["p"] = c3->p;
  } else {
    out["u"] = std::get<Case2Singleton>(s.variant).u;
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Constraint-violation-probability-minimizing MPC for collision avoidance";

  static py::exception<Infeasible> infeasible(m, "InfeasibleError", PyExc_RuntimeError);
  static py::exception<NumericalFailure> numerical(m, "NumericalError", PyExc_RuntimeError);
  static py::exception<ConfigError> config(m, "ConfigError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const InvalidArgument& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    } catch (const Infeasible& e) {
      PyErr_SetString(infeasible.ptr(), e.what());
    } catch (const NumericalFailure& e) {
      PyErr_SetString(numerical.ptr(), e.what());
    } catch (const ConfigError& e) {
      PyErr_SetString(config.ptr(), e.what());
    }
  });

  m.def(
      "collision_probability",
      [](double d, double r_cv, double r_r, double w_max, double sigma) {
        return collision_probability(CollisionGeometry(r_cv, r_r, TruncatedRadialGaussian(sigma, w_max)), d);
      },
      py::arg("d"), py::arg("r_cv") = 2.0, py::arg("r_r") = 0.8, py::arg("w_max") = 0.9, py::arg("sigma") = 1.0,
      "Probability that the obstacle step brings the discs closer than r_cv + r_r.");

  m.def(
      "monte_carlo_collision_estimate",
      [](double d, std::int64_t samples, std::uint64_t seed, double r_cv, double r_r, double w_max, double sigma) {
        py::gil_scoped_release release;
        return monte_carlo_collision_estimate(CollisionGeometry(r_cv, r_r, TruncatedRadialGaussian(sigma, w_max)),
                                              d, samples, seed);
      },
      py::arg("d"), py::arg("samples"), py::arg("seed") = 0, py::arg("r_cv") = 2.0, py::arg("r_r") = 0.8,
      py::arg("w_max") = 0.9, py::arg("sigma") = 1.0);

  m.def(
      "scenario_json", [](const std::string& spec) { return scenario_to_json(scenario_arg(spec)); },
      py::arg("scenario") = "builtin:1", "Scenario as JSON; accepts builtin:1, builtin:2, a path or inline JSON.");

  m.def(
      "run_scenario",
      [](const std::string& spec, std::uint64_t seed, std::optional<std::string> noise) {
        const ScenarioConfig cfg = scenario_arg(spec);
        const NoiseMode mode = noise ? parse_noise_mode(*noise) : cfg.noise;
        TrajectoryLog log;
        {
          py::gil_scoped_release release;
          log = run_scenario(cfg, seed, mode);
        }
        return trajectory_dict(log);
      },
      py::arg("scenario") = "builtin:1", py::arg("seed") = 0, py::arg("noise") = py::none(),
      "Closed-loop rollout; returns per-step arrays.");

  m.def(
      "monte_carlo_validation",
      [](const std::string& spec, long runs, std::uint64_t seed) {
        const ScenarioConfig cfg = scenario_arg(spec);
        MonteCarloResult r;
        {
          py::gil_scoped_release release;
          r = monte_carlo_validation(cfg, runs, seed);
        }
        py::dict out;
        out["runs"] = r.runs;
        out["collisions"] = r.collisions;
        out["frequency"] = r.frequency;
        out["analytic"] = r.analytic_at_jump;
        out["jump_step"] = r.jump_step;
        out["distance"] = r.distance_at_jump;
        return out;
      },
      py::arg("scenario") = "builtin:2", py::arg("runs") = 2000, py::arg("seed") = 1);

  m.def(
      "compute_admissible_set",
      [](const Matrix& A, const Matrix& B, const Matrix& C, const Vector& x0, const Vector& ybar_r1, double c1,
         double w_max, const Matrix& U_A, const Vector& U_b) {
        const LinearSystem sys(A, B, C);
        const ViolationContext ctx{x0, ybar_r1, c1, w_max, Polytope::from_matrix(U_A, U_b)};
        return admissible_dict(compute_admissible_set(sys, ctx));
      },
      py::arg("A"), py::arg("B"), py::arg("C"), py::arg("x0"), py::arg("ybar_r1"), py::arg("c1"), py::arg("w_max"),
      py::arg("U_A"), py::arg("U_b"),
      "Classifies the step and returns the tightened input set {u : U_A u <= U_b}.");

  m.def(
      "solve_step",
      [](const std::string& spec, const Vector& x0, const Vector& y_r, long k) {
        const ScenarioConfig cfg = scenario_arg(spec);
        const ControlDecision dec = solve_step(cfg.system, cfg.mpc, x0, cfg.obstacle, y_r, k, cfg.geometry.r_comb());
        py::dict out;
        out["u0"] = dec.u0;
        out["case"] = std::string(to_string(dec.case_label));
        out["cost"] = dec.cost;
        out["p_cv_pred"] = dec.predicted_violation_probability;
        out["predicted_distance"] = dec.predicted_distance;
        out["threshold"] = dec.threshold;
        return out;
      },
      py::arg("scenario"), py::arg("x0"), py::arg("y_r"), py::arg("k") = 0,
      "One MPC step of the scenario's controller at state x0 with the obstacle at y_r.");

  m.def(
      "riccati_terminal_weight",
      [](const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R) {
        return riccati_terminal_weight(LinearSystem(A, B, Matrix::Identity(A.rows(), A.rows())), Q, R);
      },
      py::arg("A"), py::arg("B"), py::arg("Q"), py::arg("R"));
}
