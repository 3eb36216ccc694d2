"""Collision-avoidance MPC that minimizes the probability of constraint violation."""

from ._core import (
    ConfigError,
    InfeasibleError,
    NumericalError,
    collision_probability,
    compute_admissible_set,
    monte_carlo_collision_estimate,
    monte_carlo_validation,
    riccati_terminal_weight,
    run_scenario,
    scenario_json,
    solve_step,
)

__all__ = [
    "ConfigError",
    "InfeasibleError",
    "NumericalError",
    "collision_probability",
    "compute_admissible_set",
    "monte_carlo_collision_estimate",
    "monte_carlo_validation",
    "riccati_terminal_weight",
    "run_scenario",
    "scenario_json",
    "solve_step",
]
