#pragma once

#include <string>

#include "cvpm/sim.hpp"

namespace cvpm {

/// JSON text with top-level keys system, mpc, obstacle, geometry and
/// simulation. Matrices are row-major nested arrays, polytopes {A, b} and
/// schedules lists of {from_step, value}.
std::string scenario_to_json(const ScenarioConfig& cfg);
/// Throws ConfigError on malformed text or schema violations.
ScenarioConfig scenario_from_json(const std::string& text);

/// "builtin:1", "builtin:2" or a path to a JSON config. Throws ConfigError.
ScenarioConfig load_scenario(const std::string& spec);

std::string to_string(NoiseMode mode);
NoiseMode parse_noise_mode(const std::string& text);

}  // namespace cvpm
