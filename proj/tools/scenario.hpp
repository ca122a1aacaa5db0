#pragma once

// Scenario files: YAML documents describing the domain, speed model, moving
// obstacle, instruments, launch grid, and simulation and search parameters.
//
//   domain:      {center: [x, y, z], radius: R}
//   speed_field: {kind: constant, c0: 1}
//              | {kind: linear, a: 1, b: 1, c: 0, d: 1}
//              | {kind: radial, center: [x, y, z], base: 1, coeff: 0.1}
//   obstacle:
//     radius: 0.5
//     path: [{t: 0, center: [x, y, z]}, ...]       # piecewise linear
//     intervals: [[t0, t1], [t1, t2], ...]          # sampling intervals
//   transmitters: [[x, y, z], ...]
//   receivers:    [[x, y, z], ...]
//   launch_grid:  {phi: [min, max, count], theta: [min, max, count]}
//   simulation:   {max_time: 10, steps: 10000, capture_radius: 0, xi: 40000, integrator: rk4}
//   search:       {n_r: 1000, phi_steps: 16, theta_steps: 32, eps1: 0, eps2: 0, integrator: rk4}
//
// Angles accept plain numbers or multiples of pi such as "pi/2" or "3*pi/4".

#include <string>

#include "rayhop/rayhop.hpp"

namespace rayhop::cli {

// Validation failure carrying the offending file line (1-based, 0 if unknown).
class ScenarioError : public ValidationError {
 public:
  ScenarioError(const std::string& file, int line, const std::string& what)
      : ValidationError(file + (line > 0 ? ":" + std::to_string(line) : std::string()) + ": " + what),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

struct Scenario {
  SimulationSetup sim;  // field, domain, obstacle, instruments, forward-model steps
  LaunchGrid launch;
  SearchParams search;
};

Scenario load_scenario_text(const std::string& text, const std::string& name = "<scenario>");
Scenario load_scenario(const std::string& path);

// "pi/4", "3*pi/2", "-pi", "0.785" -> radians.
double parse_angle(const std::string& text);

}  // namespace rayhop::cli
