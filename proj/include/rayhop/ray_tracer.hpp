#pragma once

// Initial-value ray tracing in a variable speed-of-sound medium.
//
// The ray is parameterised by travel time t. The state is the position and
// the direction of propagation given as an incident angle phi (from +z) and
// an azimuth theta (of the xy projection, from +x):
//
//   dx/dt     = c sin(phi) cos(theta)
//   dy/dt     = c sin(phi) sin(theta)
//   dz/dt     = c cos(phi)
//   dphi/dt   = -cos(phi) (c_x cos(theta) + c_y sin(theta)) + c_z sin(phi)
//   dtheta/dt = (c_x sin(theta) - c_y cos(theta)) / sin(phi)
//
// Integration is fixed-step, so candidate points live on a uniform time grid.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "rayhop/domain.hpp"
#include "rayhop/errors.hpp"
#include "rayhop/speed_field.hpp"
#include "rayhop/vec3.hpp"

namespace rayhop {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// States with |sin(phi)| below this are rejected.
inline constexpr double kPoleThreshold = 1e-9;

enum class Integrator { Euler, RK4 };

inline const char* to_string(Integrator m) { return m == Integrator::Euler ? "euler" : "rk4"; }

struct RayState {
  Vec3 pos;
  double phi = std::numbers::pi / 2;
  double theta = 0.0;
  double t = 0.0;
};

struct RayDerivative {
  Vec3 velocity;
  double dphi = 0.0;
  double dtheta = 0.0;
};

// Unit propagation direction for the given angles.
inline Vec3 direction_from_angles(double phi, double theta) {
  const double sp = std::sin(phi);
  return {sp * std::cos(theta), sp * std::sin(theta), std::cos(phi)};
}

inline double wrap_azimuth(double theta) {
  double w = std::fmod(theta, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  if (w >= kTwoPi) w = 0.0;
  return w;
}

struct Angles {
  double phi = 0.0;
  double theta = 0.0;
};

// Inverse of direction_from_angles; d need not be normalised.
inline Angles angles_from_direction(const Vec3& d) {
  const double n = norm(d);
  const double cz = std::clamp(d.z / n, -1.0, 1.0);
  return {std::acos(cz), wrap_azimuth(std::atan2(d.y, d.x))};
}

// Brings phi back into [0, pi] (flipping the azimuth) and theta into [0, 2pi).
// The represented direction is unchanged.
inline void canonicalize_angles(double& phi, double& theta) {
  phi = std::fmod(phi, kTwoPi);
  if (phi < 0.0) phi += kTwoPi;
  if (phi > std::numbers::pi) {
    phi = kTwoPi - phi;
    theta += std::numbers::pi;
  }
  theta = wrap_azimuth(theta);
}

inline RayDerivative derivative(const SpeedField& field, const RayState& s) {
  const double sp = std::sin(s.phi);
  if (std::abs(sp) < kPoleThreshold) {
    throw PolarSingularity("ray direction too close to the z axis (phi = " + std::to_string(s.phi) +
                           ")");
  }
  const double cp = std::cos(s.phi);
  const double st = std::sin(s.theta);
  const double ct = std::cos(s.theta);
  const double c = field.eval(s.pos);
  const Vec3 g = field.grad(s.pos);

  RayDerivative d;
  d.velocity = {c * sp * ct, c * sp * st, c * cp};
  d.dphi = -cp * (g.x * ct + g.y * st) + g.z * sp;
  d.dtheta = (g.x * st - g.y * ct) / sp;
  return d;
}

namespace detail {

inline RayState advance(const RayState& s, const RayDerivative& d, double h) {
  RayState out;
  out.pos = s.pos + h * d.velocity;
  out.phi = s.phi + h * d.dphi;
  out.theta = s.theta + h * d.dtheta;
  out.t = s.t;
  return out;
}

}  // namespace detail

// Advances the state by h. Time is accumulated as t + h.
inline RayState step(const SpeedField& field, const RayState& s, double h, Integrator method) {
  RayState out;
  if (method == Integrator::Euler) {
    out = detail::advance(s, derivative(field, s), h);
  } else {
    const RayDerivative k1 = derivative(field, s);
    const RayDerivative k2 = derivative(field, detail::advance(s, k1, 0.5 * h));
    const RayDerivative k3 = derivative(field, detail::advance(s, k2, 0.5 * h));
    const RayDerivative k4 = derivative(field, detail::advance(s, k3, h));
    const double w = h / 6.0;
    out.pos = s.pos + w * (k1.velocity + 2.0 * k2.velocity + 2.0 * k3.velocity + k4.velocity);
    out.phi = s.phi + w * (k1.dphi + 2.0 * k2.dphi + 2.0 * k3.dphi + k4.dphi);
    out.theta = s.theta + w * (k1.dtheta + 2.0 * k2.dtheta + 2.0 * k3.dtheta + k4.dtheta);
  }
  canonicalize_angles(out.phi, out.theta);
  out.t = s.t + h;
  return out;
}

struct RayPath {
  std::vector<RayState> states;
  double step = 0.0;
  // Set when tracing stopped because the last state lies outside the domain.
  bool left_domain = false;

  const RayState& back() const { return states.back(); }
  std::size_t size() const { return states.size(); }
};

// Traces n_steps fixed steps of total_time / n_steps. Stops after the first
// state outside the domain (that state is kept and left_domain is set).
inline RayPath trace(const SpeedField& field, const RayState& initial, double total_time,
                     std::size_t n_steps, Integrator method, const DomainBound& domain) {
  if (!(total_time > 0.0)) throw ValidationError("trace: total_time must be positive");
  if (n_steps < 1) throw ValidationError("trace: n_steps must be at least 1");

  RayPath path;
  path.step = total_time / static_cast<double>(n_steps);
  path.states.reserve(n_steps + 1);
  RayState s = initial;
  canonicalize_angles(s.phi, s.theta);
  path.states.push_back(s);
  for (std::size_t i = 0; i < n_steps; ++i) {
    s = step(field, s, path.step, method);
    path.states.push_back(s);
    if (!domain.contains(s.pos)) {
      path.left_domain = true;
      break;
    }
  }
  return path;
}

// Sum of chord length times slowness at the chord midpoint.
inline double travel_time_integral(const SpeedField& field, const RayPath& path) {
  if (path.size() < 2) throw ValidationError("travel_time_integral: need at least two states");
  double total = 0.0;
  for (std::size_t i = 1; i < path.size(); ++i) {
    const Vec3& a = path.states[i - 1].pos;
    const Vec3& b = path.states[i].pos;
    total += distance(a, b) * field.slowness(0.5 * (a + b));
  }
  return total;
}

}  // namespace rayhop
