#pragma once

// Trajectory assembly over sampling intervals and the routing computations
// built on reconstructed reflection points: IHOP addresses (a pair of
// transmission angles), reverse paths, redundant ray bundles and the
// control-message cadence.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <span>
#include <tuple>
#include <vector>

#include "rayhop/errors.hpp"
#include "rayhop/ray_tracer.hpp"
#include "rayhop/reconstructor.hpp"
#include "rayhop/scene.hpp"
#include "rayhop/vec3.hpp"

namespace rayhop {

// Transmission angles, relative to a transmitter frame aligned with the
// global Cartesian axes, that reach a host by a single ray.
struct IhopAddress {
  double phi = std::numbers::pi / 2;
  double theta = 0.0;

  bool valid() const {
    return std::isfinite(phi) && std::isfinite(theta) && phi > 0.0 && phi < std::numbers::pi && theta >= 0.0 &&
           theta < kTwoPi;
  }
  Vec3 direction() const { return direction_from_angles(phi, theta); }
};

struct IntervalSummary {
  int interval = 0;
  Vec3 centroid;
  std::size_t count = 0;
  double radius = 0.0;  // largest distance of a member point from the centroid
  bool gap() const { return count == 0; }
};

struct TrajectoryEstimate {
  std::vector<IntervalSummary> intervals;  // strictly increasing interval ids

  std::vector<IntervalSummary> populated() const {
    std::vector<IntervalSummary> out;
    for (const auto& s : intervals) {
      if (!s.gap()) out.push_back(s);
    }
    return out;
  }

  // Mean centroid displacement per interval step between the first and the
  // last populated interval.
  std::optional<Vec3> drift_per_interval() const {
    const auto p = populated();
    if (p.size() < 2) return std::nullopt;
    const double steps = static_cast<double>(p.back().interval - p.front().interval);
    return (p.back().centroid - p.front().centroid) * (1.0 / steps);
  }
};

// A reconstruction outcome tagged with its sampling interval; nullopt marks a
// data point with no solution.
struct TrackSample {
  int interval = 0;
  std::optional<Vec3> point;
};

inline TrajectoryEstimate build_trajectory(std::span<const TrackSample> samples) {
  std::map<int, std::vector<Vec3>> groups;
  for (const auto& s : samples) {
    auto& g = groups[s.interval];
    if (s.point) g.push_back(*s.point);
  }
  TrajectoryEstimate est;
  bool any = false;
  for (auto& [id, pts] : groups) {
    IntervalSummary sum;
    sum.interval = id;
    sum.count = pts.size();
    if (!pts.empty()) {
      any = true;
      // Fixed summation order regardless of input order.
      std::sort(pts.begin(), pts.end(), [](const Vec3& a, const Vec3& b) {
        return std::tie(a.x, a.y, a.z) < std::tie(b.x, b.y, b.z);
      });
      Vec3 acc;
      for (const auto& p : pts) acc += p;
      sum.centroid = acc * (1.0 / static_cast<double>(pts.size()));
      for (const auto& p : pts) sum.radius = std::max(sum.radius, distance(p, sum.centroid));
    }
    est.intervals.push_back(sum);
  }
  if (!any) throw ValidationError("build_trajectory: no interval has a reconstructed point");
  return est;
}

inline bool is_valid(const ReflectionSolution& sol) {
  return is_finite(sol.p_k) && std::isfinite(sol.tau) && sol.tau > 0.0 && sol.eps1 > 0.0 && sol.eps2 > 0.0 &&
         sol.residual_distance >= 0.0 && sol.residual_distance < sol.eps1 && sol.residual_time >= 0.0 &&
         sol.residual_time < sol.eps2 && IhopAddress{sol.receiver_angles.phi, sol.receiver_angles.theta}.valid();
}

// The receiver's address for answering the transmitter through the
// reconstructed reflection point: the receiver-side launch angles.
inline IhopAddress reverse_address(const ReflectionSolution& sol) {
  if (!is_valid(sol)) throw InvalidSolution("reverse_address: solution does not satisfy its tolerances");
  return {sol.receiver_angles.phi, sol.receiver_angles.theta};
}

// `count` addresses: addr itself, then count-1 directions evenly spaced on a
// cone of half-angle `spread` around it.
inline std::vector<IhopAddress> parallel_ray_bundle(const IhopAddress& addr, std::size_t count, double spread) {
  if (!addr.valid()) throw ValidationError("parallel_ray_bundle: invalid base address");
  if (count < 1) throw ValidationError("parallel_ray_bundle: count must be at least 1");
  if (!(spread > 0.0)) throw ValidationError("parallel_ray_bundle: spread must be positive");
  if (!(spread < addr.phi && spread < std::numbers::pi - addr.phi)) {
    throw ValidationError("parallel_ray_bundle: spread would cross the polar axis");
  }
  std::vector<IhopAddress> out{addr};
  if (count == 1) return out;

  const Vec3 d = addr.direction();
  // e_phi and e_theta of the spherical frame at d: orthonormal and both normal to d.
  const Vec3 u{std::cos(addr.phi) * std::cos(addr.theta), std::cos(addr.phi) * std::sin(addr.theta),
               -std::sin(addr.phi)};
  const Vec3 v{-std::sin(addr.theta), std::cos(addr.theta), 0.0};
  const std::size_t ring = count - 1;
  for (std::size_t k = 0; k < ring; ++k) {
    const double alpha = kTwoPi * static_cast<double>(k) / static_cast<double>(ring);
    const Vec3 dir = std::cos(spread) * d + std::sin(spread) * (std::cos(alpha) * u + std::sin(alpha) * v);
    const Angles a = angles_from_direction(dir);
    out.push_back({a.phi, a.theta});
  }
  return out;
}

// Angle between the directions of two addresses.
inline double angular_distance(const IhopAddress& a, const IhopAddress& b) {
  const double c = std::clamp(dot(a.direction(), b.direction()), -1.0, 1.0);
  return std::acos(c);
}

// Policy: refresh addresses before the worst-case relative displacement of
// host and obstacle can consume the position tolerance.
struct ControlPolicy {
  double speed_floor = 1e-9;  // m/s, keeps a static scene finite
  double max_interval = 3600.0;  // s
};

inline double control_message_interval(double host_speed, double obstacle_speed, double tolerance,
                                       const ControlPolicy& policy = {}) {
  if (!(host_speed >= 0.0) || !(obstacle_speed >= 0.0)) {
    throw ValidationError("control_message_interval: speeds must be non-negative");
  }
  if (!(tolerance > 0.0)) throw ValidationError("control_message_interval: tolerance must be positive");
  return std::min(policy.max_interval, tolerance / (host_speed + obstacle_speed + policy.speed_floor));
}

struct Route {
  DataPoint data;
  ReflectionSolution solution;
};

// Among alternative reflection routes between the same pair of hosts, the
// one with the least travel time (first on ties).
inline std::optional<std::size_t> optimal_route(std::span<const Route> routes) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < routes.size(); ++i) {
    if (!best || routes[i].data.t < routes[*best].data.t) best = i;
  }
  return best;
}

}  // namespace rayhop
