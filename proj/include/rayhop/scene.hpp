#pragma once

// Forward model: moving spherical obstacle, instrument placement and
// synthesis of single-reflection broken-ray measurements with ground truth.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "rayhop/domain.hpp"
#include "rayhop/errors.hpp"
#include "rayhop/parallel.hpp"
#include "rayhop/ray_tracer.hpp"
#include "rayhop/speed_field.hpp"
#include "rayhop/vec3.hpp"

namespace rayhop {

struct SamplingInterval {
  double start = 0.0;
  double end = 0.0;
  double midpoint() const { return 0.5 * (start + end); }
};

// Sphere of fixed radius whose centre follows a piecewise-linear path in time.
class ObstacleTrajectory {
 public:
  struct Knot {
    double time = 0.0;
    Vec3 center;
  };

  ObstacleTrajectory() = default;
  ObstacleTrajectory(double radius, std::vector<Knot> knots, std::vector<SamplingInterval> intervals)
      : radius_(radius), knots_(std::move(knots)), intervals_(std::move(intervals)) {
    if (!(radius_ > 0.0)) throw ValidationError("obstacle radius must be positive");
    if (knots_.empty()) throw ValidationError("obstacle path needs at least one knot");
    for (std::size_t i = 1; i < knots_.size(); ++i) {
      if (!(knots_[i].time > knots_[i - 1].time)) {
        throw ValidationError("obstacle path knots must have strictly increasing times");
      }
    }
    for (std::size_t i = 0; i < intervals_.size(); ++i) {
      if (!(intervals_[i].end > intervals_[i].start)) {
        throw ValidationError("sampling interval " + std::to_string(i) + " is empty");
      }
      if (i > 0 && intervals_[i].start < intervals_[i - 1].end) {
        throw ValidationError("sampling intervals must be ordered and disjoint");
      }
    }
  }

  double radius() const { return radius_; }
  const std::vector<Knot>& knots() const { return knots_; }
  const std::vector<SamplingInterval>& intervals() const { return intervals_; }

  // Clamped to the first/last knot outside the covered time range.
  Vec3 center_at(double t) const {
    if (t <= knots_.front().time) return knots_.front().center;
    if (t >= knots_.back().time) return knots_.back().center;
    auto it = std::upper_bound(knots_.begin(), knots_.end(), t,
                               [](double v, const Knot& k) { return v < k.time; });
    const Knot& b = *it;
    const Knot& a = *(it - 1);
    const double w = (t - a.time) / (b.time - a.time);
    return a.center + w * (b.center - a.center);
  }

  // The obstacle is held fixed at the interval midpoint.
  Sphere frozen(std::size_t interval) const {
    if (interval >= intervals_.size()) {
      throw ValidationError("no sampling interval " + std::to_string(interval));
    }
    return {center_at(intervals_[interval].midpoint()), radius_};
  }

  // Closure strictly inside the domain at every knot and interval midpoint.
  // Between knots the centre moves linearly, so checking knots covers the path.
  void validate_inside(const DomainBound& domain) const {
    auto check = [&](const Vec3& c, const std::string& where) {
      if (!(distance(c, domain.center()) + radius_ < domain.radius())) {
        throw ValidationError("obstacle leaves the domain at " + where);
      }
    };
    for (std::size_t i = 0; i < knots_.size(); ++i) check(knots_[i].center, "knot " + std::to_string(i));
    for (std::size_t i = 0; i < intervals_.size(); ++i) {
      check(center_at(intervals_[i].midpoint()), "interval " + std::to_string(i));
    }
  }

 private:
  double radius_ = 1.0;
  std::vector<Knot> knots_;
  std::vector<SamplingInterval> intervals_;
};

// One broken-ray measurement: transmitter and receiver positions, launch
// angles at the transmitter, total time of flight and signal frequency.
struct DataPoint {
  Vec3 transmitter;
  Vec3 receiver;
  double phi = 0.0;
  double theta = 0.0;
  double t = 0.0;
  double xi = 0.0;  // carried through, not used by reconstruction
  int interval = 0;
};

struct GroundTruth {
  Vec3 reflection_point;
  double tau = 0.0;  // transmitter -> reflection point
  Angles receiver_angles;  // launch angles from the receiver back along the arrival path
  double miss_distance = 0.0;  // closest approach of the simulated ray to the receiver
};

struct Observation {
  DataPoint data;
  GroundTruth truth;
};

struct Hit {
  RayState state;  // state on the obstacle surface, direction = incoming direction
  const Vec3& point() const { return state.pos; }
  double time() const { return state.t; }
};

// First crossing of the obstacle surface along the traced ray, refined by
// bisection on the last step. nullopt when the ray leaves the domain or the
// time runs out first.
inline std::optional<Hit> first_hit(const SpeedField& field, const RayState& start, const Sphere& obstacle,
                                    double max_time, std::size_t n_steps, Integrator method,
                                    const DomainBound& domain) {
  if (!(max_time > 0.0) || n_steps < 1) throw ValidationError("first_hit: bad time discretisation");
  if (obstacle.signed_distance(start.pos) <= 0.0) {
    throw ValidationError("first_hit: ray starts inside the obstacle");
  }
  const double h = max_time / static_cast<double>(n_steps);
  const double tol = 1e-9 * obstacle.radius;

  RayState prev = start;
  canonicalize_angles(prev.phi, prev.theta);
  for (std::size_t i = 0; i < n_steps; ++i) {
    RayState next = step(field, prev, h, method);
    if (obstacle.signed_distance(next.pos) <= 0.0) {
      double lo = 0.0;
      double hi = h;
      RayState best = next;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        RayState probe = step(field, prev, mid, method);
        const double sd = obstacle.signed_distance(probe.pos);
        best = probe;
        if (std::abs(sd) < tol) break;
        if (sd > 0.0) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      return Hit{best};
    }
    if (!domain.contains(next.pos)) return std::nullopt;
    prev = next;
  }
  return std::nullopt;
}

// Mirror reflection r = d - 2 (d.n) n of a unit direction about a unit normal
// pointing against it.
inline Vec3 specular_reflect(const Vec3& incoming, const Vec3& normal) {
  const double dn = dot(incoming, normal);
  if (std::abs(dn) < 1e-9) throw GrazingIncidence("specular_reflect: grazing incidence");
  if (dn > 0.0) throw ValidationError("specular_reflect: direction does not approach the surface");
  return incoming - 2.0 * dn * normal;
}

// Inclusive uniform grids over [min, max]; a count of 1 yields min only.
struct LaunchGrid {
  double phi_min = 0.0;
  double phi_max = 0.0;
  std::size_t phi_count = 0;
  double theta_min = 0.0;
  double theta_max = 0.0;
  std::size_t theta_count = 0;

  std::size_t size() const { return phi_count * theta_count; }

  static double node(double lo, double hi, std::size_t count, std::size_t i) {
    if (count <= 1) return lo;
    return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  }
  // Row-major in (phi, theta).
  Angles at(std::size_t index) const {
    return {node(phi_min, phi_max, phi_count, index / theta_count),
            node(theta_min, theta_max, theta_count, index % theta_count)};
  }
};

struct SimulationSetup {
  SpeedField field;
  DomainBound domain;
  ObstacleTrajectory obstacle;
  std::vector<Vec3> transmitters;
  std::vector<Vec3> receivers;
  Integrator integrator = Integrator::RK4;
  double max_time = 10.0;       // per broken ray, both legs together
  std::size_t n_steps = 10000;  // steps over max_time
  double capture_radius = 0.0;  // <= 0 selects 2 * c_max * h
  double xi = 40e3;
  unsigned threads = 1;

  double step_size() const { return max_time / static_cast<double>(n_steps); }
  double effective_capture_radius() const {
    if (capture_radius > 0.0) return capture_radius;
    return 2.0 * field.bounds(domain).max * step_size();
  }

  void validate() const {
    if (!(max_time > 0.0) || n_steps < 1) throw ValidationError("simulation time discretisation invalid");
    obstacle.validate_inside(domain);
    for (const auto& p : transmitters) {
      if (!domain.contains(p)) throw ValidationError("transmitter outside the domain");
    }
    for (const auto& p : receivers) {
      if (!domain.contains(p)) throw ValidationError("receiver outside the domain");
    }
  }
};

namespace detail {

// Closest approach of the ray to `target` within the step that starts at
// `from`, by golden-section search over the partial step length.
inline RayState closest_in_step(const SpeedField& field, const RayState& from, double span, const Vec3& target,
                                Integrator method) {
  constexpr double kInvPhi = 0.6180339887498949;
  double a = 0.0;
  double b = span;
  auto dist = [&](double h) { return h <= 0.0 ? distance(from.pos, target) : distance(step(field, from, h, method).pos, target); };
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = dist(c);
  double fd = dist(d);
  for (int it = 0; it < 80; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = dist(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = dist(d);
    }
  }
  const double h = 0.5 * (a + b);
  return h <= 0.0 ? from : step(field, from, h, method);
}

}  // namespace detail

// Traces every grid launch from every transmitter against the obstacle frozen
// at the interval midpoint, reflects specularly and records a measurement for
// each receiver the reflected ray passes within the capture radius of.
// Output is ordered by (transmitter, launch index, receiver) for any thread count.
inline std::vector<Observation> simulate_broken_rays(const SimulationSetup& setup, std::size_t interval,
                                                     const LaunchGrid& grid) {
  const Sphere obstacle = setup.obstacle.frozen(interval);
  const double h = setup.step_size();
  const double capture = setup.effective_capture_radius();
  const std::size_t per_tx = grid.size();
  const std::size_t total = per_tx * setup.transmitters.size();

  std::vector<std::vector<Observation>> slots(total);
  parallel_for(total, setup.threads, [&](std::size_t job) {
    const Vec3& tx = setup.transmitters[job / per_tx];
    const Angles launch = grid.at(job % per_tx);
    RayState start{tx, launch.phi, launch.theta, 0.0};

    std::optional<Hit> hit;
    try {
      hit = first_hit(setup.field, start, obstacle, setup.max_time, setup.n_steps, setup.integrator, setup.domain);
    } catch (const PolarSingularity&) {
      return;
    }
    if (!hit) return;

    const Vec3 incoming = direction_from_angles(hit->state.phi, hit->state.theta);
    const Vec3 normal = obstacle.outward_normal(hit->point());
    Vec3 outgoing;
    try {
      outgoing = specular_reflect(incoming, normal);
    } catch (const Error&) {
      return;
    }
    const Angles out_angles = angles_from_direction(outgoing);
    RayState s{hit->point(), out_angles.phi, out_angles.theta, hit->time()};

    // Second leg, stopped at domain exit, time budget or re-entry into the obstacle.
    std::vector<RayState> leg{s};
    try {
      while (s.t + h <= setup.max_time) {
        s = step(setup.field, s, h, setup.integrator);
        if (!setup.domain.contains(s.pos) || obstacle.signed_distance(s.pos) < 0.0) break;
        leg.push_back(s);
      }
    } catch (const PolarSingularity&) {
    }
    if (leg.size() < 2) return;

    for (const Vec3& rx : setup.receivers) {
      std::size_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t i = 1; i < leg.size(); ++i) {
        const double d = distance(leg[i].pos, rx);
        if (d < best_d) {
          best_d = d;
          best = i;
        }
      }
      if (best == 0 || best_d > 4.0 * capture) continue;
      const bool interior = best + 1 < leg.size();
      RayState arrival;
      try {
        arrival = detail::closest_in_step(setup.field, leg[best - 1], interior ? 2.0 * h : h, rx,
                                          setup.integrator);
      } catch (const PolarSingularity&) {
        continue;
      }
      const double miss = distance(arrival.pos, rx);
      if (!(miss < capture)) continue;

      Observation obs;
      obs.data.transmitter = tx;
      obs.data.receiver = rx;
      obs.data.phi = launch.phi;
      obs.data.theta = launch.theta;
      obs.data.t = arrival.t;
      obs.data.xi = setup.xi;
      obs.data.interval = static_cast<int>(interval);
      obs.truth.reflection_point = hit->point();
      obs.truth.tau = hit->time();
      obs.truth.receiver_angles = angles_from_direction(-direction_from_angles(arrival.phi, arrival.theta));
      obs.truth.miss_distance = miss;
      slots[job].push_back(obs);
    }
  });

  std::vector<Observation> out;
  for (auto& v : slots) {
    for (auto& o : v) out.push_back(std::move(o));
  }
  return out;
}

}  // namespace rayhop
