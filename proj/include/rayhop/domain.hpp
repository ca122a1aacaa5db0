#pragma once

#include "rayhop/errors.hpp"
#include "rayhop/vec3.hpp"

namespace rayhop {

// Spherical ball, used both for the observation domain and for obstacles.
struct Sphere {
  Vec3 center;
  double radius = 1.0;

  bool contains(const Vec3& p) const { return distance(p, center) < radius; }
  // Signed distance to the surface, negative inside.
  double signed_distance(const Vec3& p) const { return distance(p, center) - radius; }
  Vec3 outward_normal(const Vec3& p) const { return normalized(p - center); }
};

// Bounded observation domain. Points strictly inside the ball are in the domain.
struct DomainBound {
  Sphere ball;

  DomainBound() = default;
  DomainBound(Vec3 center, double radius) : ball{center, radius} {
    if (!(radius > 0.0)) throw ValidationError("domain radius must be positive");
  }

  bool contains(const Vec3& p) const { return ball.contains(p); }
  const Vec3& center() const { return ball.center; }
  double radius() const { return ball.radius; }
};

}  // namespace rayhop
