#pragma once

// Closed-form speed-of-sound models c(x, y, z) with analytic gradients.

#include <algorithm>
#include <string>
#include <type_traits>
#include <variant>

#include "rayhop/domain.hpp"
#include "rayhop/errors.hpp"
#include "rayhop/vec3.hpp"

namespace rayhop {

struct ConstantSpeed {
  double c0 = 1.0;
};

// c(p) = a*x + b*y + c*z + d
struct LinearAffineSpeed {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double d = 1.0;
};

// c(p) = base + coeff * |p - center|^2
struct RadialQuadraticSpeed {
  Vec3 center;
  double base = 1.0;
  double coeff = 0.0;
};

struct SpeedBounds {
  double min = 0.0;
  double max = 0.0;
};

class SpeedField {
 public:
  using Model = std::variant<ConstantSpeed, LinearAffineSpeed, RadialQuadraticSpeed>;

  SpeedField() : model_(ConstantSpeed{}) {}
  SpeedField(Model m) : model_(std::move(m)) {}  // NOLINT: implicit from any model

  static SpeedField constant(double c0) { return SpeedField(ConstantSpeed{c0}); }
  static SpeedField linear(double a, double b, double c, double d) {
    return SpeedField(LinearAffineSpeed{a, b, c, d});
  }
  static SpeedField radial(Vec3 center, double base, double coeff) {
    return SpeedField(RadialQuadraticSpeed{center, base, coeff});
  }

  const Model& model() const { return model_; }

  // Raw model value, no positivity check.
  double raw(const Vec3& p) const {
    return std::visit(
        [&](const auto& m) -> double {
          using T = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<T, ConstantSpeed>) {
            return m.c0;
          } else if constexpr (std::is_same_v<T, LinearAffineSpeed>) {
            return m.a * p.x + m.b * p.y + m.c * p.z + m.d;
          } else {
            const Vec3 r = p - m.center;
            return m.base + m.coeff * dot(r, r);
          }
        },
        model_);
  }

  double eval(const Vec3& p) const {
    const double c = raw(p);
    if (!(c > 0.0)) {
      throw NonPositiveSpeed("speed of sound is not positive at (" + std::to_string(p.x) + ", " +
                             std::to_string(p.y) + ", " + std::to_string(p.z) + ")");
    }
    return c;
  }

  Vec3 grad(const Vec3& p) const {
    return std::visit(
        [&](const auto& m) -> Vec3 {
          using T = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<T, ConstantSpeed>) {
            return {};
          } else if constexpr (std::is_same_v<T, LinearAffineSpeed>) {
            return {m.a, m.b, m.c};
          } else {
            return 2.0 * m.coeff * (p - m.center);
          }
        },
        model_);
  }

  double slowness(const Vec3& p) const { return 1.0 / eval(p); }

  // Exact extremes of c over the closed ball.
  SpeedBounds bounds(const Sphere& ball) const {
    return std::visit(
        [&](const auto& m) -> SpeedBounds {
          using T = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<T, ConstantSpeed>) {
            return {m.c0, m.c0};
          } else if constexpr (std::is_same_v<T, LinearAffineSpeed>) {
            const Vec3 g{m.a, m.b, m.c};
            const double mid = dot(g, ball.center) + m.d;
            const double spread = norm(g) * ball.radius;
            return {mid - spread, mid + spread};
          } else {
            const double dc = distance(ball.center, m.center);
            const double near = std::max(0.0, dc - ball.radius);
            const double far = dc + ball.radius;
            const double lo = m.base + m.coeff * near * near;
            const double hi = m.base + m.coeff * far * far;
            return {std::min(lo, hi), std::max(lo, hi)};
          }
        },
        model_);
  }

  SpeedBounds bounds(const DomainBound& domain) const { return bounds(domain.ball); }

  const char* kind() const {
    switch (model_.index()) {
      case 0: return "constant";
      case 1: return "linear";
      default: return "radial";
    }
  }

 private:
  Model model_;
};

}  // namespace rayhop
