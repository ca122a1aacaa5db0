#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace rayhop;
using std::numbers::pi;

namespace {

void expect_vec_near(const Vec3& a, const Vec3& b, double tol) {
  EXPECT_NEAR(a.x, b.x, tol);
  EXPECT_NEAR(a.y, b.y, tol);
  EXPECT_NEAR(a.z, b.z, tol);
}

const DomainBound kWide({0, 0, 0}, 1e6);

}  // namespace

TEST(Derivative, EquatorialConstant) {
  const auto d = derivative(SpeedField::constant(1.0), {{0, 0, 0}, pi / 2, 0.0, 0.0});
  expect_vec_near(d.velocity, {1, 0, 0}, 1e-15);
  EXPECT_NEAR(d.dphi, 0.0, 1e-15);
  EXPECT_NEAR(d.dtheta, 0.0, 1e-15);
}

TEST(Derivative, DiagonalLinear) {
  const auto d = derivative(oracle::table1_field(), {{0, 0, 0}, pi / 2, pi / 4, 0.0});
  const double r = std::sqrt(2.0) / 2;
  expect_vec_near(d.velocity, {r, r, 0}, 1e-15);
  EXPECT_NEAR(d.dphi, 0.0, 1e-15);
  EXPECT_NEAR(d.dtheta, 0.0, 1e-15);
}

TEST(Derivative, InclinedConstant) {
  const auto d = derivative(SpeedField::constant(2.0), {{0, 0, 0}, pi / 4, 0.0, 0.0});
  expect_vec_near(d.velocity, {std::sqrt(2.0), 0, std::sqrt(2.0)}, 1e-15);
  EXPECT_EQ(d.dphi, 0.0);
  EXPECT_EQ(d.dtheta, 0.0);
}

TEST(Derivative, HandEvaluatedGeneralCase) {
  // c = 0.5 x - 0.3 y + 0.2 z + 2 at p = (0.4, -0.1, 0.3), phi = 1.1, theta = 2.3.
  const auto f = SpeedField::linear(0.5, -0.3, 0.2, 2.0);
  const RayState s{{0.4, -0.1, 0.3}, 1.1, 2.3, 0.0};
  const double c = 0.5 * 0.4 + 0.3 * 0.1 + 0.2 * 0.3 + 2.0;
  const auto d = derivative(f, s);
  expect_vec_near(d.velocity, {c * std::sin(1.1) * std::cos(2.3), c * std::sin(1.1) * std::sin(2.3), c * std::cos(1.1)},
                  1e-14);
  EXPECT_NEAR(d.dphi, -std::cos(1.1) * (0.5 * std::cos(2.3) - 0.3 * std::sin(2.3)) + 0.2 * std::sin(1.1), 1e-14);
  EXPECT_NEAR(d.dtheta, (0.5 * std::sin(2.3) + 0.3 * std::cos(2.3)) / std::sin(1.1), 1e-14);
}

TEST(Derivative, PolarSingularity) {
  const auto f = SpeedField::constant(1.0);
  EXPECT_THROW(derivative(f, {{0, 0, 0}, 0.0, 0.0, 0.0}), PolarSingularity);
  EXPECT_THROW(derivative(f, {{0, 0, 0}, pi, 0.0, 0.0}), PolarSingularity);
  EXPECT_NO_THROW(derivative(f, {{0, 0, 0}, 1e-6, 0.0, 0.0}));
}

TEST(Step, StraightLineRK4) {
  const auto s = step(SpeedField::constant(1.0), {{0, 0, 0}, pi / 2, 0.0, 0.0}, 0.5, Integrator::RK4);
  expect_vec_near(s.pos, {0.5, 0, 0}, 1e-15);
  EXPECT_DOUBLE_EQ(s.phi, pi / 2);
  EXPECT_DOUBLE_EQ(s.theta, 0.0);
  EXPECT_DOUBLE_EQ(s.t, 0.5);
}

TEST(Step, DiagonalMatchesAnalytic) {
  const auto f = oracle::table1_field();
  RayState s{{0, 0, 0}, pi / 2, pi / 4, 0.0};
  for (int i = 0; i < 1000; ++i) s = step(f, s, 1e-3, Integrator::RK4);
  const double x = oracle::diagonal_coordinate(1.0);
  EXPECT_NEAR(x, 1.55663, 1e-5);
  expect_vec_near(s.pos, {x, x, 0}, 1e-9);
}

TEST(Step, EulerWorseThanRK4) {
  for (std::size_t n : {10u, 50u, 200u}) {
    EXPECT_GT(oracle::diagonal_endpoint_error(1.0, n, Integrator::Euler),
              oracle::diagonal_endpoint_error(1.0, n, Integrator::RK4));
  }
}

TEST(Step, ThetaStaysCanonical) {
  const auto f = SpeedField::linear(-0.4, 0.7, 0.1, 3.0);
  RayState s{{0, 0, 0}, 0.9, 6.2, 0.0};
  for (int i = 0; i < 400; ++i) {
    const RayState next = step(f, s, 0.01, Integrator::RK4);
    EXPECT_GE(next.theta, 0.0);
    EXPECT_LT(next.theta, kTwoPi);
    EXPECT_GT(next.phi, 0.0);
    EXPECT_LT(next.phi, pi);
    EXPECT_GE(next.t, s.t);
    s = next;
  }
}

TEST(Trace, ConstantEndpoint) {
  const auto path = trace(SpeedField::constant(1.0), {{0, 0, 0}, pi / 2, 0.0, 0.0}, 2.0, 4, Integrator::RK4, kWide);
  ASSERT_EQ(path.size(), 5u);
  EXPECT_FALSE(path.left_domain);
  expect_vec_near(path.back().pos, {2, 0, 0}, 1e-14);
  for (std::size_t i = 1; i < path.size(); ++i) EXPECT_NEAR(path.states[i].t - path.states[i - 1].t, 0.5, 1e-15);
}

TEST(Trace, DiagonalEndpoint) {
  const auto path = trace(oracle::table1_field(), {{0, 0, 0}, pi / 2, pi / 4, 0.0}, 2.0, 10000, Integrator::RK4,
                          kWide);
  const double x = oracle::diagonal_coordinate(2.0);
  EXPECT_NEAR(x, 7.959, 1e-3);
  expect_vec_near(path.back().pos, {x, x, 0}, 1e-8);
}

TEST(Trace, TruncatedAtDomainExit) {
  const DomainBound unit({0, 0, 0}, 1.0);
  const auto path = trace(oracle::table1_field(), {{0, 0, 0}, pi / 2, pi / 4, 0.0}, 4.0, 4000, Integrator::RK4, unit);
  EXPECT_TRUE(path.left_domain);
  EXPECT_LT(path.size(), 4001u);
  EXPECT_FALSE(unit.contains(path.back().pos));
  for (std::size_t i = 0; i + 1 < path.size(); ++i) EXPECT_TRUE(unit.contains(path.states[i].pos));
}

TEST(Trace, RejectsBadArguments) {
  const auto f = SpeedField::constant(1.0);
  EXPECT_THROW(trace(f, {}, 0.0, 4, Integrator::RK4, kWide), ValidationError);
  EXPECT_THROW(trace(f, {}, 1.0, 0, Integrator::RK4, kWide), ValidationError);
}

TEST(Trace, ConstantFieldStraightness) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ang(0.2, pi - 0.2);
  std::uniform_real_distribution<double> az(0.0, kTwoPi);
  for (int k = 0; k < 20; ++k) {
    const double c0 = 0.5 + 0.1 * k;
    const RayState start{{0.1 * k, -0.2, 0.3}, ang(rng), az(rng), 0.0};
    const Vec3 dir = direction_from_angles(start.phi, start.theta);
    const auto path = trace(SpeedField::constant(c0), start, 3.0, 300, Integrator::RK4, kWide);
    for (const auto& s : path.states) EXPECT_LT(norm(cross(s.pos - start.pos, dir)), 1e-9);
    EXPECT_NEAR(distance(path.back().pos, start.pos) / (c0 * 3.0), 1.0, 1e-6);
  }
}

TEST(Trace, ArcLengthPerStep) {
  const auto f = SpeedField::radial({0, 0, 0}, 1.0, 0.2);
  const auto path = trace(f, {{0.3, 0.1, 0}, 1.2, 0.4, 0.0}, 2.0, 2000, Integrator::RK4, kWide);
  for (std::size_t i = 1; i < path.size(); ++i) {
    const Vec3 a = path.states[i - 1].pos, b = path.states[i].pos;
    EXPECT_NEAR(distance(a, b), f.eval(0.5 * (a + b)) * path.step, 1e-5 * path.step);
  }
}

TEST(Trace, TimeReversal) {
  const SpeedField fields[] = {oracle::table1_field(), SpeedField::radial({0.5, 0, 0}, 1.0, 0.3),
                               SpeedField::linear(0.2, -0.1, 0.3, 2.0)};
  const DomainBound dom({0, 0, 0}, 3.0);
  for (const auto& f : fields) {
    const RayState start{{0.1, 0.2, -0.1}, 1.3, 0.7, 0.0};
    const std::size_t n = 1000;
    const auto fwd = trace(f, start, 0.8, n, Integrator::RK4, kWide);
    RayState back = fwd.back();
    back.phi = pi - back.phi;
    back.theta += pi;
    back.t = 0.0;
    const auto rev = trace(f, back, 0.8, n, Integrator::RK4, kWide);
    EXPECT_LT(distance(rev.back().pos, start.pos), 10 * fwd.step * f.bounds(dom).max) << f.kind();
  }
}

TEST(TravelTime, StraightPath) {
  const auto path = trace(SpeedField::constant(1.0), {{0, 0, 0}, pi / 2, 0.0, 0.0}, 2.0, 4, Integrator::RK4, kWide);
  EXPECT_NEAR(travel_time_integral(SpeedField::constant(1.0), path), 2.0, 1e-14);
}

TEST(TravelTime, DiagonalHalfTrip) {
  const auto f = oracle::table1_field();
  const auto path = trace(f, {{0, 0, 0}, pi / 2, pi / 4, 0.0}, 1.0, 1000, Integrator::RK4, kWide);
  EXPECT_NEAR(travel_time_integral(f, path), 1.0, 1e-4);
}

TEST(TravelTime, MatchesElapsedTime) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.3, pi - 0.3);
  const SpeedField fields[] = {SpeedField::constant(1.5), SpeedField::linear(0.3, 0.2, -0.1, 2.0),
                               SpeedField::radial({0, 0, 0}, 1.0, 0.5)};
  for (const auto& f : fields) {
    for (int k = 0; k < 10; ++k) {
      const auto path = trace(f, {{0, 0, 0}, u(rng), 2 * u(rng), 0.0}, 1.5, 1000, Integrator::RK4, kWide);
      EXPECT_NEAR(travel_time_integral(f, path) / path.back().t, 1.0, 0.01);
    }
  }
  EXPECT_THROW(travel_time_integral(SpeedField::constant(1.0), RayPath{}), ValidationError);
}

TEST(Convergence, EulerFirstOrder) {
  EXPECT_NEAR(oracle::convergence_slope(2.0, 64, 4, Integrator::Euler), 1.0, 0.3);
}

TEST(Convergence, RK4FourthOrder) {
  EXPECT_NEAR(oracle::convergence_slope(2.0, 16, 4, Integrator::RK4), 4.0, 0.3);
}

TEST(Angles, CanonicalizeAndRoundTrip) {
  double phi = -0.3, theta = 1.0;
  canonicalize_angles(phi, theta);
  EXPECT_NEAR(phi, 0.3, 1e-15);
  EXPECT_NEAR(theta, 1.0 + pi, 1e-15);
  phi = 1.0;
  theta = -0.5;
  canonicalize_angles(phi, theta);
  EXPECT_NEAR(theta, kTwoPi - 0.5, 1e-15);
  const auto a = angles_from_direction(direction_from_angles(0.7, 5.1));
  EXPECT_NEAR(a.phi, 0.7, 1e-14);
  EXPECT_NEAR(a.theta, 5.1, 1e-14);
}
