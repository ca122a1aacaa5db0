#pragma once

// Reflection-point reconstruction from broken-ray data by two-point shooting.
//
// For a measurement B = (L, S, launch angles, t_k) the transmitter ray is
// stepped from L with h = t_k / N_r; every new point P_{s+1} (reached at time
// T_{s+1}) is a candidate reflection point. A candidate is accepted when a ray
// launched from S along one of the discretised receiver directions passes
// within eps1 of it at a time aT with |T_{s+1} + aT - t_k| < eps2.
//
// Two search strategies share this contract:
//  - brute force re-traces every receiver direction for every candidate,
//    O(N_r^2 A) ray steps;
//  - cached traces every receiver direction once and, per candidate, only
//    visits the receiver steps whose time satisfies the eps2 test, O(N_r A).
// Both accept the first match in (s, angle, p) order and give bit-identical
// results on identical grids.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "rayhop/domain.hpp"
#include "rayhop/errors.hpp"
#include "rayhop/parallel.hpp"
#include "rayhop/ray_tracer.hpp"
#include "rayhop/scene.hpp"
#include "rayhop/speed_field.hpp"
#include "rayhop/vec3.hpp"

namespace rayhop {

struct SearchParams {
  std::size_t n_r = 1000;          // time steps over t_k
  std::size_t phi_steps = 16;      // receiver incident-angle cells
  std::size_t theta_steps = 32;    // receiver azimuth cells
  double eps1 = 0.0;               // <= 0: 2 * c_max * h_k
  double eps2 = 0.0;               // <= 0: h_k / 2
  Integrator integrator = Integrator::RK4;
  unsigned threads = 1;

  std::size_t angle_count() const { return phi_steps * theta_steps; }

  // Cell-centred incident angles (2i + 1) pi / (2 phi_steps), so an odd count
  // contains pi/2; azimuths 2 pi j / theta_steps. Row-major in (phi, theta).
  Angles receiver_angle(std::size_t index) const {
    const std::size_t i = index / theta_steps;
    const std::size_t j = index % theta_steps;
    return {(2.0 * static_cast<double>(i) + 1.0) * std::numbers::pi / (2.0 * static_cast<double>(phi_steps)),
            kTwoPi * static_cast<double>(j) / static_cast<double>(theta_steps)};
  }

  void validate() const {
    if (n_r < 2) throw ValidationError("n_r must be at least 2");
    if (phi_steps < 1 || theta_steps < 1) throw ValidationError("angle grid must be non-empty");
    if (!std::isfinite(eps1) || !std::isfinite(eps2)) throw ValidationError("tolerances must be finite");
  }
};

struct ReflectionSolution {
  Vec3 p_k;
  double tau = 0.0;
  Angles receiver_angles;
  double residual_distance = 0.0;
  double residual_time = 0.0;
  std::size_t transmitter_step = 0;  // s + 1
  std::size_t angle_index = 0;
  std::size_t receiver_step = 0;     // p + 1
  double eps1 = 0.0;                 // tolerances in effect for this data point
  double eps2 = 0.0;
};

enum class FailureReason {
  TimeBudgetExhausted,  // every candidate tried, none matched
  LeftDomain,           // transmitter ray left the domain: inconsistent measurement
  AngleSpaceExhausted,  // no receiver direction produced a usable ray
  DegenerateTransmitterRay,  // transmitter ray hit the pole or non-positive speed
};

inline const char* to_string(FailureReason r) {
  switch (r) {
    case FailureReason::TimeBudgetExhausted: return "time_budget_exhausted";
    case FailureReason::LeftDomain: return "left_domain";
    case FailureReason::AngleSpaceExhausted: return "angle_space_exhausted";
    case FailureReason::DegenerateTransmitterRay: return "degenerate_transmitter_ray";
  }
  return "unknown";
}

struct NoSolution {
  FailureReason reason = FailureReason::TimeBudgetExhausted;
};

using Reconstruction = std::variant<ReflectionSolution, NoSolution>;

inline bool found(const Reconstruction& r) { return std::holds_alternative<ReflectionSolution>(r); }
inline const ReflectionSolution& solution_of(const Reconstruction& r) { return std::get<ReflectionSolution>(r); }

// Instrumentation: number of (distance, time) tests performed.
struct SearchStats {
  std::uint64_t tests = 0;
  std::uint64_t ray_steps = 0;
};

// Per-data-point discretisation shared by both strategies.
struct SearchContext {
  double h = 0.0;
  double eps1 = 0.0;
  double eps2 = 0.0;
};

inline SearchContext make_context(const DataPoint& b, const SpeedField& field, const DomainBound& domain,
                                  const SearchParams& params) {
  params.validate();
  if (!(b.t > 0.0)) throw ValidationError("data point time of flight must be positive");
  if (!domain.contains(b.transmitter) || !domain.contains(b.receiver)) {
    throw ValidationError("transmitter and receiver must lie inside the domain");
  }
  SearchContext ctx;
  ctx.h = b.t / static_cast<double>(params.n_r);
  ctx.eps1 = params.eps1 > 0.0 ? params.eps1 : 2.0 * field.bounds(domain).max * ctx.h;
  ctx.eps2 = params.eps2 > 0.0 ? params.eps2 : 0.5 * ctx.h;
  return ctx;
}

// Precomputed receiver rays: one path per angle cell on the shared time grid
// times[n] (n = 0 is the receiver itself), with an optional uniform-grid
// spatial index over all cached points.
class ReceiverRayCache {
 public:
  struct Entry {
    std::uint32_t angle = 0;
    std::uint32_t step = 0;
    friend bool operator==(const Entry&, const Entry&) = default;
    friend auto operator<=>(const Entry&, const Entry&) = default;
  };

  struct Options {
    bool spatial_index = true;
    double cell = 0.0;  // index cell side and lookup radius
  };

  static ReceiverRayCache build(const Vec3& receiver, const SpeedField& field, const DomainBound& domain,
                                double h, const SearchParams& params, Options opts) {
    ReceiverRayCache cache;
    const std::size_t a_count = params.angle_count();
    cache.params_ = params;
    cache.h_ = h;
    cache.times_.resize(params.n_r + 1);
    cache.times_[0] = 0.0;
    for (std::size_t n = 1; n <= params.n_r; ++n) cache.times_[n] = cache.times_[n - 1] + h;

    cache.paths_.assign(a_count, {});
    std::vector<char> singular(a_count, 0);
    parallel_for(a_count, params.threads, [&](std::size_t a) {
      const Angles ang = params.receiver_angle(a);
      RayState rs{receiver, ang.phi, ang.theta, 0.0};
      if (std::abs(std::sin(rs.phi)) < kPoleThreshold) {
        singular[a] = 1;
        return;
      }
      std::vector<Vec3>& path = cache.paths_[a];
      path.reserve(params.n_r + 1);
      path.push_back(receiver);
      for (std::size_t p = 0; p < params.n_r; ++p) {
        try {
          rs = step(field, rs, h, params.integrator);
        } catch (const PolarSingularity&) {
          singular[a] = 1;
          break;
        } catch (const NonPositiveSpeed&) {
          break;
        }
        if (!domain.contains(rs.pos)) break;
        path.push_back(rs.pos);
      }
    });
    for (std::size_t a = 0; a < a_count; ++a) {
      if (singular[a]) cache.singular_.push_back(a);
    }

    cache.cell_ = opts.cell;
    if (opts.spatial_index) {
      if (!(opts.cell > 0.0)) throw ValidationError("spatial index cell size must be positive");
      for (std::size_t a = 0; a < a_count; ++a) {
        const auto& path = cache.paths_[a];
        for (std::size_t n = 0; n < path.size(); ++n) {
          cache.index_.push_back({cache.key(path[n]), {static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(n)}});
        }
      }
      std::sort(cache.index_.begin(), cache.index_.end());
      cache.indexed_ = true;
    }
    return cache;
  }

  std::size_t angle_count() const { return paths_.size(); }
  const std::vector<Vec3>& path(std::size_t angle) const { return paths_[angle]; }
  const std::vector<double>& times() const { return times_; }
  // Cells whose ray hit the polar singularity (empty path if at launch).
  const std::vector<std::size_t>& singular_cells() const { return singular_; }
  std::size_t point_count() const {
    std::size_t n = 0;
    for (const auto& p : paths_) n += p.size();
    return n;
  }
  bool has_usable_ray() const {
    return std::any_of(paths_.begin(), paths_.end(), [](const auto& p) { return p.size() > 1; });
  }
  const Vec3& point(const Entry& e) const { return paths_[e.angle][e.step]; }
  double time(const Entry& e) const { return times_[e.step]; }

  // Every cached point strictly within `cell` of q, ordered by (angle, step).
  std::vector<Entry> lookup(const Vec3& q) const {
    if (!indexed_) throw ValidationError("cache was built without a spatial index");
    std::vector<Entry> out;
    const CellKey c = key(q);
    for (std::int64_t dx = -1; dx <= 1; ++dx) {
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        for (std::int64_t dz = -1; dz <= 1; ++dz) {
          const CellKey k{c.x + dx, c.y + dy, c.z + dz};
          auto lo = std::lower_bound(index_.begin(), index_.end(), k,
                                     [](const Item& it, const CellKey& v) { return it.key < v; });
          for (auto it = lo; it != index_.end() && it->key == k; ++it) {
            if (distance(point(it->entry), q) < cell_) out.push_back(it->entry);
          }
        }
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  struct CellKey {
    std::int64_t x = 0, y = 0, z = 0;
    friend bool operator==(const CellKey&, const CellKey&) = default;
    friend auto operator<=>(const CellKey&, const CellKey&) = default;
  };
  struct Item {
    CellKey key;
    Entry entry;
    friend bool operator==(const Item&, const Item&) = default;
    friend auto operator<=>(const Item&, const Item&) = default;
  };

  CellKey key(const Vec3& p) const {
    return {static_cast<std::int64_t>(std::floor(p.x / cell_)), static_cast<std::int64_t>(std::floor(p.y / cell_)),
            static_cast<std::int64_t>(std::floor(p.z / cell_))};
  }

  SearchParams params_;
  double h_ = 0.0;
  double cell_ = 0.0;
  bool indexed_ = false;
  std::vector<double> times_;
  std::vector<std::vector<Vec3>> paths_;
  std::vector<std::size_t> singular_;
  std::vector<Item> index_;
};

// Receiver cache for a data point, indexed with cell side eps1.
inline ReceiverRayCache build_receiver_cache(const DataPoint& b, const SpeedField& field, const DomainBound& domain,
                                             const SearchParams& params) {
  const SearchContext ctx = make_context(b, field, domain, params);
  return ReceiverRayCache::build(b.receiver, field, domain, ctx.h, params, {true, ctx.eps1});
}

namespace detail {

// Steps the transmitter ray and hands each in-domain candidate to `match`.
// Shared by both strategies so the candidate sequence and the failure
// classification are identical.
template <typename Match>
Reconstruction scan_transmitter(const DataPoint& b, const SpeedField& field, const DomainBound& domain,
                                const SearchParams& params, const SearchContext& ctx, bool any_receiver_ray,
                                SearchStats* stats, Match&& match) {
  RayState tx{b.transmitter, b.phi, b.theta, 0.0};
  canonicalize_angles(tx.phi, tx.theta);
  for (std::size_t s = 0; s < params.n_r; ++s) {
    try {
      tx = step(field, tx, ctx.h, params.integrator);
    } catch (const PolarSingularity&) {
      return NoSolution{FailureReason::DegenerateTransmitterRay};
    } catch (const NonPositiveSpeed&) {
      return NoSolution{FailureReason::DegenerateTransmitterRay};
    }
    if (stats) ++stats->ray_steps;
    if (!domain.contains(tx.pos)) return NoSolution{FailureReason::LeftDomain};
    if (std::optional<ReflectionSolution> sol = match(s + 1, tx.t, tx.pos)) {
      sol->tau = tx.t;
      sol->p_k = tx.pos;
      sol->transmitter_step = s + 1;
      sol->eps1 = ctx.eps1;
      sol->eps2 = ctx.eps2;
      return *sol;
    }
  }
  return NoSolution{any_receiver_ray ? FailureReason::TimeBudgetExhausted : FailureReason::AngleSpaceExhausted};
}

struct AngleScan {
  std::optional<std::size_t> match_step;  // p + 1
  Vec3 point;
  double time = 0.0;
  double dist = 0.0;
  std::uint64_t tests = 0;
  std::uint64_t steps = 0;
  bool produced_point = false;
};

}  // namespace detail

// Literal triple loop: candidates in s, receiver directions, receiver steps.
inline Reconstruction reconstruct_point_bruteforce(const DataPoint& b, const SpeedField& field,
                                                   const DomainBound& domain, const SearchParams& params,
                                                   SearchStats* stats = nullptr) {
  const SearchContext ctx = make_context(b, field, domain, params);
  const std::size_t a_count = params.angle_count();
  bool any_receiver_ray = false;
  std::vector<detail::AngleScan> scans(a_count);

  auto match = [&](std::size_t, double T, const Vec3& P) -> std::optional<ReflectionSolution> {
    parallel_for(a_count, params.threads, [&](std::size_t a) {
      detail::AngleScan& sc = scans[a];
      sc = {};
      const Angles ang = params.receiver_angle(a);
      RayState rs{b.receiver, ang.phi, ang.theta, 0.0};
      if (std::abs(std::sin(rs.phi)) < kPoleThreshold) return;
      for (std::size_t p = 0; p < params.n_r; ++p) {
        try {
          rs = step(field, rs, ctx.h, params.integrator);
        } catch (const PolarSingularity&) {
          return;
        } catch (const NonPositiveSpeed&) {
          return;
        }
        ++sc.steps;
        if (!domain.contains(rs.pos)) return;
        sc.produced_point = true;
        ++sc.tests;
        const double d = distance(P, rs.pos);
        const double dt = T + rs.t - b.t;
        if (d < ctx.eps1 && std::abs(dt) < ctx.eps2) {
          sc.match_step = p + 1;
          sc.point = rs.pos;
          sc.time = rs.t;
          sc.dist = d;
          return;
        }
        if (T + rs.t > b.t + ctx.eps2) return;
      }
    });
    // Accept the lowest matching angle; count work as a sequential sweep would.
    std::optional<ReflectionSolution> result;
    for (std::size_t a = 0; a < a_count; ++a) {
      const auto& sc = scans[a];
      any_receiver_ray = any_receiver_ray || sc.produced_point;
      if (stats) {
        stats->tests += sc.tests;
        stats->ray_steps += sc.steps;
      }
      if (sc.match_step) {
        ReflectionSolution sol;
        sol.receiver_angles = params.receiver_angle(a);
        sol.angle_index = a;
        sol.receiver_step = *sc.match_step;
        sol.residual_distance = sc.dist;
        sol.residual_time = std::abs(T + sc.time - b.t);
        result = sol;
        break;
      }
    }
    return result;
  };

  // The failure reason needs to know whether any receiver ray existed; that is
  // only known after sweeping, so classify after the scan.
  Reconstruction r = detail::scan_transmitter(b, field, domain, params, ctx, true, stats, match);
  if (!found(r) && std::get<NoSolution>(r).reason == FailureReason::TimeBudgetExhausted && !any_receiver_ray) {
    return NoSolution{FailureReason::AngleSpaceExhausted};
  }
  return r;
}

// Same contract and result as the brute-force search, with every receiver
// direction traced once up front.
inline Reconstruction reconstruct_point_cached(const DataPoint& b, const SpeedField& field,
                                               const DomainBound& domain, const SearchParams& params,
                                               SearchStats* stats = nullptr) {
  const SearchContext ctx = make_context(b, field, domain, params);
  const ReceiverRayCache cache =
      ReceiverRayCache::build(b.receiver, field, domain, ctx.h, params, {false, ctx.eps1});
  if (stats) stats->ray_steps += cache.point_count();
  const std::vector<double>& times = cache.times();
  const std::size_t a_count = cache.angle_count();

  auto match = [&](std::size_t, double T, const Vec3& P) -> std::optional<ReflectionSolution> {
    // Receiver steps n with -eps2 < (T + times[n]) - t_k < eps2; the sum is
    // monotone in n so this is a contiguous range.
    auto gap = [&](std::size_t n) { return T + times[n] - b.t; };
    auto first = std::partition_point(times.begin() + 1, times.end(),
                                      [&](const double& tn) { return !(T + tn - b.t > -ctx.eps2); });
    const std::size_t n_lo = static_cast<std::size_t>(first - times.begin());
    for (std::size_t a = 0; a < a_count; ++a) {
      const std::vector<Vec3>& path = cache.path(a);
      for (std::size_t n = n_lo; n < path.size() && gap(n) < ctx.eps2; ++n) {
        if (stats) ++stats->tests;
        const double d = distance(P, path[n]);
        if (d < ctx.eps1) {
          ReflectionSolution sol;
          sol.receiver_angles = params.receiver_angle(a);
          sol.angle_index = a;
          sol.receiver_step = n;
          sol.residual_distance = d;
          sol.residual_time = std::abs(gap(n));
          return sol;
        }
      }
    }
    return std::nullopt;
  };

  return detail::scan_transmitter(b, field, domain, params, ctx, cache.has_usable_ray(), stats, match);
}

enum class SearchVariant { BruteForce, Cached };

inline Reconstruction reconstruct_point(const DataPoint& b, const SpeedField& field, const DomainBound& domain,
                                        const SearchParams& params, SearchVariant variant,
                                        SearchStats* stats = nullptr) {
  return variant == SearchVariant::BruteForce ? reconstruct_point_bruteforce(b, field, domain, params, stats)
                                              : reconstruct_point_cached(b, field, domain, params, stats);
}

// Reconstructs every data point of one sampling interval, preserving order.
// Points are distributed over the workers; each point then runs single-threaded
// unless there are fewer points than workers.
inline std::vector<Reconstruction> reconstruct_interval(const std::vector<DataPoint>& points,
                                                        const SpeedField& field, const DomainBound& domain,
                                                        const SearchParams& params,
                                                        SearchVariant variant = SearchVariant::Cached) {
  std::vector<Reconstruction> out(points.size(), NoSolution{});
  const unsigned threads = std::max(1u, params.threads);
  if (points.size() >= threads) {
    SearchParams inner = params;
    inner.threads = 1;
    parallel_for(points.size(), threads,
                 [&](std::size_t i) { out[i] = reconstruct_point(points[i], field, domain, inner, variant); });
  } else {
    for (std::size_t i = 0; i < points.size(); ++i) {
      out[i] = reconstruct_point(points[i], field, domain, params, variant);
    }
  }
  return out;
}

// Re-traces both legs of an accepted solution (no domain guard).
struct SolutionCheck {
  double transmitter_miss = 0.0;  // |trace(L, launch angles, tau) - P_k|
  double receiver_miss = 0.0;     // |trace(S, receiver angles, t_k - tau) - P_k|
};

inline Vec3 trace_endpoint(const SpeedField& field, RayState s, double duration, std::size_t n_steps,
                           Integrator method) {
  canonicalize_angles(s.phi, s.theta);
  const double h = duration / static_cast<double>(n_steps);
  for (std::size_t i = 0; i < n_steps; ++i) s = step(field, s, h, method);
  return s.pos;
}

inline SolutionCheck verify_solution(const DataPoint& b, const ReflectionSolution& sol, const SpeedField& field,
                                     std::size_t n_r, Integrator method) {
  const double h = b.t / static_cast<double>(n_r);
  auto steps_for = [&](double d) {
    return static_cast<std::size_t>(std::max<long>(1, std::lround(d / h)));
  };
  SolutionCheck c;
  const Vec3 tx_end = trace_endpoint(field, {b.transmitter, b.phi, b.theta, 0.0}, sol.tau, steps_for(sol.tau), method);
  const double back = b.t - sol.tau;
  const Vec3 rx_end = trace_endpoint(field, {b.receiver, sol.receiver_angles.phi, sol.receiver_angles.theta, 0.0},
                                     back, steps_for(back), method);
  c.transmitter_miss = distance(tx_end, sol.p_k);
  c.receiver_miss = distance(rx_end, sol.p_k);
  return c;
}

}  // namespace rayhop
