#include "commands.hpp"

#include <yaml-cpp/yaml.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>

namespace rayhop::cli {

SearchParams RunOptions::apply(SearchParams p) const {
  if (n_r) p.n_r = *n_r;
  if (phi_steps) p.phi_steps = *phi_steps;
  if (theta_steps) p.theta_steps = *theta_steps;
  if (eps1) p.eps1 = *eps1;
  if (eps2) p.eps2 = *eps2;
  if (integrator) p.integrator = *integrator;
  p.threads = threads;
  p.validate();
  return p;
}

namespace {

template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const NonPositiveSpeed& e) {
    err << "error: " << e.what() << '\n';
    return kNumericalFailure;
  } catch (const PolarSingularity& e) {
    err << "error: " << e.what() << '\n';
    return kNumericalFailure;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kInvalidInput;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kNumericalFailure;
  }
}

}  // namespace

int cmd_simulate(const std::string& scenario_path, std::ostream& data_out, std::ostream* truth_out,
                 const RunOptions& opts, std::ostream& err) {
  return guarded(err, [&] {
    Scenario sc = load_scenario(scenario_path);
    sc.sim.threads = opts.threads;
    if (opts.integrator) sc.sim.integrator = *opts.integrator;

    std::vector<DataPoint> data;
    std::vector<GroundTruth> truth;
    for (std::size_t iv = 0; iv < sc.sim.obstacle.intervals().size(); ++iv) {
      for (auto& obs : simulate_broken_rays(sc.sim, iv, sc.launch)) {
        data.push_back(obs.data);
        truth.push_back(obs.truth);
      }
    }
    csv::write_datapoints(data_out, data);
    if (truth_out) csv::write_ground_truth(*truth_out, truth);
    err << "simulated " << data.size() << " broken rays over " << sc.sim.obstacle.intervals().size()
        << " intervals\n";
    return int{kOk};
  });
}

int cmd_reconstruct(const std::string& scenario_path, std::istream& data_in, std::ostream& out,
                    const RunOptions& opts, std::ostream& err) {
  return guarded(err, [&] {
    const Scenario sc = load_scenario(scenario_path);
    const SearchParams params = opts.apply(sc.search);
    const std::vector<DataPoint> data = csv::read_datapoints(data_in);
    for (std::size_t k = 0; k < data.size(); ++k) {
      if (!sc.sim.domain.contains(data[k].transmitter) || !sc.sim.domain.contains(data[k].receiver)) {
        throw ValidationError("data row " + std::to_string(k + 1) + ": instrument outside the domain");
      }
    }

    const auto t0 = std::chrono::steady_clock::now();
    const auto results = reconstruct_interval(data, sc.sim.field, sc.sim.domain, params, opts.variant);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    csv::write_solutions(out, csv::solution_rows(data, results));
    std::size_t solved = 0;
    for (const auto& r : results) solved += found(r) ? 1 : 0;
    err << "solved " << solved << " failed " << results.size() - solved << " of " << results.size() << " in "
        << std::fixed << std::setprecision(3) << wall << " s ("
        << (opts.variant == SearchVariant::Cached ? "cached" : "brute") << ", " << params.threads
        << " threads)\n";
    return int{kOk};
  });
}

int cmd_track(std::istream& solutions_in, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto rows = csv::read_solutions(solutions_in);
    if (rows.empty()) throw ValidationError("no solution rows to track");
    std::vector<TrackSample> samples;
    for (const auto& r : rows) {
      TrackSample s{r.interval, std::nullopt};
      if (r.solution) s.point = r.solution->p_k;
      samples.push_back(s);
    }
    const TrajectoryEstimate est = build_trajectory(samples);
    csv::write_trajectory(out, est);
    return int{kOk};
  });
}

DomainBound table1_domain(double total_time) {
  const double x = (std::exp(std::numbers::sqrt2 * total_time / 2.0) - 1.0) / 2.0;
  const double offset = 0.6 * x;
  // c >= 0.5 on the ball: 1 + 2 * offset - r * sqrt(2) = 0.5.
  return DomainBound({offset, offset, 0.0}, (2.0 * offset + 0.5) / std::numbers::sqrt2);
}

Table1Report run_table1(std::size_t rk4_n_r, std::size_t euler_n_r, unsigned threads) {
  const SpeedField field = SpeedField::linear(1.0, 1.0, 0.0, 1.0);
  const double totals[] = {2.0, 4.0, 8.0};
  const double published[] = {1.55, 7.89, 138.15};

  Table1Report rep;
  rep.rk4_n_r = rk4_n_r;
  rep.euler_n_r = euler_n_r;
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < 3; ++i) {
    Table1Row row;
    row.total_time = totals[i];
    row.published_xp = published[i];
    row.analytic_xp = (std::exp(std::numbers::sqrt2 * totals[i] / 2.0) - 1.0) / 2.0;

    DataPoint b;
    b.phi = std::numbers::pi / 2;
    b.theta = std::numbers::pi / 4;
    b.t = totals[i];
    b.xi = 40e3;
    b.interval = i;
    const DomainBound domain = table1_domain(totals[i]);

    SearchParams p;
    p.phi_steps = 1;
    p.theta_steps = 72;
    p.threads = threads;
    p.n_r = rk4_n_r;
    p.integrator = Integrator::RK4;
    if (auto r = reconstruct_point_cached(b, field, domain, p); found(r)) row.rk4 = solution_of(r).p_k;
    p.n_r = euler_n_r;
    p.integrator = Integrator::Euler;
    if (auto r = reconstruct_point_cached(b, field, domain, p); found(r)) row.euler = solution_of(r).p_k;
    rep.rows.push_back(row);
  }
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

int cmd_table1(std::ostream& out, const RunOptions& opts) {
  const Table1Report rep = run_table1(opts.n_r.value_or(10000), 2000, opts.threads);
  auto rel = [](double a, double b) { return std::abs(a - b) / std::abs(b); };
  char line[256];
  out << "c(x,y,z) = x + y + 1, L = S = origin, launch (phi, theta) = (pi/2, pi/4)\n";
  std::snprintf(line, sizeof line, "%4s %9s %11s %12s %9s %9s %12s %9s\n", "T", "published", "analytic",
                "rk4", "err_an", "err_pub", "euler", "err_an");
  out << line;
  bool ok = true;
  for (const auto& r : rep.rows) {
    const double rk = r.rk4 ? r.rk4->x : std::nan("");
    const double eu = r.euler ? r.euler->x : std::nan("");
    ok = ok && r.rk4 && r.euler;
    std::snprintf(line, sizeof line, "%4g %9.2f %11.4f %12.4f %8.3f%% %8.3f%% %12.4f %8.3f%%\n", r.total_time,
                  r.published_xp, r.analytic_xp, rk, 100 * rel(rk, r.analytic_xp), 100 * rel(rk, r.published_xp), eu,
                  100 * rel(eu, r.analytic_xp));
    out << line;
  }
  std::snprintf(line, sizeof line, "rk4 N_r = %zu, euler N_r = %zu, yp = xp and zp = 0 in every row, %.2f s\n",
                rep.rk4_n_r, rep.euler_n_r, rep.seconds);
  out << line;
  return ok ? kOk : kNumericalFailure;
}

int cmd_bundle(double phi, double theta, std::size_t count, double spread, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    csv::write_addresses(out, parallel_ray_bundle({phi, wrap_azimuth(theta)}, count, spread));
    return int{kOk};
  });
}

// Random moving-sphere scenario in the z = 0 plane: transmitter and receivers
// on an arc of the domain, obstacle drifting through the middle.
int cmd_generate(std::uint64_t seed, std::ostream& out) {
  std::mt19937_64 rng(seed);
  auto uni = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };

  const double radius = 3.0;
  YAML::Emitter y;
  y << YAML::BeginMap;
  y << YAML::Key << "domain" << YAML::Value << YAML::Flow << YAML::BeginMap << YAML::Key << "center"
    << YAML::Value << YAML::Flow << std::vector<double>{0, 0, 0} << YAML::Key << "radius" << YAML::Value << radius
    << YAML::EndMap;

  y << YAML::Key << "speed_field" << YAML::Value << YAML::Flow << YAML::BeginMap;
  switch (std::uniform_int_distribution<int>(0, 2)(rng)) {
    case 0:
      y << YAML::Key << "kind" << YAML::Value << "constant" << YAML::Key << "c0" << YAML::Value << uni(0.5, 2.0);
      break;
    case 1: {
      const double a = uni(-0.2, 0.2), b = uni(-0.2, 0.2);
      y << YAML::Key << "kind" << YAML::Value << "linear" << YAML::Key << "a" << YAML::Value << a << YAML::Key
        << "b" << YAML::Value << b << YAML::Key << "c" << YAML::Value << 0.0 << YAML::Key << "d" << YAML::Value
        << 1.0 + radius * std::hypot(a, b) + uni(0.2, 1.0);
      break;
    }
    default:
      y << YAML::Key << "kind" << YAML::Value << "radial" << YAML::Key << "center" << YAML::Value << YAML::Flow
        << std::vector<double>{uni(-1, 1), uni(-1, 1), 0.0} << YAML::Key << "base" << YAML::Value << uni(0.8, 1.5)
        << YAML::Key << "coeff" << YAML::Value << uni(0.0, 0.05);
  }
  y << YAML::EndMap;

  const double heading = uni(0, 2 * std::numbers::pi);
  const Vec3 start{0.4 * std::cos(heading), 0.4 * std::sin(heading), 0.0};
  y << YAML::Key << "obstacle" << YAML::Value << YAML::BeginMap;
  y << YAML::Key << "radius" << YAML::Value << uni(0.3, 0.6);
  y << YAML::Key << "path" << YAML::Value << YAML::BeginSeq;
  y << YAML::Flow << YAML::BeginMap << YAML::Key << "t" << YAML::Value << 0.0 << YAML::Key << "center"
    << YAML::Value << YAML::Flow << std::vector<double>{start.x, start.y, 0.0} << YAML::EndMap;
  y << YAML::Flow << YAML::BeginMap << YAML::Key << "t" << YAML::Value << 3.0 << YAML::Key << "center"
    << YAML::Value << YAML::Flow << std::vector<double>{-start.x, -start.y, 0.0} << YAML::EndMap;
  y << YAML::EndSeq;
  y << YAML::Key << "intervals" << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (int i = 0; i < 3; ++i) y << YAML::Flow << std::vector<double>{double(i), double(i + 1)};
  y << YAML::EndSeq << YAML::EndMap;

  const double base = uni(0, 2 * std::numbers::pi);
  auto on_arc = [&](double a) {
    return std::vector<double>{2.6 * std::cos(base + a), 2.6 * std::sin(base + a), 0.0};
  };
  y << YAML::Key << "transmitters" << YAML::Value << YAML::Flow << YAML::BeginSeq << YAML::Flow << on_arc(0.0)
    << YAML::EndSeq;
  y << YAML::Key << "receivers" << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (int k = -3; k <= 3; ++k) y << YAML::Flow << on_arc(0.12 * k);
  y << YAML::EndSeq;

  const double toward = base + std::numbers::pi;
  y << YAML::Key << "launch_grid" << YAML::Value << YAML::Flow << YAML::BeginMap << YAML::Key << "phi"
    << YAML::Value << YAML::Flow << YAML::BeginSeq << "pi/2" << "pi/2" << 1 << YAML::EndSeq << YAML::Key
    << "theta" << YAML::Value << YAML::Flow << YAML::BeginSeq << toward - 0.35 << toward + 0.35 << 2001
    << YAML::EndSeq << YAML::EndMap;
  y << YAML::Key << "simulation" << YAML::Value << YAML::Flow << YAML::BeginMap << YAML::Key << "max_time"
    << YAML::Value << 12.0 << YAML::Key << "steps" << YAML::Value << 6000 << YAML::EndMap;
  y << YAML::Key << "search" << YAML::Value << YAML::Flow << YAML::BeginMap << YAML::Key << "n_r" << YAML::Value
    << 400 << YAML::Key << "phi_steps" << YAML::Value << 1 << YAML::Key << "theta_steps" << YAML::Value << 360
    << YAML::Key << "eps1" << YAML::Value << 0.05 << YAML::EndMap;
  y << YAML::EndMap;
  out << "# generated with seed " << seed << '\n' << y.c_str() << '\n';
  return kOk;
}

}  // namespace rayhop::cli
