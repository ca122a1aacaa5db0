#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rayhop/rayhop.hpp"
#include "scenario.hpp"

namespace rayhop::cli {

enum ExitCode : int { kOk = 0, kNumericalFailure = 1, kInvalidInput = 2 };

// Command-line overrides of scenario settings.
struct RunOptions {
  unsigned threads = default_thread_count();
  SearchVariant variant = SearchVariant::Cached;
  std::optional<std::size_t> n_r;
  std::optional<std::size_t> phi_steps;
  std::optional<std::size_t> theta_steps;
  std::optional<double> eps1;
  std::optional<double> eps2;
  std::optional<Integrator> integrator;

  SearchParams apply(SearchParams p) const;
};

int cmd_simulate(const std::string& scenario_path, std::ostream& data_out, std::ostream* truth_out,
                 const RunOptions& opts, std::ostream& err);
int cmd_reconstruct(const std::string& scenario_path, std::istream& data_in, std::ostream& out,
                    const RunOptions& opts, std::ostream& err);
int cmd_track(std::istream& solutions_in, std::ostream& out, std::ostream& err);
int cmd_table1(std::ostream& out, const RunOptions& opts);
int cmd_bundle(double phi, double theta, std::size_t count, double spread, std::ostream& out, std::ostream& err);
int cmd_generate(std::uint64_t seed, std::ostream& out);

// Reconstruction of the reflection point for the linear field c = x + y + 1
// with transmitter and receiver at the origin and launch angles (pi/2, pi/4).
struct Table1Row {
  double total_time = 0.0;
  double published_xp = 0.0;
  double analytic_xp = 0.0;  // (exp(sqrt(2) T / 2) - 1) / 2
  std::optional<Vec3> rk4;
  std::optional<Vec3> euler;
};

struct Table1Report {
  std::size_t rk4_n_r = 10000;
  std::size_t euler_n_r = 2000;
  std::vector<Table1Row> rows;
  double seconds = 0.0;
};

Table1Report run_table1(std::size_t rk4_n_r = 10000, std::size_t euler_n_r = 2000, unsigned threads = 1);

// Domain used for the Table-1 row with total time T: a ball on the x = y
// diagonal that contains the origin and keeps c >= 0.5.
DomainBound table1_domain(double total_time);

}  // namespace rayhop::cli
