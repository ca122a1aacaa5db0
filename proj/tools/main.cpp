#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <memory>

#include "commands.hpp"

using namespace rayhop;
using namespace rayhop::cli;

namespace {

// Output file, or stdout when the path is empty or "-".
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (!path.empty() && path != "-") {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
      if (!*file_) throw ValidationError("cannot open output file " + path);
    }
  }
  std::ostream& get() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

std::unique_ptr<std::ifstream> open_input(const std::string& path) {
  auto in = std::make_unique<std::ifstream>(path, std::ios::binary);
  if (!*in) throw ValidationError("cannot open input file " + path);
  return in;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rayhop: broken-ray reflection point reconstruction and reflective routing"};
  app.require_subcommand(1);

  RunOptions opts;
  std::string variant = "cached";
  std::string integrator;
  std::uint64_t seed = 1;

  auto add_run_flags = [&](CLI::App* sub) {
    sub->add_option("--threads", opts.threads, "worker threads")->envname("RAYHOP_THREADS")->check(CLI::PositiveNumber);
    sub->add_option("--integrator", integrator, "euler | rk4")
        ->envname("RAYHOP_INTEGRATOR")
        ->check(CLI::IsMember({"euler", "rk4"}));
  };
  auto add_search_flags = [&](CLI::App* sub) {
    add_run_flags(sub);
    sub->add_option("--variant", variant, "brute | cached")
        ->envname("RAYHOP_VARIANT")
        ->check(CLI::IsMember({"brute", "cached"}));
    sub->add_option("--nr", opts.n_r, "time steps per data point")->envname("RAYHOP_NR");
    sub->add_option("--phi-steps", opts.phi_steps, "receiver incident-angle cells")->envname("RAYHOP_PHI_STEPS");
    sub->add_option("--theta-steps", opts.theta_steps, "receiver azimuth cells")->envname("RAYHOP_THETA_STEPS");
    sub->add_option("--eps1", opts.eps1, "position tolerance (m)")->envname("RAYHOP_EPS1");
    sub->add_option("--eps2", opts.eps2, "time tolerance (s)")->envname("RAYHOP_EPS2");
  };

  std::string scenario, data_path, out_path, truth_path, solutions_path;

  auto* sim = app.add_subcommand("simulate", "synthesise broken-ray data points for a scenario");
  sim->add_option("scenario", scenario, "scenario file")->required();
  sim->add_option("-o,--out", out_path, "data point CSV (default stdout)");
  sim->add_option("--truth", truth_path, "ground truth CSV");
  add_run_flags(sim);

  auto* rec = app.add_subcommand("reconstruct", "reconstruct reflection points from data points");
  rec->add_option("scenario", scenario, "scenario file")->required();
  rec->add_option("data", data_path, "data point CSV")->required();
  rec->add_option("-o,--out", out_path, "solutions CSV (default stdout)");
  add_search_flags(rec);

  auto* trk = app.add_subcommand("track", "summarise solutions per sampling interval");
  trk->add_option("solutions", solutions_path, "solutions CSV")->required();
  trk->add_option("-o,--out", out_path, "trajectory CSV (default stdout)");

  auto* tab = app.add_subcommand("table1", "reflection points for c = x + y + 1 at T = 2, 4, 8");
  add_search_flags(tab);

  double phi = 0.0, theta = 0.0, spread = 0.01;
  std::size_t count = 5;
  auto* bun = app.add_subcommand("bundle", "parallel ray bundle around an IHOP address");
  bun->add_option("--phi", phi, "incident angle (rad)")->required();
  bun->add_option("--theta", theta, "azimuth (rad)")->required();
  bun->add_option("--count", count, "number of rays");
  bun->add_option("--spread", spread, "cone half-angle (rad)");
  bun->add_option("-o,--out", out_path, "address CSV (default stdout)");

  auto* gen = app.add_subcommand("generate", "write a random moving-sphere scenario");
  gen->add_option("--seed", seed, "random seed")->envname("RAYHOP_SEED");
  gen->add_option("-o,--out", out_path, "scenario file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kInvalidInput;
  }

  if (!integrator.empty()) opts.integrator = integrator == "euler" ? Integrator::Euler : Integrator::RK4;
  opts.variant = variant == "brute" ? SearchVariant::BruteForce : SearchVariant::Cached;

  try {
    if (*sim) {
      Sink out(out_path);
      std::unique_ptr<Sink> truth;
      if (!truth_path.empty()) truth = std::make_unique<Sink>(truth_path);
      return cmd_simulate(scenario, out.get(), truth ? &truth->get() : nullptr, opts, std::cerr);
    }
    if (*rec) {
      auto in = open_input(data_path);
      Sink out(out_path);
      return cmd_reconstruct(scenario, *in, out.get(), opts, std::cerr);
    }
    if (*trk) {
      auto in = open_input(solutions_path);
      Sink out(out_path);
      return cmd_track(*in, out.get(), std::cerr);
    }
    if (*tab) return cmd_table1(std::cout, opts);
    if (*bun) {
      Sink out(out_path);
      return cmd_bundle(phi, theta, count, spread, out.get(), std::cerr);
    }
    if (*gen) {
      Sink out(out_path);
      return cmd_generate(seed, out.get());
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalidInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumericalFailure;
  }
  return kOk;
}
