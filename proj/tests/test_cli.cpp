#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "commands.hpp"
#include "oracles.hpp"

using namespace rayhop;
using namespace rayhop::cli;
namespace fs = std::filesystem;

namespace {

const std::string kTable1 = std::string(RAYHOP_SCENARIOS) + "/table1.yaml";
const std::string kMoving = std::string(RAYHOP_SCENARIOS) + "/moving_sphere.yaml";

class Workdir {
 public:
  Workdir() {
    dir_ = fs::temp_directory_path() / ("rayhop_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter_++));
    fs::create_directories(dir_);
  }
  ~Workdir() { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  std::string write(const std::string& name, const std::string& text) const {
    std::ofstream(path(name)) << text;
    return path(name);
  }

 private:
  static inline int counter_ = 0;
  fs::path dir_;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run(const std::string& args) {
  const int status = std::system((std::string(RAYHOP_EXE) + " " + args + " 2>/dev/null >/dev/null").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

RunOptions one_thread() {
  RunOptions o;
  o.threads = 1;
  return o;
}

std::string simulate(const std::string& scenario, std::string* truth = nullptr) {
  std::stringstream data, gt, err;
  EXPECT_EQ(cmd_simulate(scenario, data, &gt, one_thread(), err), kOk) << err.str();
  if (truth) *truth = gt.str();
  return data.str();
}

std::string reconstruct(const std::string& scenario, const std::string& data, RunOptions opts = one_thread()) {
  std::stringstream in(data), out, err;
  EXPECT_EQ(cmd_reconstruct(scenario, in, out, opts, err), kOk) << err.str();
  return out.str();
}

const char* kValidScenario = R"(domain: {center: [0, 0, 0], radius: 3}
speed_field: {kind: constant, c0: 1}
obstacle:
  radius: 0.5
  path: [{t: 0, center: [1, 0, 0]}]
  intervals: [[0, 1]]
transmitters: [[-1, 0, 0]]
receivers: [[-1, 0, 0]]
launch_grid: {phi: [pi/2, pi/2, 1], theta: [0, 0, 1]}
simulation: {max_time: 4, steps: 4000}
search: {n_r: 200, phi_steps: 1, theta_steps: 8}
)";

}  // namespace

TEST(Scenario, Loads) {
  const Scenario sc = load_scenario_text(kValidScenario);
  EXPECT_EQ(sc.sim.transmitters.size(), 1u);
  EXPECT_EQ(sc.launch.size(), 1u);
  EXPECT_EQ(sc.search.n_r, 200u);
  EXPECT_DOUBLE_EQ(sc.launch.phi_min, std::numbers::pi / 2);
  EXPECT_STREQ(sc.sim.field.kind(), "constant");
  EXPECT_NO_THROW(load_scenario(kTable1));
  EXPECT_NO_THROW(load_scenario(kMoving));
}

TEST(Scenario, ParseAngle) {
  EXPECT_DOUBLE_EQ(parse_angle("pi/2"), std::numbers::pi / 2);
  EXPECT_DOUBLE_EQ(parse_angle("3*pi/4"), 3 * std::numbers::pi / 4);
  EXPECT_DOUBLE_EQ(parse_angle("-pi"), -std::numbers::pi);
  EXPECT_DOUBLE_EQ(parse_angle("0.785"), 0.785);
  EXPECT_THROW(parse_angle("tau"), ValidationError);
}

TEST(Scenario, ErrorsCarryLine) {
  std::string text = kValidScenario;
  text.replace(text.find("[1, 0, 0]"), 9, "[2.8, 0, 0]");
  try {
    load_scenario_text(text, "bad.yaml");
    FAIL() << "expected a scenario error";
  } catch (const ScenarioError& e) {
    EXPECT_EQ(e.line(), 5);
    EXPECT_NE(std::string(e.what()).find("bad.yaml:5"), std::string::npos);
  }
  std::string neg = kValidScenario;
  neg.replace(neg.find("c0: 1"), 5, "c0: -1");
  EXPECT_THROW(load_scenario_text(neg), ScenarioError);
  std::string outside = kValidScenario;
  outside.replace(outside.find("receivers: [[-1, 0, 0]]"), 23, "receivers: [[-5, 0, 0]]");
  EXPECT_THROW(load_scenario_text(outside), ScenarioError);
  EXPECT_THROW(load_scenario_text("domain: [1, 2"), ScenarioError);
}

TEST(Simulate, Table1Scenario) {
  std::stringstream in(simulate(kTable1));
  const auto pts = csv::read_datapoints(in);
  ASSERT_EQ(pts.size(), 3u);
  const double expected[] = {2.0, 4.0, 8.0};
  for (int i = 0; i < 3; ++i) {
    EXPECT_NEAR(pts[i].t, expected[i], 1e-4);
    EXPECT_EQ(pts[i].interval, i);
  }
}

TEST(Simulate, EmptyLaunchGrid) {
  Workdir w;
  std::string text = kValidScenario;
  text.replace(text.find("theta: [0, 0, 1]"), 16, "theta: [0, 0, 0]");
  const std::string data = simulate(w.write("s.yaml", text));
  EXPECT_EQ(data, std::string(csv::kDataPointHeader) + "\n");
}

TEST(Simulate, InvalidScenarioExitCode) {
  Workdir w;
  std::string text = kValidScenario;
  text.replace(text.find("[1, 0, 0]"), 9, "[2.8, 0, 0]");
  const std::string path = w.write("s.yaml", text);
  std::stringstream data, err;
  EXPECT_EQ(cmd_simulate(path, data, nullptr, one_thread(), err), kInvalidInput);
  EXPECT_NE(err.str().find("s.yaml:5"), std::string::npos);
  EXPECT_EQ(run("simulate " + path), 2);
  EXPECT_EQ(run("simulate " + w.path("missing.yaml")), 2);
  EXPECT_EQ(run("simulate"), 2);
  EXPECT_EQ(run("frobnicate"), 2);
}

TEST(Reconstruct, Table1Rows) {
  RunOptions opts;
  opts.threads = 8;
  std::stringstream in(reconstruct(kTable1, simulate(kTable1), opts));
  const auto rows = csv::read_solutions(in);
  ASSERT_EQ(rows.size(), 3u);
  const double totals[] = {2.0, 4.0, 8.0};
  for (int i = 0; i < 3; ++i) {
    ASSERT_TRUE(rows[i].solution) << i;
    const double x = oracle::diagonal_coordinate(totals[i] / 2);
    EXPECT_NEAR(rows[i].solution->p_k.x / x, 1.0, 0.005);
    EXPECT_NEAR(rows[i].solution->p_k.y / x, 1.0, 0.005);
    EXPECT_EQ(rows[i].interval, i);
  }
}

TEST(Reconstruct, ThreadCountDoesNotChangeBytes) {
  const std::string data = simulate(kMoving);
  RunOptions a = one_thread(), b;
  b.threads = 8;
  EXPECT_EQ(reconstruct(kMoving, data, a), reconstruct(kMoving, data, b));
  a.variant = b.variant = SearchVariant::BruteForce;
  a.n_r = b.n_r = 120;
  a.theta_steps = b.theta_steps = 180;
  EXPECT_EQ(reconstruct(kMoving, data, a), reconstruct(kMoving, data, b));
}

TEST(Reconstruct, CorruptCsv) {
  Workdir w;
  const std::string data = "xl,yl,zl,xr,yr,zr,phi,theta,t,xi,interval\n"
                           "0,0,0,0,0,0,1.57,0.78,2,40000,0\n"
                           "0,0,0,0,0,0,1.57,oops,2,40000,0\n";
  std::stringstream in(data), out, err;
  EXPECT_EQ(cmd_reconstruct(kTable1, in, out, one_thread(), err), kInvalidInput);
  EXPECT_NE(err.str().find("line 3"), std::string::npos);
  EXPECT_EQ(run("reconstruct " + kTable1 + " " + w.write("d.csv", data)), 2);
  EXPECT_EQ(run("reconstruct " + kTable1 + " " + w.path("none.csv")), 2);
}

TEST(Reconstruct, OneRowPerInput) {
  const std::string data = "xl,yl,zl,xr,yr,zr,phi,theta,t,xi,interval\n"
                           "0,0,0,0,0,0,1.57079633,0.785398163,2,40000,0\n"
                           "0,0,0,5,0,0,1.57079633,0.785398163,1e-3,40000,0\n";
  std::stringstream in(reconstruct(kTable1, data));
  const auto rows = csv::read_solutions(in);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_TRUE(rows[0].solution);
  EXPECT_FALSE(rows[1].solution);
  EXPECT_EQ(rows[1].status, "time_budget_exhausted");
}

TEST(Track, Table1Trajectory) {
  std::stringstream sol(reconstruct(kTable1, simulate(kTable1))), out, err;
  ASSERT_EQ(cmd_track(sol, out, err), kOk);
  const auto est = csv::read_trajectory(out);
  ASSERT_EQ(est.intervals.size(), 3u);
  for (const auto& iv : est.intervals) {
    EXPECT_EQ(iv.count, 1u);
    EXPECT_NEAR(iv.centroid.x / iv.centroid.y, 1.0, 1e-6);
  }
  EXPECT_LT(est.intervals[0].centroid.x, est.intervals[1].centroid.x);
  EXPECT_LT(est.intervals[1].centroid.x, est.intervals[2].centroid.x);
}

TEST(Track, EmptyInput) {
  Workdir w;
  std::stringstream empty(std::string(csv::kSolutionHeader) + "\n"), out, err;
  EXPECT_EQ(cmd_track(empty, out, err), kInvalidInput);
  EXPECT_EQ(run("track " + w.write("s.csv", std::string(csv::kSolutionHeader) + "\n")), 2);
  EXPECT_EQ(run("track " + w.write("t.csv", "")), 2);
}

TEST(Track, MovingSpherePipeline) {
  std::string truth_csv;
  const std::string data = simulate(kMoving, &truth_csv);
  std::stringstream sol(reconstruct(kMoving, data)), out, err;
  ASSERT_EQ(cmd_track(sol, out, err), kOk);
  const auto recon = csv::read_trajectory(out);

  // Ground-truth trajectory from the simulated reflection points.
  std::stringstream din(data), tin(truth_csv);
  const auto pts = csv::read_datapoints(din);
  std::vector<TrackSample> samples;
  std::string line;
  std::getline(tin, line);
  for (std::size_t k = 0; std::getline(tin, line); ++k) {
    const auto f = csv::split(line);
    samples.push_back({pts[k].interval, Vec3{std::stod(f[1]), std::stod(f[2]), std::stod(f[3])}});
  }
  const auto truth = build_trajectory(samples);
  ASSERT_EQ(recon.populated().size(), 3u);
  const Vec3 dr = *recon.drift_per_interval();
  const Vec3 dt = *truth.drift_per_interval();
  EXPECT_LT(norm(dr - dt), 0.1 * norm(dt));
}

TEST(Table1, Report) {
  const auto rep = run_table1(10000, 2000, 1);
  ASSERT_EQ(rep.rows.size(), 3u);
  const double published[] = {1.55, 7.89, 138.15};
  for (int i = 0; i < 3; ++i) {
    const auto& r = rep.rows[i];
    EXPECT_EQ(r.published_xp, published[i]);
    ASSERT_TRUE(r.rk4);
    ASSERT_TRUE(r.euler);
    EXPECT_NEAR(r.rk4->x / r.analytic_xp, 1.0, 0.005);
    // The coarse Euler column falls below the closed form, more so for longer trips.
    EXPECT_LT(r.euler->x, r.analytic_xp);
    if (i > 0) {
      EXPECT_GT(1.0 - rep.rows[i].euler->x / rep.rows[i].analytic_xp,
                1.0 - rep.rows[i - 1].euler->x / rep.rows[i - 1].analytic_xp);
    }
  }
  std::stringstream out;
  EXPECT_EQ(cmd_table1(out, one_thread()), kOk);
  EXPECT_NE(out.str().find("138.15"), std::string::npos);
  EXPECT_NE(out.str().find("7.89"), std::string::npos);
}

TEST(Bundle, Command) {
  std::stringstream out, err;
  ASSERT_EQ(cmd_bundle(1.2, 0.5, 5, 0.01, out, err), kOk);
  const auto addrs = csv::read_addresses(out);
  ASSERT_EQ(addrs.size(), 5u);
  EXPECT_EQ(addrs[0].phi, 1.2);
  std::stringstream out2, err2;
  EXPECT_EQ(cmd_bundle(0.005, 0.5, 5, 0.01, out2, err2), kInvalidInput);
}

TEST(Generate, LoadableAndReproducible) {
  Workdir w;
  for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u, 6u}) {
    std::stringstream a, b;
    cmd_generate(seed, a);
    cmd_generate(seed, b);
    EXPECT_EQ(a.str(), b.str());
    EXPECT_NO_THROW(load_scenario(w.write("g.yaml", a.str()))) << a.str();
  }
}

TEST(Executable, ThreadsFlagKeepsBytes) {
  Workdir w;
  const std::string d = w.path("d.csv");
  ASSERT_EQ(run("simulate " + kMoving + " -o " + d + " --threads 1"), 0);
  ASSERT_EQ(run("simulate " + kMoving + " -o " + w.path("d4.csv") + " --threads 4"), 0);
  EXPECT_EQ(slurp(d), slurp(w.path("d4.csv")));
  ASSERT_EQ(run("reconstruct " + kMoving + " " + d + " -o " + w.path("s1.csv") + " --threads 1"), 0);
  ASSERT_EQ(run("reconstruct " + kMoving + " " + d + " -o " + w.path("s4.csv") + " --threads 4"), 0);
  EXPECT_EQ(slurp(w.path("s1.csv")), slurp(w.path("s4.csv")));
  ASSERT_EQ(run("track " + w.path("s1.csv") + " -o " + w.path("tr.csv")), 0);
  const std::string head = std::string(csv::kTrajectoryHeader) + "\n0,";
  EXPECT_EQ(slurp(w.path("tr.csv")).substr(0, head.size()), head);
  EXPECT_EQ(run("reconstruct " + kMoving + " " + d + " --variant fast"), 2);
}

TEST(Executable, EnvironmentOverride) {
  Workdir w;
  const std::string d = w.path("d.csv");
  ASSERT_EQ(run("simulate " + kMoving + " -o " + d), 0);
  ASSERT_EQ(run("reconstruct " + kMoving + " " + d + " -o " + w.path("a.csv") + " --nr 150"), 0);
  ASSERT_EQ(std::system(("RAYHOP_NR=150 " + std::string(RAYHOP_EXE) + " reconstruct " + kMoving + " " + d + " -o " +
                         w.path("b.csv") + " 2>/dev/null")
                            .c_str()),
            0);
  EXPECT_EQ(slurp(w.path("a.csv")), slurp(w.path("b.csv")));
  ASSERT_EQ(run("reconstruct " + kMoving + " " + d + " -o " + w.path("c.csv")), 0);
  EXPECT_NE(slurp(w.path("a.csv")), slurp(w.path("c.csv")));
}
