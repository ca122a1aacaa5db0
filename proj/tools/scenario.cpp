#include "scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace rayhop::cli {
namespace {

class Reader {
 public:
  explicit Reader(std::string file) : file_(std::move(file)) {}

  [[noreturn]] void fail(const YAML::Node& at, const std::string& what) const {
    const int line = at.IsDefined() && at.Mark().line >= 0 ? at.Mark().line + 1 : 0;
    throw ScenarioError(file_, line, what);
  }

  YAML::Node require(const YAML::Node& parent, const char* key) const {
    if (!parent.IsMap()) fail(parent, "expected a mapping");
    YAML::Node n = parent[key];
    if (!n) fail(parent, std::string("missing key '") + key + "'");
    return n;
  }

  double number(const YAML::Node& n, const std::string& what) const {
    if (!n.IsScalar()) fail(n, what + ": expected a number");
    const std::string& s = n.Scalar();
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v)) {
      fail(n, what + ": expected a number, got '" + s + "'");
    }
    return v;
  }

  double number_or(const YAML::Node& parent, const char* key, double fallback) const {
    YAML::Node n = parent[key];
    return n ? number(n, key) : fallback;
  }

  std::size_t count(const YAML::Node& n, const std::string& what) const {
    const double v = number(n, what);
    if (v < 0 || v != std::floor(v) || v > 1e12) fail(n, what + ": expected a non-negative integer");
    return static_cast<std::size_t>(v);
  }

  double angle(const YAML::Node& n, const std::string& what) const {
    if (!n.IsScalar()) fail(n, what + ": expected an angle");
    try {
      return parse_angle(n.Scalar());
    } catch (const ValidationError& e) {
      fail(n, what + ": " + e.what());
    }
  }

  Vec3 point(const YAML::Node& n, const std::string& what) const {
    if (!n.IsSequence() || n.size() != 3) fail(n, what + ": expected [x, y, z]");
    return {number(n[0], what), number(n[1], what), number(n[2], what)};
  }

  Integrator integrator(const YAML::Node& parent, Integrator fallback) const {
    YAML::Node n = parent["integrator"];
    if (!n) return fallback;
    if (!n.IsScalar()) fail(n, "integrator: expected euler or rk4");
    if (n.Scalar() == "euler") return Integrator::Euler;
    if (n.Scalar() == "rk4") return Integrator::RK4;
    fail(n, "integrator: expected euler or rk4, got '" + n.Scalar() + "'");
  }

  SpeedField speed_field(const YAML::Node& n) const {
    const std::string kind = require(n, "kind").as<std::string>();
    if (kind == "constant") return SpeedField::constant(number(require(n, "c0"), "c0"));
    if (kind == "linear") {
      return SpeedField::linear(number(require(n, "a"), "a"), number(require(n, "b"), "b"),
                                number(require(n, "c"), "c"), number(require(n, "d"), "d"));
    }
    if (kind == "radial") {
      return SpeedField::radial(point(require(n, "center"), "center"), number(require(n, "base"), "base"),
                                number(require(n, "coeff"), "coeff"));
    }
    fail(n["kind"], "unknown speed field kind '" + kind + "'");
  }

 private:
  std::string file_;
};

}  // namespace

double parse_angle(const std::string& text) {
  std::string s;
  for (char ch : text) {
    if (ch != ' ') s += ch;
  }
  auto to_num = [&](const std::string& part) {
    double v = 0.0;
    auto res = std::from_chars(part.data(), part.data() + part.size(), v);
    if (part.empty() || res.ec != std::errc() || res.ptr != part.data() + part.size() || !std::isfinite(v)) {
      throw ValidationError("cannot parse angle '" + text + "'");
    }
    return v;
  };
  const std::size_t pi = s.find("pi");
  if (pi == std::string::npos) return to_num(s);

  std::string head = s.substr(0, pi);
  std::string tail = s.substr(pi + 2);
  double coeff = 1.0;
  if (head == "-") {
    coeff = -1.0;
  } else if (!head.empty()) {
    if (head.back() != '*') throw ValidationError("cannot parse angle '" + text + "'");
    head.pop_back();
    coeff = to_num(head);
  }
  double denom = 1.0;
  if (!tail.empty()) {
    if (tail.front() != '/') throw ValidationError("cannot parse angle '" + text + "'");
    denom = to_num(tail.substr(1));
    if (denom == 0.0) throw ValidationError("cannot parse angle '" + text + "'");
  }
  return coeff * std::numbers::pi / denom;
}

Scenario load_scenario_text(const std::string& text, const std::string& name) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ScenarioError(name, e.mark.line >= 0 ? e.mark.line + 1 : 0, e.msg);
  }
  Reader rd(name);
  if (!root.IsMap()) rd.fail(root, "scenario must be a mapping");

  Scenario sc;
  try {
    const YAML::Node dom = rd.require(root, "domain");
    const double radius = rd.number(rd.require(dom, "radius"), "radius");
    if (!(radius > 0.0)) rd.fail(dom["radius"], "domain radius must be positive");
    sc.sim.domain = DomainBound(rd.point(rd.require(dom, "center"), "center"), radius);

    const YAML::Node sf = rd.require(root, "speed_field");
    sc.sim.field = rd.speed_field(sf);
    const SpeedBounds sb = sc.sim.field.bounds(sc.sim.domain);
    if (!(sb.min > 0.0)) rd.fail(sf, "speed of sound is not positive everywhere in the domain");

    const YAML::Node ob = rd.require(root, "obstacle");
    const double orad = rd.number(rd.require(ob, "radius"), "obstacle radius");
    if (!(orad > 0.0)) rd.fail(ob["radius"], "obstacle radius must be positive");
    const YAML::Node path = rd.require(ob, "path");
    if (!path.IsSequence() || path.size() == 0) rd.fail(path, "obstacle path must be a non-empty list");
    std::vector<ObstacleTrajectory::Knot> knots;
    for (const auto& k : path) {
      knots.push_back({rd.number(rd.require(k, "t"), "t"), rd.point(rd.require(k, "center"), "center")});
      if (knots.size() > 1 && !(knots.back().time > knots[knots.size() - 2].time)) {
        rd.fail(k, "obstacle path times must increase");
      }
    }
    const YAML::Node ivs = rd.require(ob, "intervals");
    if (!ivs.IsSequence() || ivs.size() == 0) rd.fail(ivs, "intervals must be a non-empty list");
    std::vector<SamplingInterval> intervals;
    for (const auto& iv : ivs) {
      if (!iv.IsSequence() || iv.size() != 2) rd.fail(iv, "interval must be [start, end]");
      SamplingInterval s{rd.number(iv[0], "interval start"), rd.number(iv[1], "interval end")};
      if (!(s.end > s.start)) rd.fail(iv, "interval end must exceed its start");
      if (!intervals.empty() && s.start < intervals.back().end) rd.fail(iv, "intervals must be ordered and disjoint");
      intervals.push_back(s);
    }
    sc.sim.obstacle = ObstacleTrajectory(orad, knots, intervals);
    for (std::size_t i = 0; i < knots.size(); ++i) {
      if (!(distance(knots[i].center, sc.sim.domain.center()) + orad < sc.sim.domain.radius())) {
        rd.fail(path[i], "obstacle is not strictly inside the domain");
      }
    }

    auto points = [&](const char* key, std::vector<Vec3>& out) {
      const YAML::Node list = rd.require(root, key);
      if (!list.IsSequence() || list.size() == 0) rd.fail(list, std::string(key) + " must be a non-empty list");
      for (const auto& p : list) {
        const Vec3 v = rd.point(p, key);
        if (!sc.sim.domain.contains(v)) rd.fail(p, std::string(key) + ": position outside the domain");
        for (std::size_t i = 0; i < knots.size(); ++i) {
          if (distance(v, knots[i].center) <= orad) rd.fail(p, std::string(key) + ": position inside the obstacle");
        }
        out.push_back(v);
      }
    };
    points("transmitters", sc.sim.transmitters);
    points("receivers", sc.sim.receivers);

    if (const YAML::Node lg = root["launch_grid"]) {
      auto axis = [&](const char* key, double& lo, double& hi, std::size_t& n) {
        const YAML::Node a = rd.require(lg, key);
        if (!a.IsSequence() || a.size() != 3) rd.fail(a, std::string(key) + ": expected [min, max, count]");
        lo = rd.angle(a[0], key);
        hi = rd.angle(a[1], key);
        n = rd.count(a[2], key);
      };
      axis("phi", sc.launch.phi_min, sc.launch.phi_max, sc.launch.phi_count);
      axis("theta", sc.launch.theta_min, sc.launch.theta_max, sc.launch.theta_count);
    }

    if (const YAML::Node sim = root["simulation"]) {
      sc.sim.max_time = rd.number_or(sim, "max_time", sc.sim.max_time);
      if (sim["steps"]) sc.sim.n_steps = rd.count(sim["steps"], "steps");
      sc.sim.capture_radius = rd.number_or(sim, "capture_radius", 0.0);
      sc.sim.xi = rd.number_or(sim, "xi", sc.sim.xi);
      sc.sim.integrator = rd.integrator(sim, Integrator::RK4);
      if (!(sc.sim.max_time > 0.0)) rd.fail(sim, "simulation max_time must be positive");
      if (sc.sim.n_steps < 1) rd.fail(sim, "simulation steps must be positive");
    }

    if (const YAML::Node se = root["search"]) {
      if (se["n_r"]) sc.search.n_r = rd.count(se["n_r"], "n_r");
      if (se["phi_steps"]) sc.search.phi_steps = rd.count(se["phi_steps"], "phi_steps");
      if (se["theta_steps"]) sc.search.theta_steps = rd.count(se["theta_steps"], "theta_steps");
      sc.search.eps1 = rd.number_or(se, "eps1", 0.0);
      sc.search.eps2 = rd.number_or(se, "eps2", 0.0);
      sc.search.integrator = rd.integrator(se, Integrator::RK4);
      if (sc.search.n_r < 2) rd.fail(se, "n_r must be at least 2");
      if (sc.search.phi_steps < 1 || sc.search.theta_steps < 1) rd.fail(se, "angle grid must be non-empty");
      if (sc.search.eps1 < 0.0 || sc.search.eps2 < 0.0) rd.fail(se, "tolerances must be non-negative");
    }

    sc.sim.validate();
  } catch (const YAML::Exception& e) {
    throw ScenarioError(name, e.mark.line >= 0 ? e.mark.line + 1 : 0, e.msg);
  } catch (const ScenarioError&) {
    throw;
  } catch (const ValidationError& e) {
    throw ScenarioError(name, 0, e.what());
  }
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError(path, 0, "cannot open scenario file");
  std::stringstream ss;
  ss << in.rdbuf();
  return load_scenario_text(ss.str(), path);
}

}  // namespace rayhop::cli
