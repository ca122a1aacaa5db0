#pragma once

// CSV formats exchanged between pipeline stages. Numbers are written with 9
// significant digits using '.' as decimal separator regardless of locale.

#include <charconv>
#include <cmath>
#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "rayhop/errors.hpp"
#include "rayhop/reconstructor.hpp"
#include "rayhop/scene.hpp"
#include "rayhop/tracker.hpp"

namespace rayhop::csv {

inline constexpr std::string_view kDataPointHeader = "xl,yl,zl,xr,yr,zr,phi,theta,t,xi,interval";
inline constexpr std::string_view kGroundTruthHeader = "k,px,py,pz,tau,a_phi,a_theta,miss";
inline constexpr std::string_view kSolutionHeader =
    "k,px,py,pz,tau,a_phi,a_theta,residual_d,residual_t,status,interval";
inline constexpr std::string_view kTrajectoryHeader = "interval,cx,cy,cz,count,radius";
inline constexpr std::string_view kAddressHeader = "phi,theta";

inline std::string fmt(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 9);
  return std::string(buf, res.ptr);
}

class ParseError : public ValidationError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : ValidationError("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct Row {
  std::size_t line = 0;
  std::vector<std::string> fields;
};

inline std::vector<std::string> split(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = s.find(',', start);
    std::string_view f = s.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    while (!f.empty() && (f.front() == ' ' || f.front() == '\t')) f.remove_prefix(1);
    while (!f.empty() && (f.back() == ' ' || f.back() == '\t' || f.back() == '\r')) f.remove_suffix(1);
    out.emplace_back(f);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

// Reads all rows after the header, checking the header and column count.
inline std::vector<Row> read_table(std::istream& in, std::string_view header) {
  std::vector<Row> rows;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  const std::size_t width = split(header).size();
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!have_header) {
      if (line != header) throw ParseError(lineno, "expected header '" + std::string(header) + "'");
      have_header = true;
      continue;
    }
    Row r{lineno, split(line)};
    if (r.fields.size() != width) {
      throw ParseError(lineno, "expected " + std::to_string(width) + " columns, got " + std::to_string(r.fields.size()));
    }
    rows.push_back(std::move(r));
  }
  if (!have_header) throw ParseError(lineno, "missing header");
  return rows;
}

inline double parse_double(const Row& r, std::size_t col) {
  const std::string& f = r.fields[col];
  double v = 0.0;
  auto res = std::from_chars(f.data(), f.data() + f.size(), v);
  if (f.empty() || res.ec != std::errc() || res.ptr != f.data() + f.size() || !std::isfinite(v)) {
    throw ParseError(r.line, "column " + std::to_string(col + 1) + ": not a finite number: '" + f + "'");
  }
  return v;
}

inline long parse_int(const Row& r, std::size_t col) {
  const std::string& f = r.fields[col];
  long v = 0;
  auto res = std::from_chars(f.data(), f.data() + f.size(), v);
  if (f.empty() || res.ec != std::errc() || res.ptr != f.data() + f.size()) {
    throw ParseError(r.line, "column " + std::to_string(col + 1) + ": not an integer: '" + f + "'");
  }
  return v;
}

// ---- data points ---------------------------------------------------------

inline void write_datapoints(std::ostream& out, const std::vector<DataPoint>& pts) {
  out << kDataPointHeader << '\n';
  for (const auto& b : pts) {
    out << fmt(b.transmitter.x) << ',' << fmt(b.transmitter.y) << ',' << fmt(b.transmitter.z) << ','
        << fmt(b.receiver.x) << ',' << fmt(b.receiver.y) << ',' << fmt(b.receiver.z) << ',' << fmt(b.phi) << ','
        << fmt(b.theta) << ',' << fmt(b.t) << ',' << fmt(b.xi) << ',' << b.interval << '\n';
  }
}

inline std::vector<DataPoint> read_datapoints(std::istream& in) {
  std::vector<DataPoint> pts;
  for (const Row& r : read_table(in, kDataPointHeader)) {
    DataPoint b;
    b.transmitter = {parse_double(r, 0), parse_double(r, 1), parse_double(r, 2)};
    b.receiver = {parse_double(r, 3), parse_double(r, 4), parse_double(r, 5)};
    b.phi = parse_double(r, 6);
    b.theta = parse_double(r, 7);
    b.t = parse_double(r, 8);
    b.xi = parse_double(r, 9);
    b.interval = static_cast<int>(parse_int(r, 10));
    if (!(b.t > 0.0)) throw ParseError(r.line, "time of flight must be positive");
    pts.push_back(b);
  }
  return pts;
}

inline void write_ground_truth(std::ostream& out, const std::vector<GroundTruth>& truth) {
  out << kGroundTruthHeader << '\n';
  for (std::size_t k = 0; k < truth.size(); ++k) {
    const auto& g = truth[k];
    out << k << ',' << fmt(g.reflection_point.x) << ',' << fmt(g.reflection_point.y) << ','
        << fmt(g.reflection_point.z) << ',' << fmt(g.tau) << ',' << fmt(g.receiver_angles.phi) << ','
        << fmt(g.receiver_angles.theta) << ',' << fmt(g.miss_distance) << '\n';
  }
}

// ---- solutions -----------------------------------------------------------

struct SolutionRow {
  std::size_t k = 0;
  int interval = 0;
  std::optional<ReflectionSolution> solution;
  std::string status = "ok";
};

inline void write_solutions(std::ostream& out, const std::vector<SolutionRow>& rows) {
  out << kSolutionHeader << '\n';
  for (const auto& r : rows) {
    out << r.k << ',';
    if (r.solution) {
      const auto& s = *r.solution;
      out << fmt(s.p_k.x) << ',' << fmt(s.p_k.y) << ',' << fmt(s.p_k.z) << ',' << fmt(s.tau) << ','
          << fmt(s.receiver_angles.phi) << ',' << fmt(s.receiver_angles.theta) << ',' << fmt(s.residual_distance)
          << ',' << fmt(s.residual_time) << ',';
    } else {
      out << ",,,,,,,,";
    }
    out << r.status << ',' << r.interval << '\n';
  }
}

inline std::vector<SolutionRow> solution_rows(const std::vector<DataPoint>& pts,
                                              const std::vector<Reconstruction>& results) {
  std::vector<SolutionRow> rows;
  for (std::size_t k = 0; k < results.size(); ++k) {
    SolutionRow row;
    row.k = k;
    row.interval = pts[k].interval;
    if (found(results[k])) {
      row.solution = solution_of(results[k]);
    } else {
      row.status = to_string(std::get<NoSolution>(results[k]).reason);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

// Reads back the columns that were written; tolerance bookkeeping is not stored.
inline std::vector<SolutionRow> read_solutions(std::istream& in) {
  std::vector<SolutionRow> rows;
  for (const Row& r : read_table(in, kSolutionHeader)) {
    SolutionRow row;
    const long k = parse_int(r, 0);
    if (k < 0) throw ParseError(r.line, "negative row index");
    row.k = static_cast<std::size_t>(k);
    row.status = r.fields[9];
    row.interval = static_cast<int>(parse_int(r, 10));
    if (row.status == "ok") {
      ReflectionSolution s;
      s.p_k = {parse_double(r, 1), parse_double(r, 2), parse_double(r, 3)};
      s.tau = parse_double(r, 4);
      s.receiver_angles = {parse_double(r, 5), parse_double(r, 6)};
      s.residual_distance = parse_double(r, 7);
      s.residual_time = parse_double(r, 8);
      row.solution = s;
    } else {
      if (row.status.empty()) throw ParseError(r.line, "empty status");
      for (std::size_t c = 1; c <= 8; ++c) {
        if (!r.fields[c].empty()) throw ParseError(r.line, "failed row carries solution values");
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

// ---- trajectory and addresses ----------------------------------------------

inline void write_trajectory(std::ostream& out, const TrajectoryEstimate& est) {
  out << kTrajectoryHeader << '\n';
  for (const auto& s : est.intervals) {
    out << s.interval << ',';
    if (s.gap()) {
      out << ",,,0,\n";
    } else {
      out << fmt(s.centroid.x) << ',' << fmt(s.centroid.y) << ',' << fmt(s.centroid.z) << ',' << s.count << ','
          << fmt(s.radius) << '\n';
    }
  }
}

inline TrajectoryEstimate read_trajectory(std::istream& in) {
  TrajectoryEstimate est;
  for (const Row& r : read_table(in, kTrajectoryHeader)) {
    IntervalSummary s;
    s.interval = static_cast<int>(parse_int(r, 0));
    const long count = parse_int(r, 4);
    if (count < 0) throw ParseError(r.line, "negative count");
    s.count = static_cast<std::size_t>(count);
    if (s.count > 0) {
      s.centroid = {parse_double(r, 1), parse_double(r, 2), parse_double(r, 3)};
      s.radius = parse_double(r, 5);
    }
    est.intervals.push_back(s);
  }
  return est;
}

inline void write_addresses(std::ostream& out, const std::vector<IhopAddress>& addrs) {
  out << kAddressHeader << '\n';
  for (const auto& a : addrs) out << fmt(a.phi) << ',' << fmt(a.theta) << '\n';
}

inline std::vector<IhopAddress> read_addresses(std::istream& in) {
  std::vector<IhopAddress> out;
  for (const Row& r : read_table(in, kAddressHeader)) out.push_back({parse_double(r, 0), parse_double(r, 1)});
  return out;
}

}  // namespace rayhop::csv
