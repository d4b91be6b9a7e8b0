#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <queue>
#include <sstream>
#include <string>
#include <vector>

#include "feasplan/core.hpp"
#include "feasplan/trajectory.hpp"

namespace feasplan {

// Heading set whose angles are exact cell-center directions. N = 4 uses the
// axes; N = 8m uses the 8m cells of the L-infinity ring of radius m.
inline std::vector<double> derive_headings(int heading_bins) {
  std::vector<double> out;
  if (heading_bins == 4) {
    for (int k = 0; k < 4; ++k) out.push_back(k * kPi / 2.0);
    return out;
  }
  if (heading_bins < 8 || heading_bins % 8 != 0) {
    throw InvalidArgument("heading count " + std::to_string(heading_bins) +
                          " has no cell-center realization; use 4 or a multiple of 8");
  }
  const int m = heading_bins / 8;
  for (int j = -m; j <= m; ++j) {
    for (int i = -m; i <= m; ++i) {
      if (std::max(std::abs(i), std::abs(j)) == m) out.push_back(normalize_angle(std::atan2(j, i)));
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Index of the heading closest to theta.
inline int nearest_heading_bin(const std::vector<double>& headings, double theta) {
  int best = 0;
  double err = std::numeric_limits<double>::infinity();
  for (int k = 0; k < static_cast<int>(headings.size()); ++k) {
    const double e = std::abs(angle_diff(theta, headings[k]));
    if (e < err) {
      err = e;
      best = k;
    }
  }
  return best;
}

struct ControlSet {
  static constexpr int kVersion = 1;

  double resolution = 0.05;
  double turning_radius = 1.0;
  int heading_bins = 16;
  std::vector<double> headings;
  std::vector<MotionPrimitive> primitives;  // sorted by start heading bin, ids sequential

  std::vector<std::vector<int>> by_start_heading() const {
    std::vector<std::vector<int>> out(static_cast<std::size_t>(heading_bins));
    for (int k = 0; k < static_cast<int>(primitives.size()); ++k) {
      out[static_cast<std::size_t>(primitives[k].start_heading_bin)].push_back(k);
    }
    return out;
  }

  friend bool operator==(const ControlSet&, const ControlSet&) = default;
};

class ControlSetFormatError : public Error {
 public:
  using Error::Error;
};
class ControlSetVersionError : public Error {
 public:
  using Error::Error;
};
class ControlSetInvariantError : public Error {
 public:
  using Error::Error;
};

// Lattice offset of a primitive's end pose, in cells.
inline std::pair<int, int> primitive_end_cell(const MotionPrimitive& p, double resolution) {
  const PoseSE2& e = p.poses.back();
  return {static_cast<int>(std::lround(e.x / resolution)), static_cast<int>(std::lround(e.y / resolution))};
}

namespace lattice_detail {

struct Edge {
  int dx = 0;
  int dy = 0;
  int end_bin = 0;
  double length = 0.0;
};
using EdgeTable = std::vector<std::vector<Edge>>;

inline Edge edge_of(const MotionPrimitive& p, double resolution) {
  const auto [dx, dy] = primitive_end_cell(p, resolution);
  return {dx, dy, p.end_heading_bin, p.length};
}

// Shortest concatenation length from (0, 0, start_bin) to every lattice state
// reachable within `bound` meters.
class ReachTable {
 public:
  ReachTable() = default;
  ReachTable(const EdgeTable& edges, int start_bin, double bound, double resolution, int bins)
      : bound_(bound), bins_(bins) {
    half_ = static_cast<int>(std::ceil(bound / resolution)) + 1;
    const int side = 2 * half_ + 1;
    dist_.assign(static_cast<std::size_t>(side) * side * bins, std::numeric_limits<double>::infinity());
    using Item = std::pair<double, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
    const std::size_t s = slot(0, 0, start_bin);
    dist_[s] = 0.0;
    open.push({0.0, s});
    while (!open.empty()) {
      const auto [d, u] = open.top();
      open.pop();
      if (d > dist_[u]) continue;
      const int h = static_cast<int>(u % bins);
      const int y = static_cast<int>((u / bins) % side) - half_;
      const int x = static_cast<int>(u / bins / side) - half_;
      for (const Edge& e : edges[static_cast<std::size_t>(h)]) {
        const double nd = d + e.length;
        if (nd > bound) continue;
        const int nx = x + e.dx, ny = y + e.dy;
        if (std::abs(nx) > half_ || std::abs(ny) > half_) continue;
        const std::size_t v = slot(nx, ny, e.end_bin);
        if (nd < dist_[v]) {
          dist_[v] = nd;
          open.push({nd, v});
        }
      }
    }
  }

  double bound() const { return bound_; }
  bool empty() const { return dist_.empty(); }

  double at(int x, int y, int h) const {
    if (std::abs(x) > half_ || std::abs(y) > half_) return std::numeric_limits<double>::infinity();
    return dist_[slot(x, y, ((h % bins_) + bins_) % bins_)];
  }

 private:
  std::size_t slot(int x, int y, int h) const {
    const int side = 2 * half_ + 1;
    return (static_cast<std::size_t>(x + half_) * side + (y + half_)) * bins_ + h;
  }

  double bound_ = 0.0;
  int bins_ = 0;
  int half_ = 0;
  std::vector<double> dist_;
};

// One of the 8 grid symmetries: reflect y when `mirror`, then rotate by k * 90 degrees.
struct GridSymmetry {
  int quarter_turns = 0;
  bool mirror = false;

  Point2 apply(Point2 p) const {
    if (mirror) p.y = -p.y;
    for (int k = 0; k < quarter_turns; ++k) p = Point2{-p.y, p.x};
    return p;
  }
  double apply_heading(double theta) const {
    return normalize_angle((mirror ? -theta : theta) + quarter_turns * kPi / 2.0);
  }
};

inline std::vector<GridSymmetry> grid_symmetries() {
  std::vector<GridSymmetry> out;
  for (bool m : {false, true}) {
    for (int k = 0; k < 4; ++k) out.push_back({k, m});
  }
  return out;
}

inline MotionPrimitive transform_primitive(const MotionPrimitive& p, const GridSymmetry& s,
                                           const std::vector<double>& headings) {
  MotionPrimitive q = p;
  for (PoseSE2& pose : q.poses) {
    const Point2 xy = s.apply(pose.position());
    pose = PoseSE2(xy.x, xy.y, s.apply_heading(pose.theta));
  }
  q.start_heading_bin = nearest_heading_bin(headings, s.apply_heading(headings[p.start_heading_bin]));
  q.end_heading_bin = nearest_heading_bin(headings, s.apply_heading(headings[p.end_heading_bin]));
  if (s.mirror) q.turn = -q.turn;
  return q;
}

inline bool same_motion(const MotionPrimitive& a, const MotionPrimitive& b, double resolution) {
  return a.start_heading_bin == b.start_heading_bin && a.end_heading_bin == b.end_heading_bin &&
         primitive_end_cell(a, resolution) == primitive_end_cell(b, resolution) &&
         a.reversed == b.reversed && std::abs(a.length - b.length) < 1e-9;
}

inline EdgeTable edge_table(const std::vector<MotionPrimitive>& prims, int bins, double resolution,
                            std::optional<std::size_t> skip = std::nullopt) {
  EdgeTable t(static_cast<std::size_t>(bins));
  for (std::size_t k = 0; k < prims.size(); ++k) {
    if (skip && *skip == k) continue;
    t[static_cast<std::size_t>(prims[k].start_heading_bin)].push_back(edge_of(prims[k], resolution));
  }
  return t;
}

// A heading bin differs from another by at most `tolerance` bins, cyclically.
inline bool bins_within(int a, int b, int bins, int tolerance) {
  const int d = ((a - b) % bins + bins) % bins;
  return std::min(d, bins - d) <= tolerance;
}

struct Candidate {
  int i = 0;
  int j = 0;
  int end_bin = 0;
  TrajectorySolution solution;
};

// Feasible single-arc candidates from (0, 0, headings[start_bin]) to the cells of
// ring r, shortest first.
inline std::vector<Candidate> ring_candidates(int r, int start_bin, const std::vector<double>& headings,
                                              double resolution, double turning_radius, bool bearing_filter,
                                              int max_turn_bins) {
  const int bins = static_cast<int>(headings.size());
  std::vector<Candidate> out;
  const PoseSE2 start(0.0, 0.0, headings[static_cast<std::size_t>(start_bin)]);
  for (int j = -r; j <= r; ++j) {
    for (int i = -r; i <= r; ++i) {
      if (std::max(std::abs(i), std::abs(j)) != r) continue;
      const double bearing = std::atan2(j, i);
      for (int b = 0; b < static_cast<int>(headings.size()); ++b) {
        if (bearing_filter && std::abs(angle_diff(headings[b], bearing)) >= kPi / 2.0) continue;
        if (max_turn_bins > 0 && !bins_within(b, start_bin, bins, max_turn_bins)) continue;
        const PoseSE2 end(i * resolution, j * resolution, headings[b]);
        auto sol = generate_trajectory(start, end, turning_radius);
        if (sol) out.push_back({i, j, b, *sol});
      }
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const Candidate& a, const Candidate& b) {
    if (a.solution.total_length != b.solution.total_length) return a.solution.total_length < b.solution.total_length;
    if (a.end_bin != b.end_bin) return a.end_bin < b.end_bin;
    if (a.i != b.i) return a.i < b.i;
    return a.j < b.j;
  });
  return out;
}

inline MotionPrimitive primitive_from(const Candidate& c, int start_bin, double resolution) {
  MotionPrimitive p;
  p.start_heading_bin = start_bin;
  p.end_heading_bin = c.end_bin;
  p.poses = sample_trajectory(c.solution, resolution);
  p.length = c.solution.total_length;
  p.turn = c.solution.turn_sign;
  p.reversed = false;
  return p;
}

}  // namespace lattice_detail

struct ControlSetOptions {
  int stop_after_decomposable_rings = 3;
  int max_ring = 0;                    // 0: 2 * ceil(R / res) + 8
  double length_tolerance = 0.02;      // decomposition accepted within this fraction of the candidate length
  bool bearing_filter = true;          // skip end headings >= 90 degrees off the bearing to the cell
  int max_turn_bins = 1;               // largest heading change of one primitive, in bins; 0 = unlimited
  bool prune = true;                   // drop primitives later made decomposable by longer ones
};

struct ControlSetReport {
  int rings_explored = 0;
  int first_counted_ring = 0;  // first ring at which every octant heading could reach its neighbours
  int last_accepting_ring = 0;
  std::size_t candidates = 0;
  std::size_t pruned = 0;
};

inline int default_max_ring(double resolution, double turning_radius) {
  return 2 * static_cast<int>(std::ceil(turning_radius / resolution - 1e-9)) + 8;
}

// Accepts, ring by ring, every candidate that no concatenation of accepted
// primitives reproduces within the length tolerance. The accepted set is kept
// closed under the 8 grid symmetries, so only start headings in the first
// octant are enumerated.
inline ControlSet generate_minimal_control_set(double resolution, double turning_radius, int heading_bins,
                                               const ControlSetOptions& options = {},
                                               ControlSetReport* report = nullptr) {
  using namespace lattice_detail;
  if (!(resolution > 0.0) || !(turning_radius > 0.0)) {
    throw InvalidArgument("resolution and turning radius must be positive");
  }
  if (options.stop_after_decomposable_rings < 1) throw InvalidArgument("stop_after_decomposable_rings must be >= 1");
  const auto headings = derive_headings(heading_bins);
  const int max_ring = options.max_ring > 0 ? options.max_ring : default_max_ring(resolution, turning_radius);
  const double tol = 1.0 + options.length_tolerance;

  std::vector<int> octant;
  for (int b = 0; b < heading_bins; ++b) {
    if (headings[b] <= kPi / 4.0 + 1e-12) octant.push_back(b);
  }
  const auto symmetries = grid_symmetries();

  std::vector<MotionPrimitive> accepted;     // full symmetric closure
  std::vector<std::size_t> octant_sources;   // indices in `accepted` generated directly
  auto add_with_images = [&](const MotionPrimitive& p) {
    octant_sources.push_back(accepted.size());
    accepted.push_back(p);
    for (const auto& s : symmetries) {
      MotionPrimitive q = transform_primitive(p, s, headings);
      const bool dup = std::any_of(accepted.begin(), accepted.end(),
                                   [&](const MotionPrimitive& a) { return same_motion(a, q, resolution); });
      if (!dup) accepted.push_back(std::move(q));
    }
  };

  ControlSetReport rep;
  bool counting = false;
  int empty_run = 0;
  bool done = false;
  for (int r = 1; r <= max_ring && !done; ++r) {
    rep.rings_explored = r;
    bool ring_added = false;
    bool turns_reachable = true;
    for (int h0 : octant) {
      const auto cands = ring_candidates(r, h0, headings, resolution, turning_radius, options.bearing_filter,
                                         options.max_turn_bins);
      rep.candidates += cands.size();
      bool left = false, right = false;
      for (const auto& c : cands) {
        left |= c.end_bin == (h0 + 1) % heading_bins;
        right |= c.end_bin == (h0 + heading_bins - 1) % heading_bins;
      }
      turns_reachable &= left && right;
      if (cands.empty()) continue;

      ReachTable reach;
      std::size_t table_size = accepted.size();
      auto refresh = [&](double bound) {
        reach = ReachTable(edge_table(accepted, heading_bins, resolution), h0, bound, resolution, heading_bins);
        table_size = accepted.size();
      };
      const double ring_bound = tol * cands.back().solution.total_length + 0.5 * resolution;
      refresh(ring_bound);
      for (const auto& c : cands) {
        if (accepted.size() != table_size) refresh(ring_bound);
        const double L = c.solution.total_length;
        if (reach.at(c.i, c.j, c.end_bin) <= tol * L) continue;
        add_with_images(primitive_from(c, h0, resolution));
        ring_added = true;
        rep.last_accepting_ring = r;
      }
    }
    if (!counting && turns_reachable) {
      counting = true;
      rep.first_counted_ring = r;
    }
    if (!counting) continue;
    empty_run = ring_added ? 0 : empty_run + 1;
    done = empty_run >= options.stop_after_decomposable_rings;
  }
  if (!done) {
    std::ostringstream msg;
    msg << "control set generation did not settle within " << max_ring << " rings (radius " << turning_radius
        << ", resolution " << resolution << ")";
    throw Error(msg.str());
  }

  if (options.prune) {
    // Drop a directly generated primitive (and its images) if the rest reproduce it.
    for (std::size_t k = octant_sources.size(); k-- > 0;) {
      const MotionPrimitive p = accepted[octant_sources[k]];
      std::vector<MotionPrimitive> rest;
      for (const auto& a : accepted) {
        bool image = false;
        for (const auto& s : symmetries) image |= same_motion(a, transform_primitive(p, s, headings), resolution);
        if (!image) rest.push_back(a);
      }
      const auto [ex, ey] = primitive_end_cell(p, resolution);
      const ReachTable reach(edge_table(rest, heading_bins, resolution), p.start_heading_bin,
                             tol * p.length + 0.5 * resolution, resolution, heading_bins);
      if (reach.at(ex, ey, p.end_heading_bin) <= tol * p.length) {
        rep.pruned += accepted.size() - rest.size();
        accepted = std::move(rest);
        octant_sources.clear();
        for (std::size_t a = 0; a < accepted.size(); ++a) {
          if (std::find(octant.begin(), octant.end(), accepted[a].start_heading_bin) != octant.end()) {
            octant_sources.push_back(a);
          }
        }
        k = std::min(k, octant_sources.size());
      }
    }
  }

  ControlSet cs;
  cs.resolution = resolution;
  cs.turning_radius = turning_radius;
  cs.heading_bins = heading_bins;
  cs.headings = headings;
  std::stable_sort(accepted.begin(), accepted.end(), [&](const MotionPrimitive& a, const MotionPrimitive& b) {
    if (a.start_heading_bin != b.start_heading_bin) return a.start_heading_bin < b.start_heading_bin;
    if (a.length != b.length) return a.length < b.length;
    return a.end_heading_bin < b.end_heading_bin;
  });
  for (std::size_t k = 0; k < accepted.size(); ++k) accepted[k].id = static_cast<int>(k);
  cs.primitives = std::move(accepted);
  if (report) *report = rep;
  return cs;
}

inline ControlSet generate_minimal_control_set(double resolution, double turning_radius, int heading_bins,
                                               int stop_after_decomposable_rings) {
  ControlSetOptions o;
  o.stop_after_decomposable_rings = stop_after_decomposable_rings;
  return generate_minimal_control_set(resolution, turning_radius, heading_bins, o);
}

// ---------------------------------------------------------------------------
// Checks on a finished set.

struct CoverageGap {
  int start_bin = 0;
  int i = 0;
  int j = 0;
  int end_bin = 0;
  double candidate_length = 0.0;
};

// Every feasible single-arc pose within `horizon` rings must be reached by some
// concatenation no longer than the candidate (within the tolerance), landing on
// the same cell with a heading at most `heading_slack` bins away.
inline std::vector<CoverageGap> completeness_gaps(const ControlSet& cs, int horizon,
                                                  const ControlSetOptions& options = {}, int heading_slack = 1) {
  using namespace lattice_detail;
  std::vector<CoverageGap> gaps;
  const double tol = 1.0 + options.length_tolerance;
  const auto edges = edge_table(cs.primitives, cs.heading_bins, cs.resolution);
  for (int h0 = 0; h0 < cs.heading_bins; ++h0) {
    std::vector<Candidate> all;
    for (int r = 1; r <= horizon; ++r) {
      auto c = ring_candidates(r, h0, cs.headings, cs.resolution, cs.turning_radius, options.bearing_filter,
                               options.max_turn_bins);
      all.insert(all.end(), c.begin(), c.end());
    }
    if (all.empty()) continue;
    double longest = 0.0;
    for (const auto& c : all) longest = std::max(longest, c.solution.total_length);
    const ReachTable reach(edges, h0, tol * longest + 0.5 * cs.resolution, cs.resolution, cs.heading_bins);
    for (const auto& c : all) {
      const double L = c.solution.total_length;
      bool ok = false;
      for (int d = -heading_slack; d <= heading_slack && !ok; ++d) {
        ok = reach.at(c.i, c.j, c.end_bin + d) <= tol * L;
      }
      if (!ok) gaps.push_back({h0, c.i, c.j, c.end_bin, L});
    }
  }
  return gaps;
}

// Primitives whose own end pose stays reachable (same tolerances as above)
// after removing just that primitive. Empty for a minimal set.
inline std::vector<int> redundant_primitives(const ControlSet& cs, double length_tolerance = 0.02,
                                             int heading_slack = 1) {
  using namespace lattice_detail;
  std::vector<int> out;
  const double tol = 1.0 + length_tolerance;
  for (std::size_t k = 0; k < cs.primitives.size(); ++k) {
    const auto& p = cs.primitives[k];
    if (p.reversed) continue;
    const auto edges = edge_table(cs.primitives, cs.heading_bins, cs.resolution, k);
    const ReachTable reach(edges, p.start_heading_bin, tol * p.length + 0.5 * cs.resolution, cs.resolution,
                           cs.heading_bins);
    const auto [ex, ey] = primitive_end_cell(p, cs.resolution);
    bool reached = false;
    for (int d = -heading_slack; d <= heading_slack && !reached; ++d) {
      reached = reach.at(ex, ey, p.end_heading_bin + d) <= tol * p.length;
    }
    if (reached) out.push_back(static_cast<int>(k));
  }
  return out;
}

// Structural invariants shared by the loader and the generator tests. Throws
// ControlSetInvariantError describing the first violation.
inline void validate_control_set(const ControlSet& cs) {
  auto fail = [](const std::string& m) { throw ControlSetInvariantError(m); };
  if (!(cs.resolution > 0.0) || !(cs.turning_radius > 0.0)) fail("resolution and turning radius must be positive");
  if (static_cast<int>(cs.headings.size()) != cs.heading_bins) fail("heading list length differs from heading_bins");
  for (std::size_t k = 1; k < cs.headings.size(); ++k) {
    if (!(cs.headings[k] > cs.headings[k - 1])) fail("headings must be sorted and distinct");
  }
  for (const auto& p : cs.primitives) {
    const std::string tag = "primitive " + std::to_string(p.id);
    if (p.start_heading_bin < 0 || p.start_heading_bin >= cs.heading_bins || p.end_heading_bin < 0 ||
        p.end_heading_bin >= cs.heading_bins) {
      fail(tag + ": heading bin out of range");
    }
    if (p.poses.size() < 2) fail(tag + ": needs at least two poses");
    const PoseSE2& s = p.poses.front();
    if (std::abs(s.x) > 1e-9 || std::abs(s.y) > 1e-9) fail(tag + ": does not start at the origin");
    const double start_heading = cs.headings[p.start_heading_bin];
    const double end_heading = cs.headings[p.end_heading_bin];
    if (std::abs(angle_diff(s.theta, start_heading)) > 1e-6) fail(tag + ": start heading mismatch");
    const PoseSE2& e = p.poses.back();
    const double fx = e.x / cs.resolution, fy = e.y / cs.resolution;
    if (std::abs(fx - std::round(fx)) > 1e-6 || std::abs(fy - std::round(fy)) > 1e-6) {
      fail(tag + ": end point is not on a cell center");
    }
    if (std::abs(angle_diff(e.theta, end_heading)) > 1e-6) fail(tag + ": end heading mismatch");
    if (!(p.length > 0.0)) fail(tag + ": non-positive length");
  }
}

// ---------------------------------------------------------------------------
// Text format:
//   feasplan-control-set <version>
//   resolution <m>
//   turning_radius <m>
//   heading_bins <n>
//   headings <n angles in radians>
//   primitives <count>
//   then per primitive:
//   primitive <id> <start_bin> <end_bin> <turn> <reversed 0|1> <length> <pose count>
//   <x> <y> <theta>      (one line per pose)

inline void save_control_set(const ControlSet& cs, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ControlSetFormatError("cannot write control set: " + path.string());
  out << std::setprecision(17);
  out << "feasplan-control-set " << ControlSet::kVersion << "\n";
  out << "resolution " << cs.resolution << "\n";
  out << "turning_radius " << cs.turning_radius << "\n";
  out << "heading_bins " << cs.heading_bins << "\n";
  out << "headings";
  for (double h : cs.headings) out << ' ' << h;
  out << "\nprimitives " << cs.primitives.size() << "\n";
  for (const auto& p : cs.primitives) {
    out << "primitive " << p.id << ' ' << p.start_heading_bin << ' ' << p.end_heading_bin << ' ' << p.turn << ' '
        << (p.reversed ? 1 : 0) << ' ' << p.length << ' ' << p.poses.size() << "\n";
    for (const auto& q : p.poses) out << q.x << ' ' << q.y << ' ' << q.theta << "\n";
  }
  if (!out) throw ControlSetFormatError("failed writing control set: " + path.string());
}

inline ControlSet load_control_set(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ControlSetFormatError("cannot open control set: " + path.string());
  int line_no = 0;
  auto next_line = [&](const char* what) {
    std::string line;
    if (!std::getline(in, line)) {
      throw ControlSetFormatError(std::string("unexpected end of file, expected ") + what);
    }
    ++line_no;
    return std::istringstream(line);
  };
  auto bad = [&](const std::string& what) {
    return ControlSetFormatError("line " + std::to_string(line_no) + ": " + what);
  };
  auto keyword = [&](std::istringstream& ss, const char* expected) {
    std::string word;
    if (!(ss >> word) || word != expected) throw bad(std::string("expected '") + expected + "'");
  };

  ControlSet cs;
  {
    auto ss = next_line("header");
    keyword(ss, "feasplan-control-set");
    int version = 0;
    if (!(ss >> version)) throw bad("missing version");
    if (version != ControlSet::kVersion) {
      throw ControlSetVersionError("control set version " + std::to_string(version) + " is not supported (expected " +
                                   std::to_string(ControlSet::kVersion) + ")");
    }
  }
  {
    auto ss = next_line("resolution");
    keyword(ss, "resolution");
    if (!(ss >> cs.resolution)) throw bad("bad resolution");
  }
  {
    auto ss = next_line("turning_radius");
    keyword(ss, "turning_radius");
    if (!(ss >> cs.turning_radius)) throw bad("bad turning radius");
  }
  {
    auto ss = next_line("heading_bins");
    keyword(ss, "heading_bins");
    if (!(ss >> cs.heading_bins) || cs.heading_bins <= 0 || cs.heading_bins > 4096) throw bad("bad heading count");
  }
  {
    auto ss = next_line("headings");
    keyword(ss, "headings");
    double h;
    while (ss >> h) cs.headings.push_back(h);
    if (!ss.eof()) throw bad("bad heading value");
  }
  std::size_t count = 0;
  {
    auto ss = next_line("primitives");
    keyword(ss, "primitives");
    if (!(ss >> count)) throw bad("bad primitive count");
  }
  cs.primitives.reserve(std::min<std::size_t>(count, 1u << 16));
  for (std::size_t k = 0; k < count; ++k) {
    MotionPrimitive p;
    std::size_t n = 0;
    int rev = 0;
    {
      auto ss = next_line("primitive record");
      keyword(ss, "primitive");
      if (!(ss >> p.id >> p.start_heading_bin >> p.end_heading_bin >> p.turn >> rev >> p.length >> n)) {
        throw bad("bad primitive record");
      }
      if (rev != 0 && rev != 1) throw bad("reversed flag must be 0 or 1");
      if (n > 100000) throw bad("implausible pose count");
    }
    p.reversed = rev == 1;
    p.poses.reserve(n);
    for (std::size_t q = 0; q < n; ++q) {
      auto ss = next_line("pose");
      double x, y, t;
      if (!(ss >> x >> y >> t)) throw bad("bad pose");
      PoseSE2 pose;
      pose.x = x;
      pose.y = y;
      pose.theta = t;
      p.poses.push_back(pose);
    }
    cs.primitives.push_back(std::move(p));
  }
  std::string rest;
  while (std::getline(in, rest)) {
    ++line_no;
    if (rest.find_first_not_of(" \t\r") != std::string::npos) throw bad("trailing content");
  }
  validate_control_set(cs);
  return cs;
}

// Reverse primitive for start heading `bin`: the forward primitive of the
// opposite heading, driven backwards.
inline std::vector<MotionPrimitive> reverse_primitives(const ControlSet& cs) {
  std::vector<MotionPrimitive> out;
  if (cs.heading_bins % 2 != 0) return out;
  const int half = cs.heading_bins / 2;
  for (const auto& p : cs.primitives) {
    if (p.reversed) continue;
    MotionPrimitive q = p;
    q.reversed = true;
    q.start_heading_bin = (p.start_heading_bin + half) % cs.heading_bins;
    q.end_heading_bin = (p.end_heading_bin + half) % cs.heading_bins;
    for (auto& pose : q.poses) pose = PoseSE2(pose.x, pose.y, pose.theta + kPi);
    out.push_back(std::move(q));
  }
  return out;
}

}  // namespace feasplan
