#pragma once

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "feasplan/core.hpp"
#include "feasplan/curves.hpp"
#include "feasplan/gridmap.hpp"
#include "feasplan/heuristics.hpp"
#include "feasplan/lattice.hpp"
#include "feasplan/search.hpp"
#include "feasplan/smoother.hpp"
#include "feasplan/trajectory.hpp"

namespace feasplan {

enum class PlannerKind { kTwoD, kHybrid, kLattice };
enum class GoalMode { kExact, kBidirectional, kAnyHeading };

inline const char* to_string(PlannerKind k) {
  switch (k) {
    case PlannerKind::kTwoD: return "2d";
    case PlannerKind::kHybrid: return "hybrid";
    case PlannerKind::kLattice: return "lattice";
  }
  return "unknown";
}

inline const char* to_string(GoalMode m) {
  switch (m) {
    case GoalMode::kExact: return "exact";
    case GoalMode::kBidirectional: return "bidirectional";
    case GoalMode::kAnyHeading: return "any";
  }
  return "unknown";
}

inline PlannerKind parse_planner_kind(const std::string& s) {
  if (s == "2d" || s == "twod" || s == "TwoD") return PlannerKind::kTwoD;
  if (s == "hybrid" || s == "Hybrid") return PlannerKind::kHybrid;
  if (s == "lattice" || s == "Lattice") return PlannerKind::kLattice;
  throw InvalidArgument("unknown planner '" + s + "' (expected 2d, hybrid or lattice)");
}

inline GoalMode parse_goal_mode(const std::string& s) {
  if (s == "exact") return GoalMode::kExact;
  if (s == "bidirectional") return GoalMode::kBidirectional;
  if (s == "any") return GoalMode::kAnyHeading;
  throw InvalidArgument("unknown goal mode '" + s + "' (expected exact, bidirectional or any)");
}

struct PlannerConfig {
  PlannerKind kind = PlannerKind::kHybrid;
  double alpha = 2.0;
  double beta = 0.05;
  double gamma = 0.05;
  double reverse_penalty = 2.0;
  double turning_radius = 0.4;
  int heading_bins = 16;
  MotionModel motion_model = MotionModel::kReedsShepp;
  GoalMode goal_mode = GoalMode::kExact;
  bool allow_reverse = true;  // only effective with the Reeds-Shepp model
  bool allow_unknown = false;
  // Circle footprints rely on a map inflated by at least the radius.
  Footprint footprint = Footprint::circle(0.1);
  SmootherParams smoother;
  SearchLimits limits;
  std::string control_set_path;      // Lattice: empty means generate for the map resolution
  bool cost_aware_heuristic = true;  // false: obstacle heuristic ignores cell costs
  bool use_lut = true;
  double lut_window_factor = 10.0;   // window radius in turning radii
  double analytic_cost_ratio = 2.0;  // suffix accepted if its cost <= ratio * heuristic
  int analytic_max_cell_cost = 200;  // suffix rejected if it enters a cell costlier than this
  ObstacleTermScaling obstacle_scaling;

  bool reverse_enabled() const { return allow_reverse && motion_model == MotionModel::kReedsShepp; }

  void validate() const {
    if (!(alpha >= 0.0)) throw InvalidArgument("alpha must be >= 0");
    if (!(beta >= 0.0) || !(gamma >= 0.0)) throw InvalidArgument("beta and gamma must be >= 0");
    if (!(reverse_penalty >= 1.0)) throw InvalidArgument("reverse_penalty must be >= 1");
    if (!(turning_radius > 0.0)) throw InvalidArgument("turning_radius must be > 0");
    if (heading_bins < 8) throw InvalidArgument("heading_bins must be >= 8");
    if (!(analytic_cost_ratio >= 1.0)) throw InvalidArgument("analytic_cost_ratio must be >= 1");
    if (analytic_max_cell_cost < 0 || analytic_max_cell_cost > cost::kMaxNonLethal) {
      throw InvalidArgument("analytic_max_cell_cost must be within [0, 253]");
    }
  }
};

// Per-edge annotation of a path.
struct SegmentMeta {
  bool reversed = false;
  int primitive = -1;  // primitive or move id; -1 for analytic segments
  int turn = 0;        // -1 right, 0 straight, +1 left
};

struct Path {
  std::vector<PoseSE2> poses;
  std::vector<SegmentMeta> segment_meta;  // one per consecutive pose pair
  double length_m = 0.0;
  double cost_total = 0.0;
  double planning_time_s = 0.0;
  std::size_t expansions = 0;
  bool analytic = false;  // ends with an analytic suffix
  // Search nodes along the path: pose index and accumulated cost at that pose.
  std::vector<std::size_t> node_pose_index;
  std::vector<double> node_cost;

  std::vector<bool> reversed_flags() const {
    std::vector<bool> r;
    r.reserve(segment_meta.size());
    for (const auto& m : segment_meta) r.push_back(m.reversed);
    return r;
  }
};

inline double polyline_length(const std::vector<PoseSE2>& poses) {
  double s = 0.0;
  for (std::size_t k = 1; k < poses.size(); ++k) s += distance(poses[k - 1].position(), poses[k].position());
  return s;
}

enum class PlanStatus { kStartInCollision, kGoalInCollision, kNoPathExists, kTimeLimit, kIterationLimit };

inline const char* to_string(PlanStatus s) {
  switch (s) {
    case PlanStatus::kStartInCollision: return "start_in_collision";
    case PlanStatus::kGoalInCollision: return "goal_in_collision";
    case PlanStatus::kNoPathExists: return "no_path_exists";
    case PlanStatus::kTimeLimit: return "time_limit";
    case PlanStatus::kIterationLimit: return "iteration_limit";
  }
  return "unknown";
}

class PlanningError : public Error {
 public:
  PlanningError(PlanStatus status, const std::string& what) : Error(what), status_(status) {}
  PlanStatus status() const { return status_; }

 private:
  PlanStatus status_;
};

// Turn and direction multipliers applied on top of the traversal cost.
inline double apply_penalties(double cost, int turn, int previous_turn, bool reversed, const PlannerConfig& cfg) {
  double c = cost;
  if (turn != 0) {
    const bool changed = previous_turn != 0 && previous_turn != turn;
    c *= 1.0 + cfg.beta + (changed ? cfg.gamma : 0.0);
  }
  if (reversed) c *= cfg.reverse_penalty;
  return c;
}

namespace planner_detail {

inline int heading_bin(double theta, int bins) {
  const double b = kTwoPi / bins;
  return static_cast<int>(std::lround(normalize_angle(theta) / b)) % bins;
}

// Grid cell blocked for the 2D planner.
inline bool cell_blocked(const Costmap& map, std::size_t idx, const PlannerConfig& cfg) {
  const CostValue v = map.at(idx);
  if (is_lethal(v, cfg.allow_unknown)) return true;
  return cfg.footprint.is_circle() && v == cost::kMaxNonLethal;
}

// ---------------------------------------------------------------------------

class TwoDGraph {
 public:
  using State = std::int64_t;

  TwoDGraph(const Costmap& map, const PlannerConfig& cfg, State goal) : map_(map), cfg_(cfg), goal_(goal) {}

  StateKey key(const State& s) const { return static_cast<StateKey>(s); }
  std::size_t dense_key_space() const { return map_.size(); }
  bool is_goal(const State& s) const { return s == goal_; }

  double heuristic(const State& s) {
    const int w = map_.width();
    return octile_distance(static_cast<int>(s % w - goal_ % w), static_cast<int>(s / w - goal_ / w),
                           map_.resolution());
  }

  void expand(const State& s, int, std::vector<Successor<State>>& out) {
    static constexpr int kDi[8] = {1, 1, 0, -1, -1, -1, 0, 1};
    static constexpr int kDj[8] = {0, 1, 1, 1, 0, -1, -1, -1};
    const int w = map_.width();
    const int i = static_cast<int>(s % w), j = static_cast<int>(s / w);
    for (int k = 0; k < 8; ++k) {
      const int ni = i + kDi[k], nj = j + kDj[k];
      if (!map_.in_bounds(ni, nj)) continue;
      const std::size_t n = map_.index(ni, nj);
      if (cell_blocked(map_, n, cfg_)) continue;
      const double d = (k % 2 == 1) ? std::sqrt(2.0) * map_.resolution() : map_.resolution();
      out.push_back({static_cast<State>(n), traversal_cost(d, traversal_cell_cost(map_.at(n)), cfg_.alpha), k});
    }
  }

 private:
  const Costmap& map_;
  const PlannerConfig& cfg_;
  State goal_;
};

// ---------------------------------------------------------------------------
// Shared machinery for the two continuous-pose planners.

struct AnalyticSuffix {
  std::vector<PoseSE2> poses;  // first pose equals the expanded state
  std::vector<SegmentMeta> meta;
  double cost = 0.0;
  double length = 0.0;
};

struct GoalSpec {
  PoseSE2 pose;
  GridIndex cell;
  GoalMode mode = GoalMode::kExact;
};

// Heuristic and analytic-expansion support shared by Hybrid and Lattice graphs.
class ContinuousSupport {
 public:
  ContinuousSupport(const Costmap& map, const PlannerConfig& cfg, const GoalSpec& goal, ObstacleHeuristicCache& cache,
                    const NonholonomicLUT* lut)
      : map_(map), cfg_(cfg), goal_(goal), cache_(cache), lut_(lut) {
    cache_.set_goal(map_, goal_.cell, cfg_.cost_aware_heuristic ? cfg_.alpha : 0.0, cfg_.allow_unknown);
    goals_.push_back(goal_.pose);
    if (goal_.mode == GoalMode::kBidirectional) goals_.emplace_back(goal_.pose.x, goal_.pose.y, goal_.pose.theta + kPi);
    if (goal_.mode == GoalMode::kAnyHeading) goals_.clear();
  }

  double heuristic(const PoseSE2& pose) {
    return combined_heuristic(pose, goals_, cache_, cfg_.use_lut ? lut_ : nullptr, map_,
                              cfg_.cost_aware_heuristic ? cfg_.alpha : 0.0, cfg_.obstacle_scaling);
  }

  // Closed-form completion from `pose`. Returns the feasible suffix with the
  // lowest cost whose cost stays within analytic_cost_ratio of the heuristic.
  std::optional<AnalyticSuffix> analytic(const PoseSE2& pose, int previous_turn, double h) {
    std::optional<AnalyticSuffix> best;
    // Any-heading goals keep the shortest suffix, the others the cheapest.
    const bool by_length = goal_.mode == GoalMode::kAnyHeading;
    const double max_cost = cfg_.analytic_cost_ratio * std::max(h, 1e-9);
    // When the cheapest suffix is kept, any suffix over the bound cannot be
    // accepted, so sampling stops once the running cost passes it.
    const double cutoff = by_length ? std::numeric_limits<double>::infinity() : max_cost;
    auto consider = [&](double goal_theta) {
      const PoseSE2 target(goal_.pose.x, goal_.pose.y, goal_theta);
      auto suffix = build_suffix(pose, target, previous_turn, cutoff);
      if (!suffix) return;
      const bool better = !best || (by_length ? suffix->length < best->length : suffix->cost < best->cost);
      if (better) best = std::move(suffix);
    };
    const int n = cfg_.heading_bins;
    const double bin = kTwoPi / n;
    switch (goal_.mode) {
      case GoalMode::kExact:
        consider(goal_.pose.theta);
        break;
      case GoalMode::kBidirectional:
        consider(goal_.pose.theta);
        consider(goal_.pose.theta + kPi);
        break;
      case GoalMode::kAnyHeading: {
        // Coarse pass every 4 bins by curve length, then +-1 bin around the best.
        int best_k = -1;
        double best_len = std::numeric_limits<double>::infinity();
        for (int k = 0; k < n; k += 4) {
          const double len = curve_length(pose, goal_.pose.theta + k * bin);
          if (len < best_len) {
            best_len = len;
            best_k = k;
          }
        }
        std::vector<int> order{best_k, best_k - 1, best_k + 1};
        for (int k = 0; k < n; k += 4) {
          if (k != best_k) order.push_back(k);
        }
        for (int k : order) consider(goal_.pose.theta + k * bin);
        break;
      }
    }
    if (best && best->cost > max_cost) return std::nullopt;
    return best;
  }

  const GoalSpec& goal() const { return goal_; }

 private:
  double curve_length(const PoseSE2& from, double goal_theta) const {
    const PoseSE2 target(goal_.pose.x, goal_.pose.y, goal_theta);
    return shortest_curve(model(), from, target, cfg_.turning_radius).length();
  }

  MotionModel model() const { return cfg_.reverse_enabled() ? MotionModel::kReedsShepp : MotionModel::kDubins; }

  std::optional<AnalyticSuffix> build_suffix(const PoseSE2& from, const PoseSE2& to, int previous_turn,
                                            double max_cost) const {
    const CurvePath curve = shortest_curve(model(), from, to, cfg_.turning_radius);
    AnalyticSuffix s;
    s.poses.push_back(from);
    PoseSE2 cursor = from;
    int prev = previous_turn;
    for (const auto& seg : curve.segments) {
      if (std::abs(seg.length) < 1e-12) continue;
      CurvePath one;
      one.radius = curve.radius;
      one.segments.push_back(seg);
      const auto sampled = sample_curve(cursor, one, map_.resolution());
      const int turn = seg.type == SegmentType::kLeft ? 1 : (seg.type == SegmentType::kRight ? -1 : 0);
      const bool rev = seg.length < 0.0;
      for (std::size_t k = 1; k < sampled.poses.size(); ++k) {
        const PoseSE2& q = sampled.poses[k];
        if (collision_check(map_, q, cfg_.footprint, cfg_.allow_unknown)) return std::nullopt;
        const auto cell = map_.world_to_grid(q.x, q.y);
        const CostValue v = traversal_cell_cost(map_.at(cell->i, cell->j));
        if (v > cfg_.analytic_max_cell_cost) return std::nullopt;
        const double d = distance(s.poses.back().position(), q.position());
        const double c = traversal_cost(d, v, cfg_.alpha);
        s.cost += apply_penalties(c, turn, prev, rev, cfg_);
        if (s.cost > max_cost) return std::nullopt;
        s.length += d;
        s.poses.push_back(q);
        s.meta.push_back({rev, -1, turn});
      }
      prev = turn;
      cursor = sampled.poses.back();
    }
    // Snap the end exactly onto the goal pose.
    if (s.poses.size() > 1) {
      s.poses.back() = to;
    } else {
      return std::nullopt;
    }
    return s;
  }

  const Costmap& map_;
  const PlannerConfig& cfg_;
  GoalSpec goal_;
  ObstacleHeuristicCache& cache_;
  const NonholonomicLUT* lut_;
  std::vector<PoseSE2> goals_;
};

// Primitive transformed into the world at a given pose.
struct PlacedPrimitive {
  std::vector<PoseSE2> poses;
  double cost = 0.0;
};

// Places `prim` (given relative to its start pose) at `at`. Returns nullopt on
// collision or when leaving the map.
inline std::optional<PlacedPrimitive> place_primitive(const Costmap& map, const PlannerConfig& cfg,
                                                      const PoseSE2& at, const std::vector<PoseSE2>& local,
                                                      double local_heading, int turn, int previous_turn,
                                                      bool reversed) {
  PlacedPrimitive out;
  out.poses.reserve(local.size());
  // Local poses are expressed for start heading `local_heading`; rotate the
  // difference onto the state's heading.
  const PoseSE2 frame(at.x, at.y, at.theta - local_heading);
  const double c0 = std::cos(frame.theta), s0 = std::sin(frame.theta);
  double cost = 0.0;
  out.poses.push_back(at);
  for (std::size_t k = 1; k < local.size(); ++k) {
    const PoseSE2 q(at.x + c0 * local[k].x - s0 * local[k].y, at.y + s0 * local[k].x + c0 * local[k].y,
                    local[k].theta + frame.theta);
    const auto cell = map.world_to_grid(q.x, q.y);
    if (!cell) return std::nullopt;
    const CostValue v = map.at(cell->i, cell->j);
    if (cfg.footprint.is_circle()) {
      if (is_lethal(v, cfg.allow_unknown) || v == cost::kMaxNonLethal) return std::nullopt;
    } else if (collision_check(map, q, cfg.footprint, cfg.allow_unknown)) {
      return std::nullopt;
    }
    const double d = distance(out.poses.back().position(), q.position());
    cost += traversal_cost(d, traversal_cell_cost(v), cfg.alpha);
    out.poses.push_back(q);
  }
  out.cost = apply_penalties(cost, turn, previous_turn, reversed, cfg);
  return out;
}

// ---------------------------------------------------------------------------

struct HybridState {
  PoseSE2 pose;
  int bin = 0;
};

class HybridGraph {
 public:
  using State = HybridState;
  using Suffix = AnalyticSuffix;

  HybridGraph(const Costmap& map, const PlannerConfig& cfg, const std::vector<MotionPrimitive>& prims,
              ContinuousSupport& support)
      : map_(map), cfg_(cfg), prims_(prims), support_(support) {
    const auto goal = support_.goal();
    goal_key_cell_ = static_cast<StateKey>(map_.index(goal.cell.i, goal.cell.j));
    goal_bin_ = heading_bin(goal.pose.theta, cfg_.heading_bins);
    const std::size_t space = map_.size() * static_cast<std::size_t>(cfg_.heading_bins);
    dense_ = space <= (std::size_t{1} << 24) ? space : 0;
  }

  State make_state(const PoseSE2& p) const { return {p, heading_bin(p.theta, cfg_.heading_bins)}; }

  StateKey key(const State& s) const {
    const auto cell = map_.world_to_grid(s.pose.x, s.pose.y);
    return static_cast<StateKey>(map_.index(cell->i, cell->j)) * cfg_.heading_bins + s.bin;
  }
  std::size_t dense_key_space() const { return dense_; }

  bool is_goal(const State& s) const {
    const StateKey k = key(s);
    if (k / cfg_.heading_bins != goal_key_cell_) return false;
    switch (support_.goal().mode) {
      case GoalMode::kExact: return s.bin == goal_bin_;
      case GoalMode::kBidirectional: return s.bin == goal_bin_ || s.bin == (goal_bin_ + cfg_.heading_bins / 2) % cfg_.heading_bins;
      case GoalMode::kAnyHeading: return true;
    }
    return false;
  }

  double heuristic(const State& s) { return is_goal(s) ? 0.0 : support_.heuristic(s.pose); }

  void expand(const State& s, int motion, std::vector<Successor<State>>& out) {
    const int prev_turn = motion >= 0 ? prims_[static_cast<std::size_t>(motion)].turn : 0;
    for (const auto& p : prims_) {
      auto placed = place_primitive(map_, cfg_, s.pose, p.poses, 0.0, p.turn, prev_turn, p.reversed);
      if (!placed) continue;
      const PoseSE2& end = placed->poses.back();
      out.push_back({make_state(end), placed->cost, p.id});
    }
  }

  std::optional<Suffix> try_analytic_expansion(const State& s, int motion, double) {
    const int prev_turn = motion >= 0 ? prims_[static_cast<std::size_t>(motion)].turn : 0;
    return support_.analytic(s.pose, prev_turn, support_.heuristic(s.pose));
  }

  double primitive_length() const { return std::sqrt(2.0) * map_.resolution(); }

  // Pose sequence of one primitive applied at `s`, for path reconstruction.
  std::vector<PoseSE2> replay(const State& s, int motion) const {
    const auto& p = prims_[static_cast<std::size_t>(motion)];
    auto placed = place_primitive(map_, cfg_, s.pose, p.poses, 0.0, p.turn, 0, p.reversed);
    if (!placed) throw InvariantViolation("path primitive no longer valid during reconstruction");
    return placed->poses;
  }
  const MotionPrimitive& primitive(int motion) const { return prims_[static_cast<std::size_t>(motion)]; }

 private:
  const Costmap& map_;
  const PlannerConfig& cfg_;
  const std::vector<MotionPrimitive>& prims_;
  ContinuousSupport& support_;
  StateKey goal_key_cell_ = 0;
  int goal_bin_ = 0;
  std::size_t dense_ = 0;
};

// ---------------------------------------------------------------------------

struct LatticeState {
  int i = 0;
  int j = 0;
  int bin = 0;
};

class LatticeGraph {
 public:
  using State = LatticeState;
  using Suffix = AnalyticSuffix;

  LatticeGraph(const Costmap& map, const PlannerConfig& cfg, const ControlSet& cs,
               const std::vector<MotionPrimitive>& prims, ContinuousSupport& support)
      : map_(map), cfg_(cfg), cs_(cs), prims_(prims), support_(support) {
    by_heading_.assign(static_cast<std::size_t>(cs_.heading_bins), {});
    for (std::size_t k = 0; k < prims_.size(); ++k) {
      by_heading_[static_cast<std::size_t>(prims_[k].start_heading_bin)].push_back(static_cast<int>(k));
    }
    const auto goal = support_.goal();
    goal_ = {goal.cell.i, goal.cell.j, nearest_heading_bin(cs_.headings, goal.pose.theta)};
    const std::size_t space = map_.size() * static_cast<std::size_t>(cs_.heading_bins);
    dense_ = space <= (std::size_t{1} << 24) ? space : 0;
    double total = 0.0;
    for (const auto& p : prims_) total += p.length;
    mean_length_ = prims_.empty() ? map_.resolution() : total / static_cast<double>(prims_.size());
  }

  PoseSE2 pose_of(const State& s) const {
    const Point2 c = map_.grid_to_world(s.i, s.j);
    return {c.x, c.y, cs_.headings[static_cast<std::size_t>(s.bin)]};
  }

  StateKey key(const State& s) const {
    return static_cast<StateKey>(map_.index(s.i, s.j)) * cs_.heading_bins + s.bin;
  }
  std::size_t dense_key_space() const { return dense_; }

  bool is_goal(const State& s) const {
    if (s.i != goal_.i || s.j != goal_.j) return false;
    switch (support_.goal().mode) {
      case GoalMode::kExact: return s.bin == goal_.bin;
      case GoalMode::kBidirectional: return s.bin == goal_.bin || s.bin == (goal_.bin + cs_.heading_bins / 2) % cs_.heading_bins;
      case GoalMode::kAnyHeading: return true;
    }
    return false;
  }

  double heuristic(const State& s) { return is_goal(s) ? 0.0 : support_.heuristic(pose_of(s)); }

  void expand(const State& s, int motion, std::vector<Successor<State>>& out) {
    const int prev_turn = motion >= 0 ? prims_[static_cast<std::size_t>(motion)].turn : 0;
    const PoseSE2 at = pose_of(s);
    for (int k : by_heading_[static_cast<std::size_t>(s.bin)]) {
      const auto& p = prims_[static_cast<std::size_t>(k)];
      const auto [dx, dy] = primitive_end_cell(p, cs_.resolution);
      const State next{s.i + dx, s.j + dy, p.end_heading_bin};
      if (!map_.in_bounds(next.i, next.j)) continue;
      auto placed = place_primitive(map_, cfg_, at, p.poses, at.theta, p.turn, prev_turn, p.reversed);
      if (!placed) continue;
      out.push_back({next, placed->cost, k});
    }
  }

  std::optional<Suffix> try_analytic_expansion(const State& s, int motion, double) {
    const int prev_turn = motion >= 0 ? prims_[static_cast<std::size_t>(motion)].turn : 0;
    const PoseSE2 at = pose_of(s);
    return support_.analytic(at, prev_turn, support_.heuristic(at));
  }

  double primitive_length() const { return mean_length_; }

  std::vector<PoseSE2> replay(const State& s, int motion) const {
    const auto& p = prims_[static_cast<std::size_t>(motion)];
    const PoseSE2 at = pose_of(s);
    auto placed = place_primitive(map_, cfg_, at, p.poses, at.theta, p.turn, 0, p.reversed);
    if (!placed) throw InvariantViolation("path primitive no longer valid during reconstruction");
    // Land exactly on the lattice state.
    State next{s.i, s.j, p.end_heading_bin};
    const auto [dx, dy] = primitive_end_cell(p, cs_.resolution);
    next.i += dx;
    next.j += dy;
    placed->poses.back() = pose_of(next);
    return placed->poses;
  }
  const MotionPrimitive& primitive(int motion) const { return prims_[static_cast<std::size_t>(motion)]; }

  State snap(const PoseSE2& p) const {
    const auto cell = map_.world_to_grid(p.x, p.y);
    return {cell->i, cell->j, nearest_heading_bin(cs_.headings, p.theta)};
  }

 private:
  const Costmap& map_;
  const PlannerConfig& cfg_;
  const ControlSet& cs_;
  const std::vector<MotionPrimitive>& prims_;
  ContinuousSupport& support_;
  std::vector<std::vector<int>> by_heading_;
  State goal_;
  std::size_t dense_ = 0;
  double mean_length_ = 0.0;
};

// Lookup tables are expensive to build and immutable; share them per key.
inline std::shared_ptr<const NonholonomicLUT> shared_lut(const LutKey& key) {
  static std::mutex mu;
  static std::map<std::tuple<int, double, double, int, double>, std::shared_ptr<const NonholonomicLUT>> cache;
  const auto k = std::make_tuple(static_cast<int>(key.model), key.turning_radius, key.window_radius, key.heading_bins,
                                 key.resolution);
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(k);
  if (it != cache.end()) return it->second;
  auto lut = std::make_shared<const NonholonomicLUT>(NonholonomicLUT::build(key));
  cache.emplace(k, lut);
  return lut;
}

inline LutKey lut_key_for(const PlannerConfig& cfg, double resolution) {
  return {cfg.reverse_enabled() ? MotionModel::kReedsShepp : MotionModel::kDubins, cfg.turning_radius,
          cfg.lut_window_factor * cfg.turning_radius, cfg.heading_bins, resolution};
}

inline PlanStatus status_from(SearchStatus s) {
  switch (s) {
    case SearchStatus::kTimeLimit: return PlanStatus::kTimeLimit;
    case SearchStatus::kIterationLimit: return PlanStatus::kIterationLimit;
    default: return PlanStatus::kNoPathExists;
  }
}

}  // namespace planner_detail

// ---------------------------------------------------------------------------

// Planner holding reusable state (obstacle heuristic cache, lookup table,
// primitives) across queries. Consecutive plans toward the same goal on an
// unchanged map reuse the cached cost-to-goal values.
class Planner {
 public:
  explicit Planner(PlannerConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

  const PlannerConfig& config() const { return cfg_; }
  ObstacleHeuristicCache& heuristic_cache() { return cache_; }

  // Plan without smoothing, whatever the configuration says. The reported
  // planning time excludes one-time setup (lookup table, primitive sets).
  Path plan_raw(const Costmap& map, const PoseSE2& start, const PoseSE2& goal) {
    using Clock = std::chrono::steady_clock;
    prepare(map.resolution());
    const auto t0 = Clock::now();
    check_endpoints(map, start, goal);
    Path path;
    if (distance(start.position(), goal.position()) < 1e-9 && angle_diff(start.theta, goal.theta) < 1e-9) {
      path.poses = {start};
    } else if (cfg_.kind == PlannerKind::kTwoD) {
      path = plan_2d(map, start, goal);
    } else {
      path = plan_mode(map, start, goal, cfg_.goal_mode);
    }
    path.length_m = polyline_length(path.poses);
    path.planning_time_s = std::chrono::duration<double>(Clock::now() - t0).count();
    return path;
  }

  // Builds whatever the configured planner needs for maps of this resolution.
  void prepare(double resolution) {
    if (cfg_.kind == PlannerKind::kHybrid) ensure_hybrid(resolution);
    if (cfg_.kind == PlannerKind::kLattice) ensure_lattice(resolution);
    if (cfg_.kind != PlannerKind::kTwoD) ensure_lut(resolution);
  }

  Path plan(const Costmap& map, const PoseSE2& start, const PoseSE2& goal) {
    Path p = plan_raw(map, start, goal);
    if (cfg_.smoother.enabled && p.poses.size() >= 3) {
      p.poses = smooth_poses(p.poses, p.reversed_flags(), map, cfg_.footprint, cfg_.smoother, cfg_.allow_unknown);
      p.length_m = polyline_length(p.poses);
    }
    return p;
  }

  // Primitives the continuous planners expand, for inspection.
  const std::vector<MotionPrimitive>& hybrid_motion_set(double resolution) {
    ensure_hybrid(resolution);
    return hybrid_prims_;
  }
  const ControlSet& lattice_control_set(double resolution) {
    ensure_lattice(resolution);
    return *control_set_;
  }

 private:
  void check_endpoints(const Costmap& map, const PoseSE2& start, const PoseSE2& goal) const {
    if (collision_check(map, start, cfg_.footprint, cfg_.allow_unknown)) {
      throw PlanningError(PlanStatus::kStartInCollision, "start pose is in collision or outside the map");
    }
    if (collision_check(map, goal, cfg_.footprint, cfg_.allow_unknown)) {
      throw PlanningError(PlanStatus::kGoalInCollision, "goal pose is in collision or outside the map");
    }
  }

  template <typename R>
  [[noreturn]] void fail(const R& r) const {
    const PlanStatus st = planner_detail::status_from(r.status);
    throw PlanningError(st, std::string("no path: ") + to_string(r.status));
  }

  Path plan_2d(const Costmap& map, const PoseSE2& start, const PoseSE2& goal) {
    using planner_detail::TwoDGraph;
    const auto s = map.world_to_grid(start.x, start.y);
    const auto g = map.world_to_grid(goal.x, goal.y);
    TwoDGraph graph(map, cfg_, static_cast<TwoDGraph::State>(map.index(g->i, g->j)));
    const auto r = a_star(graph, static_cast<TwoDGraph::State>(map.index(s->i, s->j)), cfg_.limits);
    if (!r.found()) fail(r);
    Path path;
    path.expansions = r.expansions;
    path.cost_total = r.goal_cost;
    for (std::size_t k = 0; k < r.path_states.size(); ++k) {
      const auto cell = map.cell_of(static_cast<std::size_t>(r.path_states[k]));
      const Point2 c = map.grid_to_world(cell.i, cell.j);
      path.poses.emplace_back(c.x, c.y, 0.0);
      path.node_pose_index.push_back(k);
      path.node_cost.push_back(r.g_values[k]);
    }
    for (std::size_t k = 0; k < path.poses.size(); ++k) {
      if (k + 1 < path.poses.size()) {
        const Point2 d = path.poses[k + 1].position() - path.poses[k].position();
        path.poses[k].theta = normalize_angle(std::atan2(d.y, d.x));
      } else if (k > 0) {
        path.poses[k].theta = path.poses[k - 1].theta;
      }
      if (k > 0) path.segment_meta.push_back({false, r.motions[k], 0});
    }
    return path;
  }

  void ensure_hybrid(double resolution) {
    if (hybrid_resolution_ == resolution && !hybrid_prims_.empty()) return;
    hybrid_prims_ = hybrid_primitives(cfg_.turning_radius, resolution, cfg_.heading_bins, cfg_.reverse_enabled());
    hybrid_resolution_ = resolution;
  }

  void ensure_lattice(double resolution) {
    if (control_set_ && control_set_->resolution == resolution) return;
    ControlSet cs;
    if (!cfg_.control_set_path.empty()) {
      cs = load_control_set(cfg_.control_set_path);
      if (std::abs(cs.resolution - resolution) > 1e-12) {
        throw InvalidArgument("control set resolution " + std::to_string(cs.resolution) +
                              " does not match map resolution " + std::to_string(resolution));
      }
      if (cs.turning_radius + 1e-12 < cfg_.turning_radius) {
        throw InvalidArgument("control set turning radius is below the configured minimum");
      }
    } else {
      cs = generate_minimal_control_set(resolution, cfg_.turning_radius, cfg_.heading_bins);
    }
    lattice_prims_.clear();
    for (const auto& p : cs.primitives) {
      if (!p.reversed) lattice_prims_.push_back(p);
    }
    if (cfg_.reverse_enabled()) {
      ControlSet forward = cs;
      forward.primitives = lattice_prims_;
      const auto rev = reverse_primitives(forward);
      lattice_prims_.insert(lattice_prims_.end(), rev.begin(), rev.end());
    }
    for (std::size_t k = 0; k < lattice_prims_.size(); ++k) lattice_prims_[k].id = static_cast<int>(k);
    control_set_ = std::move(cs);
  }

  const NonholonomicLUT* ensure_lut(double resolution) {
    if (!cfg_.use_lut) return nullptr;
    const LutKey key = planner_detail::lut_key_for(cfg_, resolution);
    if (!lut_ || !(lut_->key() == key)) lut_ = planner_detail::shared_lut(key);
    return lut_.get();
  }

  template <typename Graph, typename Result>
  Path assemble(const Graph& graph, const Result& r, std::vector<PoseSE2> first) {
    Path path;
    path.expansions = r.expansions;
    path.cost_total = r.goal_cost;
    path.poses = std::move(first);
    path.node_pose_index.push_back(0);
    path.node_cost.push_back(0.0);
    for (std::size_t k = 1; k < r.path_states.size(); ++k) {
      const int m = r.motions[k];
      const auto poses = graph.replay(r.path_states[k - 1], m);
      const auto& prim = graph.primitive(m);
      for (std::size_t q = 1; q < poses.size(); ++q) {
        path.poses.push_back(poses[q]);
        path.segment_meta.push_back({prim.reversed, prim.id, prim.turn});
      }
      path.node_pose_index.push_back(path.poses.size() - 1);
      path.node_cost.push_back(r.g_values[k]);
    }
    if (r.analytic_suffix) {
      const auto& s = *r.analytic_suffix;
      for (std::size_t q = 1; q < s.poses.size(); ++q) {
        path.poses.push_back(s.poses[q]);
        path.segment_meta.push_back(s.meta[q - 1]);
      }
      path.analytic = true;
    }
    return path;
  }

  // Relaxed goal modes also consider the stricter mode's result and keep the
  // shorter path, so accepting more goal headings never lengthens the path.
  Path plan_mode(const Costmap& map, const PoseSE2& start, const PoseSE2& goal, GoalMode mode) {
    const GoalMode saved = cfg_.goal_mode;
    cfg_.goal_mode = mode;
    std::optional<Path> own;
    std::optional<PlanningError> own_error;
    try {
      own = cfg_.kind == PlannerKind::kHybrid ? plan_hybrid(map, start, goal) : plan_lattice(map, start, goal);
    } catch (const PlanningError& e) {
      own_error = e;
    } catch (...) {
      cfg_.goal_mode = saved;
      throw;
    }
    cfg_.goal_mode = saved;
    if (mode == GoalMode::kExact) {
      if (own_error) throw *own_error;
      return *own;
    }
    const GoalMode stricter = mode == GoalMode::kAnyHeading ? GoalMode::kBidirectional : GoalMode::kExact;
    std::optional<Path> other;
    try {
      other = plan_mode(map, start, goal, stricter);
    } catch (const PlanningError&) {
      if (own_error) throw *own_error;
    }
    if (!own) return *other;
    if (!other) return *own;
    const std::size_t expansions = own->expansions + other->expansions;
    Path& best = polyline_length(other->poses) < polyline_length(own->poses) ? *other : *own;
    best.expansions = expansions;
    return best;
  }

  Path plan_hybrid(const Costmap& map, const PoseSE2& start, const PoseSE2& goal) {
    using namespace planner_detail;
    ensure_hybrid(map.resolution());
    const NonholonomicLUT* lut = ensure_lut(map.resolution());
    const GoalSpec gs{goal, *map.world_to_grid(goal.x, goal.y), cfg_.goal_mode};
    ContinuousSupport support(map, cfg_, gs, cache_, lut);
    HybridGraph graph(map, cfg_, hybrid_prims_, support);
    const auto r = a_star(graph, graph.make_state(start), cfg_.limits);
    if (!r.found()) fail(r);
    return assemble(graph, r, {start});
  }

  Path plan_lattice(const Costmap& map, const PoseSE2& start, const PoseSE2& goal) {
    using namespace planner_detail;
    ensure_lattice(map.resolution());
    const NonholonomicLUT* lut = ensure_lut(map.resolution());
    const GoalSpec gs{goal, *map.world_to_grid(goal.x, goal.y), cfg_.goal_mode};
    ContinuousSupport support(map, cfg_, gs, cache_, lut);
    LatticeGraph graph(map, cfg_, *control_set_, lattice_prims_, support);
    const auto s = graph.snap(start);
    const PoseSE2 snapped = graph.pose_of(s);
    if (collision_check(map, snapped, cfg_.footprint, cfg_.allow_unknown)) {
      throw PlanningError(PlanStatus::kStartInCollision, "start pose snapped to the lattice is in collision");
    }
    const auto r = a_star(graph, s, cfg_.limits);
    if (!r.found()) fail(r);
    return assemble(graph, r, {snapped});
  }

  PlannerConfig cfg_;
  ObstacleHeuristicCache cache_;
  std::shared_ptr<const NonholonomicLUT> lut_;
  std::vector<MotionPrimitive> hybrid_prims_;
  double hybrid_resolution_ = 0.0;
  std::optional<ControlSet> control_set_;
  std::vector<MotionPrimitive> lattice_prims_;
};

inline Path plan(const Costmap& map, const PoseSE2& start, const PoseSE2& goal, const PlannerConfig& cfg) {
  Planner p(cfg);
  return p.plan(map, start, goal);
}

inline void write_path_csv(const Path& path, std::ostream& out) {
  out << "x,y,theta,direction\n" << std::setprecision(10);
  for (std::size_t k = 0; k < path.poses.size(); ++k) {
    const bool rev = !path.segment_meta.empty() && path.segment_meta[std::min(k, path.segment_meta.size() - 1)].reversed;
    out << path.poses[k].x << ',' << path.poses[k].y << ',' << path.poses[k].theta << ',' << (rev ? "reverse" : "forward")
        << "\n";
  }
}

inline void write_path_csv(const Path& path, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw InvalidArgument("cannot write path file: " + file.string());
  write_path_csv(path, out);
}

// Reads a path written by write_path_csv (poses only; segment directions restored).
inline Path read_path_csv(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw InvalidArgument("cannot open path file: " + file.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("x,y,theta", 0) != 0) throw InvalidArgument("path file lacks header");
  Path p;
  std::vector<bool> rev;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string a, b, c, d;
    if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') || !std::getline(ss, c, ',')) {
      throw InvalidArgument("bad path row: " + line);
    }
    std::getline(ss, d, ',');
    try {
      p.poses.emplace_back(std::stod(a), std::stod(b), std::stod(c));
    } catch (const std::exception&) {
      throw InvalidArgument("bad number in path row: " + line);
    }
    rev.push_back(d == "reverse");
  }
  for (std::size_t k = 1; k < p.poses.size(); ++k) p.segment_meta.push_back({rev[k - 1], -1, 0});
  p.length_m = polyline_length(p.poses);
  return p;
}

}  // namespace feasplan
