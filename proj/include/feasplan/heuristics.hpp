#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <span>
#include <sstream>
#include <vector>

#include "feasplan/core.hpp"
#include "feasplan/curves.hpp"
#include "feasplan/gridmap.hpp"

namespace feasplan {

inline constexpr double kInfiniteCost = std::numeric_limits<double>::infinity();

// Cost of moving distance `d` into a cell of cost `cell_cost`.
inline double traversal_cost(double d, CostValue cell_cost, double alpha, double c_max = Costmap::c_max()) {
  return d * (1.0 + alpha * static_cast<double>(cell_cost) / c_max);
}

// Octile distance between two cells, in meters.
inline double octile_distance(int di, int dj, double resolution) {
  const double a = std::abs(di), b = std::abs(dj);
  return resolution * (std::max(a, b) + (std::sqrt(2.0) - 1.0) * std::min(a, b));
}

// ---------------------------------------------------------------------------
// Cost-to-goal over the 8-connected grid, computed on demand from the goal and
// kept between queries. Each query resumes the retained frontier, re-ordered
// toward the queried cell, until that cell is closed.
class ObstacleHeuristicCache {
 public:
  // Re-targets the cache. Everything computed so far is dropped when the map
  // contents, the goal or alpha differ from the previous call.
  void set_goal(const Costmap& map, GridIndex goal, double alpha, bool allow_unknown = false) {
    if (valid_for(map, goal, alpha, allow_unknown)) return;
    map_ = &map;
    revision_ = map.revision();
    width_ = map.width();
    height_ = map.height();
    goal_ = goal;
    alpha_ = alpha;
    allow_unknown_ = allow_unknown;
    ++generation_;
    expansions_ = 0;
    g_.assign(map.size(), kInfiniteCost);
    closed_.assign(map.size(), 0);
    heap_.clear();
    target_ = -1;
    if (!map.in_bounds(goal.i, goal.j)) throw InvalidArgument("goal cell outside the map");
    const auto gi = static_cast<std::int64_t>(map.index(goal.i, goal.j));
    if (!blocked(gi)) {
      g_[gi] = 0.0;
      heap_.push_back({0.0, 0.0, gi});
    }
  }

  bool valid_for(const Costmap& map, GridIndex goal, double alpha, bool allow_unknown = false) const {
    return map_ == &map && revision_ == map.revision() && goal_ == goal && alpha_ == alpha &&
           allow_unknown_ == allow_unknown;
  }

  // Forgets the goal; the next set_goal starts from scratch.
  void reset() {
    map_ = nullptr;
    ++generation_;
  }

  bool has_goal() const { return map_ != nullptr; }
  GridIndex goal() const { return goal_; }
  double alpha() const { return alpha_; }
  std::uint64_t generation() const { return generation_; }
  std::size_t expansions() const { return expansions_; }

  // Optimal grid cost from `cell` to the goal; infinity when unreachable.
  double query(GridIndex cell) {
    if (!map_) throw InvalidArgument("obstacle heuristic queried before set_goal");
    if (cell.i < 0 || cell.j < 0 || cell.i >= width_ || cell.j >= height_) return kInfiniteCost;
    const auto target = static_cast<std::int64_t>(cell.j) * width_ + cell.i;
    if (closed_[target]) return g_[target];
    if (blocked(target)) return kInfiniteCost;
    if (target != target_) retarget(target);
    expand_until_closed(target);
    return closed_[target] ? g_[target] : kInfiniteCost;
  }

  // Cost-to-goal for every cell (finishes the search). Mostly for tests and tools.
  const std::vector<double>& full_field() {
    for (std::int64_t k = 0; k < static_cast<std::int64_t>(g_.size()); ++k) {
      if (!closed_[k] && !blocked(k)) query(GridIndex{static_cast<int>(k % width_), static_cast<int>(k / width_)});
    }
    return g_;
  }

 private:
  struct Entry {
    double f;
    double g;
    std::int64_t idx;
    bool operator<(const Entry& o) const {  // max-heap comparator inverted for min-heap use
      if (f != o.f) return f > o.f;
      return g < o.g;
    }
  };

  bool blocked(std::int64_t idx) const { return is_lethal(map_->at(static_cast<std::size_t>(idx)), allow_unknown_); }

  double h_to_target(std::int64_t idx) const {
    const int di = static_cast<int>(idx % width_) - static_cast<int>(target_ % width_);
    const int dj = static_cast<int>(idx / width_) - static_cast<int>(target_ / width_);
    return octile_distance(di, dj, map_->resolution());
  }

  void retarget(std::int64_t target) {
    target_ = target;
    std::vector<Entry> fresh;
    fresh.reserve(heap_.size());
    for (const auto& e : heap_) {
      if (closed_[e.idx] || e.g > g_[e.idx]) continue;
      fresh.push_back({e.g + h_to_target(e.idx), e.g, e.idx});
    }
    heap_.swap(fresh);
    std::make_heap(heap_.begin(), heap_.end());
  }

  void expand_until_closed(std::int64_t target) {
    static constexpr int kDi[8] = {1, -1, 0, 0, 1, 1, -1, -1};
    static constexpr int kDj[8] = {0, 0, 1, -1, 1, -1, 1, -1};
    const double res = map_->resolution();
    const double diag = std::sqrt(2.0) * res;
    while (!heap_.empty() && !closed_[target]) {
      std::pop_heap(heap_.begin(), heap_.end());
      const Entry e = heap_.back();
      heap_.pop_back();
      if (closed_[e.idx] || e.g > g_[e.idx]) continue;
      closed_[e.idx] = 1;
      ++expansions_;
      const int i = static_cast<int>(e.idx % width_);
      const int j = static_cast<int>(e.idx / width_);
      // Moving from a neighbor into this cell is charged at this cell.
      const double unit = 1.0 + alpha_ * traversal_cell_cost(map_->at(static_cast<std::size_t>(e.idx))) /
                                    static_cast<double>(Costmap::c_max());
      for (int k = 0; k < 8; ++k) {
        const int ni = i + kDi[k], nj = j + kDj[k];
        if (ni < 0 || nj < 0 || ni >= width_ || nj >= height_) continue;
        const std::int64_t n = static_cast<std::int64_t>(nj) * width_ + ni;
        if (closed_[n] || blocked(n)) continue;
        const double ng = e.g + (k < 4 ? res : diag) * unit;
        if (ng < g_[n]) {
          g_[n] = ng;
          heap_.push_back({ng + h_to_target(n), ng, n});
          std::push_heap(heap_.begin(), heap_.end());
        }
      }
    }
  }

  const Costmap* map_ = nullptr;
  std::uint64_t revision_ = 0;
  int width_ = 0;
  int height_ = 0;
  GridIndex goal_{-1, -1};
  double alpha_ = 0.0;
  bool allow_unknown_ = false;
  std::uint64_t generation_ = 0;
  std::size_t expansions_ = 0;
  std::vector<double> g_;
  std::vector<std::uint8_t> closed_;
  std::vector<Entry> heap_;
  std::int64_t target_ = -1;
};

inline double obstacle_heuristic_query(ObstacleHeuristicCache& cache, const Costmap& map, GridIndex cell,
                                       double alpha) {
  if (!cache.has_goal()) throw InvalidArgument("obstacle heuristic has no goal");
  cache.set_goal(map, cache.goal(), alpha);
  return cache.query(cell);
}

// ---------------------------------------------------------------------------
// Obstacle-free shortest-curve distances from the origin (heading 0) to every
// (dx, dy, heading) lattice offset inside a square window.

class LutError : public Error {
 public:
  using Error::Error;
};

struct LutKey {
  MotionModel model = MotionModel::kReedsShepp;
  double turning_radius = 0.4;
  double window_radius = 4.0;
  int heading_bins = 16;
  double resolution = 0.05;

  friend bool operator==(const LutKey&, const LutKey&) = default;
};

class NonholonomicLUT {
 public:
  static constexpr std::uint32_t kVersion = 1;
  static constexpr char kMagic[8] = {'F', 'P', 'L', 'U', 'T', '\0', '\0', '\0'};

  static NonholonomicLUT build(const LutKey& key, std::size_t memory_budget_bytes = std::size_t{1} << 30) {
    if (!(key.turning_radius > 0.0)) throw InvalidArgument("turning radius must be positive");
    if (key.heading_bins < 8) throw InvalidArgument("lookup table needs at least 8 heading bins");
    if (!(key.resolution > 0.0) || !(key.window_radius > 0.0)) {
      throw InvalidArgument("window and resolution must be positive");
    }
    NonholonomicLUT lut;
    lut.key_ = key;
    lut.half_ = static_cast<int>(std::ceil(key.window_radius / key.resolution - 1e-9));
    const std::size_t entries = lut.entry_count();
    const std::size_t bytes = entries * sizeof(double);
    if (bytes > memory_budget_bytes) {
      std::ostringstream msg;
      msg << "lookup table needs " << entries << " entries (" << bytes / (1024.0 * 1024.0)
          << " MiB), over the budget of " << memory_budget_bytes / (1024.0 * 1024.0) << " MiB";
      throw InvalidArgument(msg.str());
    }
    lut.table_.resize(entries);
    const PoseSE2 origin(0.0, 0.0, 0.0);
    for (int dx = -lut.half_; dx <= lut.half_; ++dx) {
      for (int dy = 0; dy <= lut.half_; ++dy) {
        for (int b = 0; b < key.heading_bins; ++b) {
          // On the mirror axis the table must be exactly symmetric in heading.
          if (dy == 0 && b > key.heading_bins / 2) {
            lut.table_[lut.slot(dx, 0, b)] = lut.table_[lut.slot(dx, 0, key.heading_bins - b)];
            continue;
          }
          const PoseSE2 target(dx * key.resolution, dy * key.resolution, b * lut.bin_size());
          const double d = key.model == MotionModel::kDubins ? dubins_distance(origin, target, key.turning_radius)
                                                             : reeds_shepp_distance(origin, target, key.turning_radius);
          lut.table_[lut.slot(dx, dy, b)] = d;
        }
      }
    }
    return lut;
  }

  const LutKey& key() const { return key_; }
  int half_extent() const { return half_; }
  double bin_size() const { return kTwoPi / key_.heading_bins; }
  std::size_t entry_count() const {
    return static_cast<std::size_t>(2 * half_ + 1) * (half_ + 1) * key_.heading_bins;
  }

  // Stored distance for an integer offset; mirrored offsets (dy < 0) use
  // d(x, -y, -theta) = d(x, y, theta).
  double at(int dx, int dy, int bin) const {
    const int n = key_.heading_bins;
    bin = ((bin % n) + n) % n;
    if (dy < 0) {
      dy = -dy;
      bin = (n - bin) % n;
    }
    return table_[slot(dx, dy, bin)];
  }

  bool inside(double x, double y) const {
    const double lim = half_ * key_.resolution;
    return std::abs(x) <= lim && std::abs(y) <= lim;
  }

  // Distance to the pose (x, y, theta) given in the origin frame. Takes the
  // smallest of the enclosing lattice corners; Euclidean outside the window.
  double query(double x, double y, double theta) const {
    const double euclid = std::hypot(x, y);
    const double fx = x / key_.resolution;
    const double fy = y / key_.resolution;
    const double ft = normalize_angle(theta) / bin_size();
    const int x0 = static_cast<int>(std::floor(fx)), y0 = static_cast<int>(std::floor(fy));
    const int t0 = static_cast<int>(std::floor(ft));
    const int x1 = (fx - x0 > 1e-9) ? x0 + 1 : x0;
    const int y1 = (fy - y0 > 1e-9) ? y0 + 1 : y0;
    const int t1 = (ft - t0 > 1e-9) ? t0 + 1 : t0;
    if (std::min(x0, y0) < -half_ || std::max(x1, y1) > half_) return euclid;
    double best = kInfiniteCost;
    for (int cx : {x0, x1}) {
      for (int cy : {y0, y1}) {
        for (int ct : {t0, t1}) best = std::min(best, at(cx, cy, ct));
      }
    }
    return std::max(best, euclid);
  }

  // Distance from `state` to `goal`, evaluated in the state's frame.
  double distance(const PoseSE2& state, const PoseSE2& goal) const {
    const PoseSE2 rel = relative_pose(state, goal);
    return query(rel.x, rel.y, rel.theta);
  }

  void save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw LutError("cannot write lookup table: " + path.string());
    out.write(kMagic, sizeof(kMagic));
    write_pod(out, kVersion);
    write_pod(out, static_cast<std::uint32_t>(key_.model));
    write_pod(out, key_.turning_radius);
    write_pod(out, key_.window_radius);
    write_pod(out, key_.resolution);
    write_pod(out, static_cast<std::int32_t>(key_.heading_bins));
    write_pod(out, static_cast<std::int32_t>(half_));
    write_pod(out, static_cast<std::uint64_t>(table_.size()));
    out.write(reinterpret_cast<const char*>(table_.data()),
              static_cast<std::streamsize>(table_.size() * sizeof(double)));
    if (!out) throw LutError("failed writing lookup table");
  }

  // Loads a table and checks it was built for `expected`.
  static NonholonomicLUT load(const std::filesystem::path& path, const LutKey& expected) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LutError("cannot open lookup table: " + path.string());
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) throw LutError("not a lookup table file");
    const auto version = read_pod<std::uint32_t>(in);
    if (version != kVersion) throw LutError("lookup table version " + std::to_string(version) + " unsupported");
    NonholonomicLUT lut;
    lut.key_.model = static_cast<MotionModel>(read_pod<std::uint32_t>(in));
    lut.key_.turning_radius = read_pod<double>(in);
    lut.key_.window_radius = read_pod<double>(in);
    lut.key_.resolution = read_pod<double>(in);
    lut.key_.heading_bins = read_pod<std::int32_t>(in);
    lut.half_ = read_pod<std::int32_t>(in);
    const auto count = read_pod<std::uint64_t>(in);
    if (!(lut.key_ == expected)) throw LutError("lookup table key does not match the requested configuration");
    if (count != lut.entry_count()) throw LutError("lookup table size does not match its header");
    lut.table_.resize(count);
    in.read(reinterpret_cast<char*>(lut.table_.data()), static_cast<std::streamsize>(count * sizeof(double)));
    if (!in) throw LutError("lookup table truncated");
    return lut;
  }

  friend bool operator==(const NonholonomicLUT& a, const NonholonomicLUT& b) {
    return a.key_ == b.key_ && a.half_ == b.half_ && a.table_ == b.table_;
  }

 private:
  std::size_t slot(int dx, int dy, int bin) const {
    return (static_cast<std::size_t>(dx + half_) * (half_ + 1) + dy) * key_.heading_bins + bin;
  }

  template <typename T>
  static void write_pod(std::ostream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
  }
  template <typename T>
  static T read_pod(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw LutError("lookup table header truncated");
    return v;
  }

  LutKey key_;
  int half_ = 0;
  std::vector<double> table_;
};

// ---------------------------------------------------------------------------

// The grid term is a cost between cell centers; a pose anywhere inside its cell
// can be up to one diagonal closer, so that margin is removed. `scale` < 1
// additionally covers the octile/Euclidean gap (at most 1/cos(pi/8)) at the
// price of a much weaker heuristic on long queries.
struct ObstacleTermScaling {
  double scale = 1.0;
  double margin_cells = std::sqrt(2.0);
};

// max(obstacle term, curve term). `goals` lists the acceptable goal poses (one
// for an exact goal, two for a bidirectional one); an empty list means any
// heading and the curve term falls back to Euclidean distance.
inline double combined_heuristic(const PoseSE2& state, std::span<const PoseSE2> goals, ObstacleHeuristicCache& cache,
                                 const NonholonomicLUT* lut, const Costmap& map, double alpha,
                                 const ObstacleTermScaling& scaling = {}) {
  const auto cell = map.world_to_grid(state.x, state.y);
  if (!cell) return kInfiniteCost;
  const double grid = cache.query(*cell);
  if (!std::isfinite(grid)) return kInfiniteCost;
  const double margin = scaling.margin_cells * map.resolution() * (1.0 + alpha);
  const double obstacle = std::max(0.0, scaling.scale * grid - margin);
  double curve = kInfiniteCost;
  if (goals.empty() || lut == nullptr) {
    curve = 0.0;
  } else {
    for (const PoseSE2& g : goals) curve = std::min(curve, lut->distance(state, g));
  }
  if (goals.empty()) return obstacle;
  return std::max(obstacle, curve);
}

inline double combined_heuristic(const PoseSE2& state, const PoseSE2& goal, ObstacleHeuristicCache& cache,
                                 const NonholonomicLUT& lut, const Costmap& map, double alpha) {
  const auto gcell = map.world_to_grid(goal.x, goal.y);
  if (!gcell) throw InvalidArgument("goal outside the map");
  cache.set_goal(map, *gcell, alpha);
  return combined_heuristic(state, std::span<const PoseSE2>(&goal, 1), cache, &lut, map, alpha);
}

}  // namespace feasplan
