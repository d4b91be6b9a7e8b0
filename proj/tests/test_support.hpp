#pragma once

#include <cmath>
#include <optional>
#include <random>
#include <set>
#include <utility>
#include <vector>

#include "feasplan/feasplan.hpp"

namespace feasplan::testing {

// Cold Dijkstra over the whole grid, written against the cost formula directly:
// dist(c) = min over neighbours n of step(c, n) * (1 + alpha * cost(n) / 253) + dist(n).
inline std::vector<double> brute_force_cost_to_goal(const Costmap& map, GridIndex goal, double alpha) {
  const int w = map.width(), h = map.height();
  std::vector<double> dist(map.size(), std::numeric_limits<double>::infinity());
  auto lethal = [&](int i, int j) { return map.at(i, j) >= 254; };
  if (lethal(goal.i, goal.j)) return dist;
  std::set<std::pair<double, int>> open;
  dist[goal.j * w + goal.i] = 0.0;
  open.insert({0.0, goal.j * w + goal.i});
  while (!open.empty()) {
    const auto [d, u] = *open.begin();
    open.erase(open.begin());
    const int ui = u % w, uj = u / w;
    const double cu = map.at(ui, uj);
    for (int dj = -1; dj <= 1; ++dj) {
      for (int di = -1; di <= 1; ++di) {
        if (!di && !dj) continue;
        const int vi = ui + di, vj = uj + dj;
        if (vi < 0 || vj < 0 || vi >= w || vj >= h || lethal(vi, vj)) continue;
        const double step = (di && dj) ? std::sqrt(2.0) * map.resolution() : map.resolution();
        const double nd = d + step * (1.0 + alpha * cu / 253.0);
        const int v = vj * w + vi;
        if (nd < dist[v]) {
          open.erase({dist[v], v});
          dist[v] = nd;
          open.insert({nd, v});
        }
      }
    }
  }
  return dist;
}

inline Costmap random_cost_map(std::mt19937& rng, int n, double lethal_p) {
  Costmap m(n, n, 0.05);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> c(0, 253);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const double r = u(rng);
      m.set(i, j, r < lethal_p ? cost::kLethal : (r < 0.5 ? 0 : static_cast<CostValue>(c(rng))));
    }
  }
  return m;
}

// Random rectangles on a small map, inflated so circle footprints apply.
inline Costmap small_random_map(std::uint64_t seed, int cells = 64, double density = 0.1) {
  RandomMapParams p;
  p.width_m = p.height_m = cells * 0.05;
  p.resolution = 0.05;
  p.obstacle_density = density;
  p.obstacle_size_min = 0.1;
  p.obstacle_size_max = 0.4;
  p.density_tolerance = 0.01;
  p.seed = seed;
  return inflate(generate_random_map(p), InflationParams{0.1, 5.0, false});
}

// Forward Dijkstra on the 8-connected grid: each move costs
// length * (1 + alpha * cost(destination) / 253); cells at 253 or above block.
inline double grid_cost_oracle(const Costmap& map, GridIndex s, GridIndex g, double alpha) {
  const int w = map.width(), h = map.height();
  auto blocked = [&](int i, int j) { return map.at(i, j) >= 253; };
  std::vector<double> dist(map.size(), std::numeric_limits<double>::infinity());
  std::set<std::pair<double, int>> open;
  dist[s.j * w + s.i] = 0.0;
  open.insert({0.0, s.j * w + s.i});
  while (!open.empty()) {
    const auto [d, u] = *open.begin();
    open.erase(open.begin());
    if (u == g.j * w + g.i) return d;
    for (int dj = -1; dj <= 1; ++dj) {
      for (int di = -1; di <= 1; ++di) {
        if (!di && !dj) continue;
        const int vi = u % w + di, vj = u / w + dj;
        if (vi < 0 || vj < 0 || vi >= w || vj >= h || blocked(vi, vj)) continue;
        const double step = (di && dj) ? std::sqrt(2.0) * map.resolution() : map.resolution();
        const double nd = d + step * (1.0 + alpha * map.at(vi, vj) / 253.0);
        const int v = vj * w + vi;
        if (nd < dist[v]) {
          open.erase({dist[v], v});
          dist[v] = nd;
          open.insert({nd, v});
        }
      }
    }
  }
  return std::numeric_limits<double>::infinity();
}

// Start/goal at cell centers with lattice headings, both free, at least
// `min_sep` apart and connected on the grid.
inline std::optional<std::pair<PoseSE2, PoseSE2>> sample_pair(const Costmap& map, std::mt19937_64& rng,
                                                              double min_sep, int attempts = 1000) {
  const auto headings = derive_headings(16);
  std::uniform_int_distribution<int> ci(0, map.width() - 1), cj(0, map.height() - 1), hb(0, 15);
  for (int a = 0; a < attempts; ++a) {
    const GridIndex s{ci(rng), cj(rng)}, g{ci(rng), cj(rng)};
    if (map.at(s.i, s.j) >= 200 || map.at(g.i, g.j) >= 200) continue;
    const Point2 ps = map.grid_to_world(s.i, s.j), pg = map.grid_to_world(g.i, g.j);
    if (distance(ps, pg) < min_sep) continue;
    if (std::isinf(grid_cost_oracle(map, s, g, 0.0))) continue;
    return std::make_pair(PoseSE2(ps.x, ps.y, headings[hb(rng)]), PoseSE2(pg.x, pg.y, headings[hb(rng)]));
  }
  return std::nullopt;
}

struct AdmissibilityTally {
  int states = 0;
  int violations = 0;
  double worst_ratio = 0.0;  // max h / remaining cost
};

// Compares the planner heuristic at every search node of `path` with the
// cost the path actually spends from that node to its end.
inline void tally_admissibility(const Costmap& map, const Path& path, const PoseSE2& goal, const PlannerConfig& cfg,
                                AdmissibilityTally& t, int max_states = 1 << 30) {
  ObstacleHeuristicCache cache;
  const auto lut = planner_detail::shared_lut(planner_detail::lut_key_for(cfg, map.resolution()));
  const planner_detail::GoalSpec gs{goal, *map.world_to_grid(goal.x, goal.y), cfg.goal_mode};
  planner_detail::ContinuousSupport support(map, cfg, gs, cache, lut.get());
  for (std::size_t k = 0; k < path.node_pose_index.size() && max_states > 0; ++k, --max_states) {
    const double remaining = path.cost_total - path.node_cost[k];
    // The last node of a search that ended without a suffix is a goal state, where h is 0.
    const bool goal_state = !path.analytic && k + 1 == path.node_pose_index.size();
    const double h = goal_state ? 0.0 : support.heuristic(path.poses[path.node_pose_index[k]]);
    ++t.states;
    if (remaining > 1e-9) t.worst_ratio = std::max(t.worst_ratio, h / remaining);
    if (h > remaining + 1e-9) ++t.violations;
  }
}

// Free map with a high-cost (non-lethal) vertical band between start and goal,
// leaving a free gap above it.
struct BandScenario {
  Costmap map{240, 160, 0.05};
  PoseSE2 start;
  PoseSE2 goal;
  CostValue band_cost = 250;
};

inline BandScenario band_scenario() {
  BandScenario b;
  for (int j = 0; j < 100; ++j) {
    for (int i = 100; i < 140; ++i) b.map.set(i, j, b.band_cost);
  }
  const Point2 s = b.map.grid_to_world(40, 60), g = b.map.grid_to_world(200, 60);
  b.start = PoseSE2(s.x, s.y, 0.0);
  b.goal = PoseSE2(g.x, g.y, 0.0);
  return b;
}

inline CostValue max_cost_along(const Costmap& map, const Path& p) {
  CostValue m = 0;
  for (const auto& q : p.poses) {
    const auto c = map.world_to_grid(q.x, q.y);
    m = std::max(m, map.at(c->i, c->j));
  }
  return m;
}

}  // namespace feasplan::testing
