#include <gtest/gtest.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <random>

#include "test_support.hpp"

using namespace feasplan;
using namespace feasplan::testing;

namespace {

PlannerConfig config_for(PlannerKind k) {
  PlannerConfig c;
  c.kind = k;
  return c;
}

void expect_valid_path(const Costmap& map, const Path& p, const PlannerConfig& cfg) {
  ASSERT_FALSE(p.poses.empty());
  EXPECT_EQ(p.segment_meta.size() + 1, p.poses.size());
  EXPECT_LE(max_spacing(p.poses), 1.5 * map.resolution() + 1e-9);
  for (const auto& q : p.poses) EXPECT_FALSE(collision_check(map, q, cfg.footprint, cfg.allow_unknown));
  EXPECT_NEAR(p.length_m, polyline_length(p.poses), 1e-6);
  if (cfg.kind != PlannerKind::kTwoD) {
    const auto rev = p.reversed_flags();
    EXPECT_LE(max_discrete_curvature(p.poses, rev), 1.0 / cfg.turning_radius + 1e-3);
  }
}

// U-shaped pocket open toward the start; the goal lies behind its closed end.
Costmap u_shape_map() {
  Costmap m(120, 80, 0.05);
  for (int j = 20; j <= 60; ++j) {
    for (int t = 0; t < 3; ++t) m.set(80 + t, j, cost::kLethal);
  }
  for (int i = 40; i <= 82; ++i) {
    for (int t = 0; t < 3; ++t) {
      m.set(i, 20 + t, cost::kLethal);
      m.set(i, 58 + t, cost::kLethal);
    }
  }
  return inflate(m, InflationParams{0.1, 4.0, false});
}

}  // namespace

TEST(TraversalCost, MatchesWorkedValues) {
  EXPECT_DOUBLE_EQ(traversal_cost(0.05, 0, 2.0), 0.05);
  EXPECT_DOUBLE_EQ(traversal_cost(1.0, 253, 2.0), 3.0);
  EXPECT_NEAR(traversal_cost(1.0, 126, 2.0), 1.99604743, 1e-8);
}

TEST(Penalties, FollowTurnSequence) {
  const PlannerConfig cfg;
  EXPECT_DOUBLE_EQ(apply_penalties(1.0, 0, 1, false, cfg), 1.0);
  EXPECT_DOUBLE_EQ(apply_penalties(1.0, 1, 1, false, cfg), 1.05);
  EXPECT_DOUBLE_EQ(apply_penalties(1.0, 1, 0, false, cfg), 1.05);
  EXPECT_DOUBLE_EQ(apply_penalties(1.0, -1, 1, false, cfg), 1.10);
  EXPECT_DOUBLE_EQ(apply_penalties(1.0, 0, 0, true, cfg), 2.0);
  EXPECT_DOUBLE_EQ(apply_penalties(1.0, 1, -1, true, cfg), 2.2);
}

TEST(PlannerConfig, RejectsOutOfRangeValues) {
  PlannerConfig c;
  c.alpha = -1;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = {};
  c.reverse_penalty = 0.5;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = {};
  c.turning_radius = 0.0;
  EXPECT_THROW(Planner{c}, InvalidArgument);
  EXPECT_EQ(parse_planner_kind("lattice"), PlannerKind::kLattice);
  EXPECT_EQ(parse_goal_mode("any"), GoalMode::kAnyHeading);
  EXPECT_THROW(parse_planner_kind("rrt"), InvalidArgument);
}

TEST(TwoDPlanner, MatchesDijkstraOracleOnRandomMaps) {
  const auto cfg = config_for(PlannerKind::kTwoD);
  std::mt19937_64 rng(7);
  int checked = 0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const Costmap map = small_random_map(seed);
    const auto pair = sample_pair(map, rng, 1.0);
    ASSERT_TRUE(pair) << "map " << seed;
    const auto [s, g] = *pair;
    const Path p = plan(map, s, g, cfg);
    const double oracle = grid_cost_oracle(map, *map.world_to_grid(s.x, s.y), *map.world_to_grid(g.x, g.y), cfg.alpha);
    EXPECT_NEAR(p.cost_total, oracle, 1e-9 * oracle) << "map " << seed;
    expect_valid_path(map, p, cfg);
    ++checked;
  }
  EXPECT_EQ(checked, 50);
}

TEST(HybridPlanner, StraightLineOnFreeMap) {
  const Costmap map(1000, 1000, 0.05);
  const auto cfg = config_for(PlannerKind::kHybrid);
  const Path p = plan(map, {20.025, 25.025, 0.0}, {30.025, 25.025, 0.0}, cfg);
  EXPECT_NEAR(p.length_m, 10.0, 0.1);
  expect_valid_path(map, p, cfg);
}

TEST(Planners, IdenticalStartAndGoalGiveSinglePose) {
  const Costmap map(100, 100, 0.05);
  for (auto k : {PlannerKind::kTwoD, PlannerKind::kHybrid, PlannerKind::kLattice}) {
    const Path p = plan(map, {2.0, 2.0, 0.3}, {2.0, 2.0, 0.3}, config_for(k));
    EXPECT_EQ(p.poses.size(), 1u);
    EXPECT_EQ(p.length_m, 0.0);
  }
}

TEST(Planners, ReportDistinctFailures) {
  Costmap map(100, 100, 0.05);
  for (int j = 0; j < 100; ++j) map.set(50, j, cost::kLethal);
  map.set(10, 10, cost::kLethal);
  for (auto k : {PlannerKind::kTwoD, PlannerKind::kHybrid, PlannerKind::kLattice}) {
    const auto cfg = config_for(k);
    auto status_of = [&](PoseSE2 s, PoseSE2 g, PlannerConfig c) {
      try {
        plan(map, s, g, c);
      } catch (const PlanningError& e) {
        return std::optional<PlanStatus>(e.status());
      }
      return std::optional<PlanStatus>();
    };
    EXPECT_EQ(status_of({0.525, 0.525, 0}, {1.0, 1.0, 0}, cfg), PlanStatus::kStartInCollision);
    EXPECT_EQ(status_of({1.0, 1.0, 0}, {0.525, 0.525, 0}, cfg), PlanStatus::kGoalInCollision);
    EXPECT_EQ(status_of({1.0, 1.0, 0}, {4.0, 1.0, 0}, cfg), PlanStatus::kNoPathExists);
    auto limited = cfg;
    limited.limits.max_planning_time = 1e-9;
    Costmap detour(100, 100, 0.05);
    for (int j = 0; j < 90; ++j) detour.set(50, j, cost::kLethal);
    try {
      plan(detour, {1.0, 1.0, 0}, {4.0, 1.0, 0}, limited);
      ADD_FAILURE() << "expected a time limit";
    } catch (const PlanningError& e) {
      EXPECT_EQ(e.status(), PlanStatus::kTimeLimit);
    }
  }
}

TEST(Planners, CostAwareRoutingAvoidsHighCostBand) {
  const auto b = band_scenario();
  for (auto k : {PlannerKind::kTwoD, PlannerKind::kHybrid, PlannerKind::kLattice}) {
    auto cfg = config_for(k);
    cfg.alpha = 2.0;
    const Path aware = plan(b.map, b.start, b.goal, cfg);
    cfg.alpha = 0.0;
    const Path blind = plan(b.map, b.start, b.goal, cfg);
    EXPECT_LT(max_cost_along(b.map, aware), b.band_cost) << to_string(k);
    EXPECT_EQ(max_cost_along(b.map, blind), b.band_cost) << to_string(k);
    EXPECT_GT(aware.length_m, blind.length_m) << to_string(k);
  }
}

TEST(Planners, FeasibleOnRandomMaps) {
  std::mt19937_64 rng(11);
  for (auto k : {PlannerKind::kHybrid, PlannerKind::kLattice}) {
    for (bool reverse : {true, false}) {
      auto cfg = config_for(k);
      cfg.allow_reverse = reverse;
      Planner planner(cfg);
      for (std::uint64_t seed = 100; seed < 110; ++seed) {
        const Costmap map = small_random_map(seed);
        const auto pair = sample_pair(map, rng, 1.0);
        ASSERT_TRUE(pair);
        Path p;
        try {
          p = planner.plan(map, pair->first, pair->second);
        } catch (const PlanningError& e) {
          // Curvature limits can make grid-reachable pairs infeasible.
          EXPECT_EQ(e.status(), PlanStatus::kNoPathExists);
          continue;
        }
        expect_valid_path(map, p, cfg);
        if (!reverse) {
          for (const auto& m : p.segment_meta) EXPECT_FALSE(m.reversed);
        }
      }
    }
  }
}

TEST(Planners, GoalModesRelaxLength) {
  std::mt19937_64 rng(5);
  for (auto k : {PlannerKind::kHybrid, PlannerKind::kLattice}) {
    int compared = 0;
    for (std::uint64_t seed = 200; seed < 215; ++seed) {
      const Costmap map = seed == 200 ? Costmap(64, 64, 0.05) : small_random_map(seed);
      const auto pair = sample_pair(map, rng, 1.5);
      ASSERT_TRUE(pair);
      auto cfg = config_for(k);
      double len[3];
      bool ok = true;
      for (int m = 0; m < 3 && ok; ++m) {
        cfg.goal_mode = static_cast<GoalMode>(m);
        try {
          len[m] = plan(map, pair->first, pair->second, cfg).length_m;
        } catch (const PlanningError&) {
          ok = false;
        }
      }
      if (!ok) continue;
      ++compared;
      EXPECT_LE(len[1], len[0] + 1e-9) << to_string(k) << " map " << seed;
      EXPECT_LE(len[2], len[1] + 1e-9) << to_string(k) << " map " << seed;
    }
    EXPECT_GE(compared, 10);
  }
}

TEST(HybridPlanner, CostAwareHeuristicExpandsFewerNodesInDeadEnd) {
  const Costmap map = u_shape_map();
  const PoseSE2 start(1.0, 2.0, 0.0), goal(4.8, 2.0, 0.0);
  auto cfg = config_for(PlannerKind::kHybrid);
  const Path aware = plan(map, start, goal, cfg);
  cfg.cost_aware_heuristic = false;
  const Path binary = plan(map, start, goal, cfg);
  EXPECT_LT(aware.expansions, binary.expansions);
}

TEST(Planners, HeuristicNeverExceedsRemainingCost) {
  std::mt19937_64 rng(3);
  for (auto k : {PlannerKind::kHybrid, PlannerKind::kLattice}) {
    auto cfg = config_for(k);
    cfg.beta = cfg.gamma = 0.0;
    AdmissibilityTally t;
    for (std::uint64_t seed = 300; seed < 305; ++seed) {
      const Costmap map = small_random_map(seed);
      const auto pair = sample_pair(map, rng, 1.0);
      ASSERT_TRUE(pair);
      try {
        const Path p = plan(map, pair->first, pair->second, cfg);
        tally_admissibility(map, p, pair->second, cfg, t);
      } catch (const PlanningError&) {
      }
    }
    EXPECT_GT(t.states, 20) << to_string(k);
    EXPECT_EQ(t.violations, 0) << to_string(k) << " worst ratio " << t.worst_ratio;
  }
}

TEST(Planners, WarmReplanIsFaster) {
  for (auto k : {PlannerKind::kHybrid, PlannerKind::kLattice}) {
    std::mt19937_64 rng(9);
    Planner planner(config_for(k));
    std::vector<double> ratios;
    for (int trial = 0; trial < 20; ++trial) {
      const Costmap map = small_random_map(600 + static_cast<std::uint64_t>(trial));
      const auto pair = sample_pair(map, rng, 1.0);
      ASSERT_TRUE(pair);
      try {
        planner.heuristic_cache().reset();
        const Path cold = planner.plan(map, pair->first, pair->second);
        // Replan from the next search node toward the same goal.
        const std::size_t next = cold.node_pose_index.size() > 1 ? cold.node_pose_index[1] : 0;
        const Path warm = planner.plan(map, cold.poses[next], pair->second);
        ratios.push_back(cold.planning_time_s / warm.planning_time_s);
      } catch (const PlanningError&) {
      }
    }
    ASSERT_GE(ratios.size(), 15u);
    std::nth_element(ratios.begin(), ratios.begin() + ratios.size() / 2, ratios.end());
    EXPECT_GE(ratios[ratios.size() / 2], 2.0) << to_string(k);
  }
}

// ---------------------------------------------------------------------------

TEST(Smoother, StraightPathUnchanged) {
  const Costmap map(100, 100, 0.05);
  std::vector<PoseSE2> poses;
  for (int k = 0; k < 20; ++k) poses.emplace_back(1.0 + 0.05 * k, 2.0, 0.0);
  SmoothReport rep;
  const auto out = smooth_poses(poses, std::vector<bool>(19, false), map, Footprint::circle(0.1), {}, false, &rep);
  for (std::size_t k = 0; k < poses.size(); ++k) {
    EXPECT_NEAR(out[k].x, poses[k].x, 1e-12);
    EXPECT_NEAR(out[k].y, poses[k].y, 1e-12);
  }
}

TEST(Smoother, ZigZagMiddleMovesTowardChord) {
  const Costmap map(100, 100, 0.05);
  const std::vector<PoseSE2> poses{{1.0, 1.0, 0.0}, {1.5, 1.5, 0.0}, {2.0, 1.0, 0.0}};
  SmoothReport rep;
  const auto out = smooth_poses(poses, {false, false}, map, Footprint::circle(0.1), {}, false, &rep);
  EXPECT_LT(out[1].y, 1.5);
  EXPECT_GT(out[1].y, 1.0);
  EXPECT_LT(rep.smoothness.back(), rep.smoothness.front());
}

TEST(Smoother, StaircaseAroundInflatedCorner) {
  Costmap raw(80, 80, 0.05);
  for (int j = 0; j < 40; ++j) {
    for (int i = 40; i < 80; ++i) raw.set(i, j, cost::kLethal);
  }
  const Costmap map = inflate(raw, InflationParams{0.1, 5.0, false});
  std::vector<PoseSE2> poses;
  for (int k = 0; k <= 30; ++k) poses.emplace_back(0.5 + 0.05 * k, 2.5, 0.0);
  // Then an upward staircase past the corner of the inflated block.
  for (int s = 1; s <= 30; ++s) poses.emplace_back(2.0 + 0.05 * ((s + 1) / 2), 2.5 + 0.05 * (s / 2), 0.0);
  const std::vector<bool> rev(poses.size() - 1, false);
  SmoothReport rep;
  const auto out = smooth_poses(poses, rev, map, Footprint::circle(0.1), {}, false, &rep);
  const auto pts = [](const std::vector<PoseSE2>& v) {
    std::vector<Point2> p;
    for (const auto& q : v) p.push_back(q.position());
    return p;
  };
  EXPECT_LT(smoothness_term(pts(out)), smoothness_term(pts(poses)));
  for (const auto& q : out) EXPECT_FALSE(collision_check(map, q, Footprint::circle(0.1)));
  EXPECT_EQ(out.front(), poses.front());
  EXPECT_EQ(out.back(), poses.back());
  for (std::size_t k = 1; k < rep.smoothness.size(); ++k) EXPECT_LE(rep.smoothness[k], rep.smoothness[k - 1]);
}

TEST(Smoother, PlannedPathsStayValid) {
  std::mt19937_64 rng(21);
  auto cfg = config_for(PlannerKind::kHybrid);
  Planner planner(cfg);
  for (std::uint64_t seed = 500; seed < 510; ++seed) {
    const Costmap map = small_random_map(seed);
    const auto pair = sample_pair(map, rng, 1.0);
    ASSERT_TRUE(pair);
    Path p;
    try {
      p = planner.plan_raw(map, pair->first, pair->second);
    } catch (const PlanningError&) {
      continue;
    }
    SmoothReport rep;
    const auto out = smooth_poses(p.poses, p.reversed_flags(), map, cfg.footprint, cfg.smoother, false, &rep);
    ASSERT_EQ(out.size(), p.poses.size());
    EXPECT_EQ(out.front(), p.poses.front());
    EXPECT_EQ(out.back(), p.poses.back());
    for (const auto& q : out) EXPECT_FALSE(collision_check(map, q, cfg.footprint));
    for (std::size_t k = 1; k < rep.smoothness.size(); ++k) EXPECT_LE(rep.smoothness[k], rep.smoothness[k - 1]);
    EXPECT_FALSE(rep.reverted_to_input);
  }
}

TEST(Smoother, RejectsNonPositiveWeights) {
  const Costmap map(10, 10, 0.05);
  SmootherParams p;
  p.weight_data = 0.0;
  EXPECT_THROW(smooth_poses({{0.1, 0.1, 0}, {0.2, 0.1, 0}, {0.3, 0.1, 0}}, {false, false}, map,
                            Footprint::circle(0.01), p),
               InvalidArgument);
}

TEST(PathCsv, RoundTrip) {
  const Costmap map(200, 200, 0.05);
  const Path p = plan(map, {1.0, 1.0, 0.0}, {6.0, 5.0, kPi / 2}, config_for(PlannerKind::kHybrid));
  const auto file = std::filesystem::temp_directory_path() / "feasplan_path.csv";
  write_path_csv(p, file);
  const Path back = read_path_csv(file);
  ASSERT_EQ(back.poses.size(), p.poses.size());
  for (std::size_t k = 0; k < p.poses.size(); ++k) {
    EXPECT_NEAR(back.poses[k].x, p.poses[k].x, 1e-8);
    EXPECT_NEAR(back.poses[k].theta, p.poses[k].theta, 1e-8);
  }
  EXPECT_EQ(back.reversed_flags(), p.reversed_flags());
  std::filesystem::remove(file);
}
