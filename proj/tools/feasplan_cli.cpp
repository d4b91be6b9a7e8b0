#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "feasplan/bench.hpp"
#include "feasplan/feasplan.hpp"

using namespace feasplan;

namespace {

enum ExitCode { kOk = 0, kNoPath = 2, kBadInput = 3, kInternal = 4 };

PoseSE2 parse_pose(const std::string& text) {
  std::stringstream ss(text);
  std::string part;
  std::vector<double> v;
  while (std::getline(ss, part, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(part, &used));
      if (used != part.size()) throw InvalidArgument("");
    } catch (const std::exception&) {
      throw InvalidArgument("pose must be x,y,theta; got '" + text + "'");
    }
  }
  if (v.size() != 3) throw InvalidArgument("pose must be x,y,theta; got '" + text + "'");
  return {v[0], v[1], v[2]};
}

MotionModel parse_model(const std::string& s) {
  if (s == "dubins") return MotionModel::kDubins;
  if (s == "rs" || s == "reeds-shepp") return MotionModel::kReedsShepp;
  throw InvalidArgument("unknown motion model '" + s + "' (expected dubins or rs)");
}

// Planner flags shared by `plan` and `bench`.
struct PlannerFlags {
  std::string goal_mode = "exact";
  std::string model = "rs";
  double alpha = 2.0;
  double beta = 0.05;
  double gamma = 0.05;
  double reverse_penalty = 2.0;
  double turning_radius = 0.4;
  int heading_bins = 16;
  bool no_reverse = false;
  double footprint_radius = 0.1;
  double time_limit = 30.0;
  std::string control_set;

  void add_to(CLI::App* app) {
    app->add_option("--goal-mode", goal_mode, "exact, bidirectional or any")->capture_default_str();
    app->add_option("--model", model, "dubins or rs (Reeds-Shepp)")->capture_default_str();
    app->add_option("--alpha", alpha, "cost weight")->capture_default_str();
    app->add_option("--beta", beta, "non-straight penalty")->capture_default_str();
    app->add_option("--gamma", gamma, "turn-change penalty")->capture_default_str();
    app->add_option("--reverse-penalty", reverse_penalty, "multiplier on reverse motion")->capture_default_str();
    app->add_option("--turning-radius", turning_radius, "minimum turning radius in meters")->capture_default_str();
    app->add_option("--heading-bins", heading_bins, "number of heading bins")->capture_default_str();
    app->add_flag("--no-reverse", no_reverse, "forbid reverse motion");
    app->add_option("--footprint-radius", footprint_radius, "circle footprint radius in meters")
        ->capture_default_str();
    app->add_option("--time-limit", time_limit, "search time limit in seconds")->capture_default_str();
    app->add_option("--control-set", control_set, "lattice control-set file (default: generate)");
  }

  PlannerConfig config(PlannerKind kind) const {
    PlannerConfig c;
    c.kind = kind;
    c.goal_mode = parse_goal_mode(goal_mode);
    c.motion_model = parse_model(model);
    c.alpha = alpha;
    c.beta = beta;
    c.gamma = gamma;
    c.reverse_penalty = reverse_penalty;
    c.turning_radius = turning_radius;
    c.heading_bins = heading_bins;
    c.allow_reverse = !no_reverse;
    c.footprint = Footprint::circle(footprint_radius);
    c.limits.max_planning_time = time_limit;
    c.control_set_path = control_set;
    c.validate();
    return c;
  }
};

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    try {
      out.push_back(std::stod(part));
    } catch (const std::exception&) {
      throw InvalidArgument("bad number in list: '" + part + "'");
    }
  }
  if (out.empty()) throw InvalidArgument("empty list");
  return out;
}

std::vector<PlannerKind> parse_planners(const std::string& text) {
  std::vector<PlannerKind> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) out.push_back(parse_planner_kind(part));
  if (out.empty()) throw InvalidArgument("no planners given");
  return out;
}

Costmap load_input_map(const std::string& path, double inflate_radius, double decay) {
  Costmap map = load_map(path);
  if (inflate_radius > 0.0) map = inflate(map, InflationParams{inflate_radius, decay, false});
  return map;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Feasible path planning on costmaps: 2D A*, Hybrid-A* and state lattice planners."};
  app.require_subcommand(1);

  // plan
  auto* plan_cmd = app.add_subcommand("plan", "plan one query on a PGM costmap");
  std::string map_path, start_text, goal_text, planner_name = "hybrid", out_path, render_path;
  double inflate_radius = 0.0, decay = 5.0;
  bool smooth = false;
  PlannerFlags plan_flags;
  plan_cmd->add_option("--map", map_path, "map image (.pgm with .meta alongside)")->required();
  plan_cmd->add_option("--start", start_text, "start pose x,y,theta (meters, radians)")->required();
  plan_cmd->add_option("--goal", goal_text, "goal pose x,y,theta")->required();
  plan_cmd->add_option("--planner", planner_name, "2d, hybrid or lattice")->capture_default_str();
  plan_cmd->add_option("--out", out_path, "path CSV output (default: stdout)");
  plan_cmd->add_option("--render", render_path, "also draw the path (.svg or .ppm)");
  plan_cmd->add_option("--inflate", inflate_radius, "inflate the map with this inscribed radius first (0: off)")
      ->capture_default_str();
  plan_cmd->add_option("--decay", decay, "inflation decay factor (1/m)")->capture_default_str();
  plan_cmd->add_flag("--smooth", smooth, "smooth the path before writing");
  plan_flags.add_to(plan_cmd);

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "run the random-map benchmark");
  std::string densities = "0.10,0.15,0.20", planners = "2d,hybrid,lattice", csv_path, render_dir, save_maps_dir;
  int pairs = 100, maps = 1, render_count = 3;
  std::uint64_t seed = 42;
  double map_size = 100.0, min_sep = 3.0;
  bool full_scale = false, serial = false, no_warm = false;
  PlannerFlags bench_flags;
  bench_cmd->add_option("--densities", densities, "comma-separated obstacle densities")->capture_default_str();
  bench_cmd->add_option("--pairs", pairs, "start/goal pairs per map")->capture_default_str();
  bench_cmd->add_option("--maps", maps, "maps per density")->capture_default_str();
  bench_cmd->add_option("--seed", seed, "random seed")->capture_default_str();
  bench_cmd->add_option("--map-size", map_size, "map side length in meters")->capture_default_str();
  bench_cmd->add_option("--min-separation", min_sep, "minimum start/goal distance in meters")->capture_default_str();
  bench_cmd->add_option("--planners", planners, "comma-separated planners")->capture_default_str();
  bench_cmd->add_option("--csv", csv_path, "per-run CSV output");
  bench_cmd->add_option("--render-dir", render_dir, "write SVG renderings of the first scenarios here");
  bench_cmd->add_option("--render-count", render_count, "scenarios to render per map")->capture_default_str();
  bench_cmd->add_option("--save-maps", save_maps_dir, "write the generated maps (PGM + meta) here");
  bench_cmd->add_flag("--full-scale", full_scale, "1000 pairs per map");
  bench_cmd->add_flag("--serial", serial, "run scenarios one at a time (always the case in this build)");
  bench_cmd->add_flag("--no-warm", no_warm, "skip the warm-cache replan timing");
  bench_flags.add_to(bench_cmd);

  // genlattice
  auto* gen_cmd = app.add_subcommand("genlattice", "generate a minimal lattice control set");
  double radius = 0.4, resolution = 0.05;
  int headings = 16;
  std::string gen_out;
  gen_cmd->add_option("--radius", radius, "minimum turning radius in meters")->capture_default_str();
  gen_cmd->add_option("--resolution", resolution, "grid resolution in meters")->capture_default_str();
  gen_cmd->add_option("--headings", headings, "heading count (4 or a multiple of 8)")->capture_default_str();
  gen_cmd->add_option("--out", gen_out, "output control-set file")->required();

  // render
  auto* render_cmd = app.add_subcommand("render", "draw a map with planned paths");
  std::string render_map, render_out;
  std::vector<std::string> path_files;
  render_cmd->add_option("--map", render_map, "map image (.pgm with .meta alongside)")->required();
  render_cmd->add_option("--paths", path_files, "path CSV files")->expected(0, -1);
  render_cmd->add_option("--out", render_out, "output image (.svg or .ppm)")->required();

  // genmap
  auto* map_cmd = app.add_subcommand("genmap", "write a random obstacle map");
  RandomMapParams map_params;
  std::string map_out;
  map_cmd->add_option("--size", map_params.width_m, "side length in meters")->capture_default_str();
  map_cmd->add_option("--resolution", map_params.resolution, "meters per cell")->capture_default_str();
  map_cmd->add_option("--density", map_params.obstacle_density, "lethal cell fraction")->capture_default_str();
  map_cmd->add_option("--seed", map_params.seed, "random seed")->capture_default_str();
  map_cmd->add_option("--inflate", inflate_radius, "inscribed radius for inflation (0: off)")->capture_default_str();
  map_cmd->add_option("--out", map_out, "output .pgm (a .meta is written alongside)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kBadInput;
  }

  try {
    if (*plan_cmd) {
      const Costmap map = load_input_map(map_path, inflate_radius, decay);
      PlannerConfig cfg = plan_flags.config(parse_planner_kind(planner_name));
      cfg.smoother.enabled = smooth;
      const Path path = plan(map, parse_pose(start_text), parse_pose(goal_text), cfg);
      if (out_path.empty()) {
        write_path_csv(path, std::cout);
      } else {
        write_path_csv(path, std::filesystem::path(out_path));
      }
      if (!render_path.empty()) render(map, {{planner_name, path.poses}}, render_path);
      std::fprintf(stderr, "length %.3f m, cost %.3f, %zu expansions, %.1f ms\n", path.length_m, path.cost_total,
                   path.expansions, path.planning_time_s * 1e3);
    } else if (*bench_cmd) {
      ScenarioOptions so;
      so.densities = parse_list(densities);
      so.pairs_per_map = full_scale ? 1000 : pairs;
      so.maps_per_density = maps;
      so.seed = seed;
      so.map_size_m = map_size;
      so.min_separation = min_sep;
      const PlannerFlags& f = bench_flags;
      BenchOptions bo;
      bo.planners = parse_planners(planners);
      bo.base = f.config(PlannerKind::kTwoD);
      bo.measure_warm = !no_warm;
      const auto set = generate_scenarios(so);
      for (const auto& w : set.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
      if (!save_maps_dir.empty()) {
        std::filesystem::create_directories(save_maps_dir);
        for (const auto& m : set.maps) {
          save_map(m.map, std::filesystem::path(save_maps_dir) / ("map_" + std::to_string(m.id) + ".pgm"));
        }
      }
      std::map<int, std::vector<RenderPath>> to_render;
      std::map<int, int> rendered_per_map;
      if (!render_dir.empty()) {
        std::filesystem::create_directories(render_dir);
        bo.on_path = [&](const Scenario& s, PlannerKind k, const Path& p) {
          auto& n = rendered_per_map[s.map_id];
          if (!to_render.count(s.id) && n >= render_count) return;
          if (!to_render.count(s.id)) ++n;
          to_render[s.id].push_back({to_string(k), p.poses});
        };
      }
      bo.progress = [](const std::string& msg) { std::fprintf(stderr, "\r%s", msg.c_str()); };
      const auto records = run_benchmark(set, bo);
      std::fprintf(stderr, "\n");
      if (!csv_path.empty()) write_bench_csv(records, std::filesystem::path(csv_path));
      write_summary(summarize(records), std::cout);
      for (const auto& [id, paths] : to_render) {
        const auto& sc = set.scenarios[static_cast<std::size_t>(id)];
        render(set.map_of(sc).map, paths, std::filesystem::path(render_dir) / ("scenario_" + std::to_string(id) + ".svg"));
      }
    } else if (*gen_cmd) {
      ControlSetReport rep;
      const ControlSet cs = generate_minimal_control_set(resolution, radius, headings, {}, &rep);
      save_control_set(cs, gen_out);
      std::fprintf(stderr, "%zu primitives, %d rings explored\n", cs.primitives.size(), rep.rings_explored);
    } else if (*render_cmd) {
      const Costmap map = load_map(render_map);
      std::vector<RenderPath> paths;
      for (const auto& f : path_files) {
        paths.push_back({std::filesystem::path(f).stem().string(), read_path_csv(f).poses});
      }
      render(map, paths, render_out);
    } else if (*map_cmd) {
      map_params.height_m = map_params.width_m;
      Costmap map = generate_random_map(map_params);
      if (inflate_radius > 0.0) map = inflate(map, InflationParams{inflate_radius, 5.0, false});
      save_map(map, map_out);
    }
  } catch (const PlanningError& e) {
    std::fprintf(stderr, "error [%s]: %s\n", to_string(e.status()), e.what());
    const bool bad_pose = e.status() == PlanStatus::kStartInCollision || e.status() == PlanStatus::kGoalInCollision;
    return bad_pose ? kBadInput : kNoPath;
  } catch (const InvariantViolation& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return kInternal;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kBadInput;
  } catch (const std::filesystem::filesystem_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kBadInput;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return kInternal;
  }
  return kOk;
}
