#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "feasplan/gridmap.hpp"
#include "feasplan/planners.hpp"

namespace feasplan {

struct ScenarioOptions {
  std::vector<double> densities{0.10, 0.15, 0.20};
  int maps_per_density = 1;
  int pairs_per_map = 100;
  double map_size_m = 100.0;
  double resolution = 0.05;
  double obstacle_size_min = 0.5;
  double obstacle_size_max = 2.0;
  double min_separation = 3.0;
  int attempts_per_pair = 200;
  // Inflation applied to every generated map (circle footprints need it).
  double inscribed_radius = 0.1;
  double decay_factor = 5.0;
  std::uint64_t seed = 42;
};

struct BenchMap {
  int id = 0;
  double density = 0.0;
  std::uint64_t seed = 0;
  Costmap map{1, 1, 0.05};
};

struct Scenario {
  int id = 0;
  int map_id = 0;
  double density = 0.0;
  std::uint64_t seed = 0;  // seed of the map the scenario lives on
  PoseSE2 start;
  PoseSE2 goal;
};

struct ScenarioSet {
  std::vector<BenchMap> maps;
  std::vector<Scenario> scenarios;
  std::vector<std::string> warnings;

  const BenchMap& map_of(const Scenario& s) const { return maps.at(static_cast<std::size_t>(s.map_id)); }
};

namespace bench_detail {

// Distinct, reproducible seed per (base seed, map index).
inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t k) {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (k + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace bench_detail

// Random maps per density with verified start/goal pairs: both poses free for
// the default footprint, at least `min_separation` apart and connected by a 2D
// plan. Maps that run out of attempts keep the pairs found so far and add a
// warning.
inline ScenarioSet generate_scenarios(const ScenarioOptions& opt) {
  if (opt.maps_per_density < 0 || opt.pairs_per_map < 0) throw InvalidArgument("scenario counts must be >= 0");
  if (!(opt.min_separation >= 0.0)) throw InvalidArgument("min_separation must be >= 0");
  ScenarioSet set;
  PlannerConfig twod;
  twod.kind = PlannerKind::kTwoD;
  Planner reach(twod);
  int map_id = 0;
  for (double density : opt.densities) {
    for (int m = 0; m < opt.maps_per_density; ++m, ++map_id) {
      RandomMapParams p;
      p.width_m = p.height_m = opt.map_size_m;
      p.resolution = opt.resolution;
      p.obstacle_density = density;
      p.obstacle_size_min = opt.obstacle_size_min;
      p.obstacle_size_max = opt.obstacle_size_max;
      p.seed = bench_detail::mix_seed(opt.seed, static_cast<std::uint64_t>(map_id));
      BenchMap bm;
      bm.id = map_id;
      bm.density = density;
      bm.seed = p.seed;
      bm.map = inflate(generate_random_map(p), InflationParams{opt.inscribed_radius, opt.decay_factor, false});
      const Costmap& map = bm.map;

      std::mt19937_64 rng(p.seed ^ 0x5DEECE66DULL);
      std::uniform_int_distribution<int> ci(0, map.width() - 1), cj(0, map.height() - 1);
      std::uniform_real_distribution<double> heading(-kPi, kPi);
      auto random_pose = [&]() -> std::optional<PoseSE2> {
        const int i = ci(rng), j = cj(rng);
        const double th = heading(rng);
        const Point2 c = map.grid_to_world(i, j);
        const PoseSE2 pose(c.x, c.y, th);
        if (collision_check(map, pose, twod.footprint)) return std::nullopt;
        return pose;
      };
      int found = 0;
      for (int k = 0; k < opt.pairs_per_map; ++k) {
        bool ok = false;
        for (int a = 0; a < opt.attempts_per_pair && !ok; ++a) {
          const auto s = random_pose();
          const auto g = random_pose();
          if (!s || !g || distance(s->position(), g->position()) < opt.min_separation) continue;
          try {
            reach.plan_raw(map, *s, *g);
          } catch (const PlanningError&) {
            continue;
          }
          set.scenarios.push_back({static_cast<int>(set.scenarios.size()), map_id, density, p.seed, *s, *g});
          ok = true;
        }
        if (!ok) break;
        ++found;
      }
      if (found < opt.pairs_per_map) {
        std::ostringstream w;
        w << "map " << map_id << " (density " << density << "): only " << found << " of " << opt.pairs_per_map
          << " pairs found";
        set.warnings.push_back(w.str());
      }
      set.maps.push_back(std::move(bm));
    }
  }
  return set;
}

// ---------------------------------------------------------------------------

struct BenchRecord {
  int scenario = 0;
  int map_id = 0;
  double density = 0.0;
  PlannerKind planner = PlannerKind::kTwoD;
  std::string outcome;  // "success" or a failure status
  double t_ms = 0.0;       // cold heuristic cache
  double t_warm_ms = 0.0;  // same query again with the cache kept
  double l_path = 0.0;
  double cost_total = 0.0;
  std::size_t expansions = 0;
  double max_curvature = 0.0;  // before smoothing

  bool success() const { return outcome == "success"; }
};

struct BenchOptions {
  std::vector<PlannerKind> planners{PlannerKind::kTwoD, PlannerKind::kHybrid, PlannerKind::kLattice};
  PlannerConfig base;             // planner kind is overridden per run
  bool measure_warm = true;
  // Called for each successful run with the unsmoothed path.
  std::function<void(const Scenario&, PlannerKind, const Path&)> on_path;
  std::function<void(const std::string&)> progress;
};

inline std::vector<BenchRecord> run_benchmark(const ScenarioSet& set, const BenchOptions& opt) {
  std::vector<BenchRecord> records;
  records.reserve(set.scenarios.size() * opt.planners.size());
  std::vector<Planner> planners;
  for (PlannerKind k : opt.planners) {
    PlannerConfig c = opt.base;
    c.kind = k;
    planners.emplace_back(c);
  }
  for (const auto& sc : set.scenarios) {
    const Costmap& map = set.map_of(sc).map;
    for (std::size_t pk = 0; pk < planners.size(); ++pk) {
      Planner& planner = planners[pk];
      BenchRecord r;
      r.scenario = sc.id;
      r.map_id = sc.map_id;
      r.density = sc.density;
      r.planner = opt.planners[pk];
      try {
        planner.heuristic_cache().reset();
        const Path p = planner.plan_raw(map, sc.start, sc.goal);
        r.outcome = "success";
        r.t_ms = std::max(p.planning_time_s * 1e3, 1e-6);
        r.l_path = p.length_m;
        r.cost_total = p.cost_total;
        r.expansions = p.expansions;
        r.max_curvature = r.planner == PlannerKind::kTwoD ? 0.0 : max_discrete_curvature(p.poses, p.reversed_flags());
        if (opt.measure_warm) r.t_warm_ms = std::max(planner.plan_raw(map, sc.start, sc.goal).planning_time_s * 1e3, 1e-6);
        if (opt.on_path) opt.on_path(sc, r.planner, p);
      } catch (const PlanningError& e) {
        r.outcome = to_string(e.status());
      } catch (const Error& e) {
        r.outcome = "error";
      }
      records.push_back(r);
    }
    if (opt.progress) opt.progress("scenario " + std::to_string(sc.id + 1) + "/" + std::to_string(set.scenarios.size()));
  }
  return records;
}

// ---------------------------------------------------------------------------

struct SummaryRow {
  double density = 0.0;
  PlannerKind planner = PlannerKind::kTwoD;
  int runs = 0;
  int successes = 0;
  double mean_t_ms = 0.0;       // over successful runs
  double mean_t_warm_ms = 0.0;
  double mean_l_path = 0.0;     // over scenarios every planner solved
  int common = 0;               // number of such scenarios
  bool best_t = false;          // best, or within 1% of the best, for this density
  bool best_l = false;
};

inline std::vector<SummaryRow> summarize(const std::vector<BenchRecord>& records) {
  std::map<int, std::vector<const BenchRecord*>> by_scenario;
  std::set<PlannerKind> kinds;
  for (const auto& r : records) {
    by_scenario[r.scenario].push_back(&r);
    kinds.insert(r.planner);
  }
  std::set<int> common;
  for (const auto& [id, rs] : by_scenario) {
    if (std::all_of(rs.begin(), rs.end(), [](const BenchRecord* r) { return r->success(); }) &&
        rs.size() == kinds.size()) {
      common.insert(id);
    }
  }
  std::map<std::pair<double, PlannerKind>, SummaryRow> rows;
  for (const auto& r : records) {
    SummaryRow& row = rows[{r.density, r.planner}];
    row.density = r.density;
    row.planner = r.planner;
    ++row.runs;
    if (!r.success()) continue;
    ++row.successes;
    row.mean_t_ms += r.t_ms;
    row.mean_t_warm_ms += r.t_warm_ms;
    if (common.count(r.scenario)) {
      row.mean_l_path += r.l_path;
      ++row.common;
    }
  }
  std::vector<SummaryRow> out;
  for (auto& [key, row] : rows) {
    if (row.successes > 0) {
      row.mean_t_ms /= row.successes;
      row.mean_t_warm_ms /= row.successes;
    }
    if (row.common > 0) row.mean_l_path /= row.common;
    out.push_back(row);
  }
  // Mark the best value per density and anything within 1% of it.
  std::map<double, std::pair<double, double>> best;
  for (const auto& row : out) {
    auto& b = best.try_emplace(row.density, std::numeric_limits<double>::infinity(),
                               std::numeric_limits<double>::infinity())
                  .first->second;
    if (row.successes > 0) b.first = std::min(b.first, row.mean_t_ms);
    if (row.common > 0) b.second = std::min(b.second, row.mean_l_path);
  }
  for (auto& row : out) {
    const auto& b = best[row.density];
    row.best_t = row.successes > 0 && row.mean_t_ms <= b.first * 1.01;
    row.best_l = row.common > 0 && row.mean_l_path <= b.second * 1.01;
  }
  return out;
}

inline void write_summary(const std::vector<SummaryRow>& rows, std::ostream& out) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-8s %-8s %9s %12s %12s %12s\n", "density", "planner", "success", "t_ms",
                "t_warm_ms", "l_path_m");
  out << buf;
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%-8.2f %-8s %4d/%-4d %11.2f%s %12.2f %11.3f%s\n", r.density, to_string(r.planner),
                  r.successes, r.runs, r.mean_t_ms, r.best_t ? "*" : " ", r.mean_t_warm_ms, r.mean_l_path,
                  r.best_l ? "*" : " ");
    out << buf;
  }
  out << "* best or within 1% of best for the density; l_path averaged over scenarios all planners solved\n";
}

inline constexpr const char* kBenchCsvHeader =
    "scenario,map,density,planner,outcome,t_ms,t_warm_ms,l_path_m,cost_total,expansions,max_curvature";

inline void write_bench_csv(const std::vector<BenchRecord>& records, std::ostream& out) {
  out << kBenchCsvHeader << "\n";
  char buf[512];
  for (const auto& r : records) {
    std::snprintf(buf, sizeof buf, "%d,%d,%.2f,%s,%s,%.3f,%.3f,%.6f,%.6f,%zu,%.6f\n", r.scenario, r.map_id, r.density,
                  to_string(r.planner), r.outcome.c_str(), r.t_ms, r.t_warm_ms, r.l_path, r.cost_total, r.expansions,
                  r.max_curvature);
    out << buf;
  }
}

inline void write_bench_csv(const std::vector<BenchRecord>& records, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw InvalidArgument("cannot write benchmark CSV: " + file.string());
  write_bench_csv(records, out);
}

// ---------------------------------------------------------------------------
// Rendering

struct RenderPath {
  std::string label;
  std::vector<PoseSE2> poses;
};

namespace bench_detail {

inline constexpr std::array<std::array<int, 3>, 6> kPalette{{
    {{214, 39, 40}}, {{31, 119, 180}}, {{44, 160, 44}}, {{255, 127, 14}}, {{148, 103, 189}}, {{23, 190, 207}}}};

// Gray level of a cell: lethal black, unknown mid gray, costs shaded from
// white toward dark gray in 16 steps.
inline int gray_of(CostValue v) {
  if (v == cost::kLethal) return 0;
  if (v == cost::kUnknown) return 128;
  const int level = v * 15 / cost::kMaxNonLethal;
  return 255 - level * 10;
}

inline std::string hex_color(const std::array<int, 3>& c) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", c[0], c[1], c[2]);
  return buf;
}

inline std::string xml_escape(const std::string& s) {
  std::string o;
  for (char ch : s) {
    switch (ch) {
      case '&': o += "&amp;"; break;
      case '<': o += "&lt;"; break;
      case '>': o += "&gt;"; break;
      case '"': o += "&quot;"; break;
      default: o += ch;
    }
  }
  return o;
}

}  // namespace bench_detail

// SVG in cell units (one unit per cell, y pointing up in the world, down in
// the image). Equal-shade runs of each row become one rectangle.
inline void render_svg(const Costmap& map, const std::vector<RenderPath>& paths, std::ostream& out) {
  using namespace bench_detail;
  const int w = map.width(), h = map.height();
  const double res = map.resolution();
  const Point2 o = map.origin();
  char buf[256];
  const int scale = std::max(1, 800 / std::max(w, h));
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 %d %d\" width=\"%d\" height=\"%d\">\n", w, h,
                w * scale, h * scale);
  out << buf;
  out << "<rect x=\"0\" y=\"0\" width=\"" << w << "\" height=\"" << h << "\" fill=\"#ffffff\"/>\n";
  for (int j = 0; j < h; ++j) {
    const int row = h - 1 - j;
    int i = 0;
    while (i < w) {
      const int g = gray_of(map.at(i, j));
      int e = i + 1;
      while (e < w && gray_of(map.at(e, j)) == g) ++e;
      if (g != 255) {
        std::snprintf(buf, sizeof buf, "<rect x=\"%d\" y=\"%d\" width=\"%d\" height=\"1\" fill=\"#%02x%02x%02x\"/>\n", i,
                      row, e - i, g, g, g);
        out << buf;
      }
      i = e;
    }
  }
  for (std::size_t k = 0; k < paths.size(); ++k) {
    const std::string color = hex_color(kPalette[k % kPalette.size()]);
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"0.8\" points=\"";
    for (std::size_t q = 0; q < paths[k].poses.size(); ++q) {
      const auto& p = paths[k].poses[q];
      std::snprintf(buf, sizeof buf, "%s%.3f,%.3f", q ? " " : "", (p.x - o.x) / res, h - (p.y - o.y) / res);
      out << buf;
    }
    out << "\"/>\n";
  }
  // Legend in the top-left corner.
  const double fs = std::max(2.0, h / 40.0);
  for (std::size_t k = 0; k < paths.size(); ++k) {
    const std::string color = hex_color(kPalette[k % kPalette.size()]);
    const double y = fs * (1.2 * static_cast<double>(k) + 1.2);
    std::snprintf(buf, sizeof buf, "<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" fill=\"%s\"/>\n",
                  fs * 0.5, y - fs * 0.8, fs * 0.8, fs * 0.8, color.c_str());
    out << buf;
    std::snprintf(buf, sizeof buf, "<text x=\"%.2f\" y=\"%.2f\" font-size=\"%.2f\" font-family=\"monospace\">", fs * 1.6,
                  y, fs);
    out << buf << xml_escape(paths[k].label) << "</text>\n";
  }
  out << "</svg>\n";
}

// Binary PPM, one pixel per cell, paths drawn as 1-pixel lines.
inline void render_ppm(const Costmap& map, const std::vector<RenderPath>& paths, std::ostream& out) {
  using namespace bench_detail;
  const int w = map.width(), h = map.height();
  std::vector<unsigned char> px(static_cast<std::size_t>(w) * h * 3);
  auto put = [&](int i, int j, const std::array<int, 3>& c) {
    if (i < 0 || j < 0 || i >= w || j >= h) return;
    const std::size_t k = (static_cast<std::size_t>(h - 1 - j) * w + i) * 3;
    for (int ch = 0; ch < 3; ++ch) px[k + ch] = static_cast<unsigned char>(c[ch]);
  };
  for (int j = 0; j < h; ++j) {
    for (int i = 0; i < w; ++i) {
      const int g = gray_of(map.at(i, j));
      put(i, j, {g, g, g});
    }
  }
  const double res = map.resolution();
  const Point2 o = map.origin();
  for (std::size_t k = 0; k < paths.size(); ++k) {
    const auto& color = kPalette[k % kPalette.size()];
    const auto& poses = paths[k].poses;
    for (std::size_t q = 0; q < poses.size(); ++q) {
      const Point2 a = q ? poses[q - 1].position() : poses[q].position();
      const Point2 b = poses[q].position();
      const int steps = static_cast<int>(std::ceil(distance(a, b) / (0.5 * res))) + 1;
      for (int s = 0; s <= steps; ++s) {
        const Point2 p = a + (b - a) * (static_cast<double>(s) / steps);
        put(static_cast<int>(std::floor((p.x - o.x) / res)), static_cast<int>(std::floor((p.y - o.y) / res)), color);
      }
    }
  }
  out << "P6\n" << w << " " << h << "\n255\n";
  out.write(reinterpret_cast<const char*>(px.data()), static_cast<std::streamsize>(px.size()));
}

// Writes SVG unless the extension is .ppm.
inline void render(const Costmap& map, const std::vector<RenderPath>& paths, const std::filesystem::path& file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write image: " + file.string());
  if (file.extension() == ".ppm") {
    render_ppm(map, paths, out);
  } else {
    render_svg(map, paths, out);
  }
  if (!out) throw InvalidArgument("failed writing image: " + file.string());
}

}  // namespace feasplan
