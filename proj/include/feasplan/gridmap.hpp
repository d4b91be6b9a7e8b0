#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "feasplan/core.hpp"

namespace feasplan {

using CostValue = std::uint8_t;

namespace cost {
inline constexpr CostValue kFree = 0;
// Largest non-lethal value. Also the "inscribed" marker written by inflate().
inline constexpr CostValue kMaxNonLethal = 253;
inline constexpr CostValue kLethal = 254;
inline constexpr CostValue kUnknown = 255;
}  // namespace cost

class MapIoError : public Error {
 public:
  using Error::Error;
};

struct GridIndex {
  int i = 0;  // column, along +x
  int j = 0;  // row, along +y
  friend bool operator==(const GridIndex&, const GridIndex&) = default;
};

namespace detail {
inline std::uint64_t next_map_revision() {
  static std::atomic<std::uint64_t> counter{1};
  return counter.fetch_add(1, std::memory_order_relaxed);
}
}  // namespace detail

// Row-major grid of travel costs. Cell (i, j) covers
// [origin.x + i*res, origin.x + (i+1)*res) x [origin.y + j*res, origin.y + (j+1)*res).
class Costmap {
 public:
  Costmap(int width, int height, double resolution, Point2 origin = {}, CostValue fill = cost::kFree)
      : width_(width), height_(height), resolution_(resolution), origin_(origin) {
    if (width <= 0 || height <= 0) throw InvalidArgument("costmap dimensions must be positive");
    if (!(resolution > 0.0)) throw InvalidArgument("costmap resolution must be positive");
    cells_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
  }

  int width() const { return width_; }
  int height() const { return height_; }
  double resolution() const { return resolution_; }
  Point2 origin() const { return origin_; }
  static constexpr CostValue c_max() { return cost::kMaxNonLethal; }
  std::size_t size() const { return cells_.size(); }

  // Changes whenever the contents change; copies share the revision of their source.
  std::uint64_t revision() const { return revision_; }

  bool in_bounds(int i, int j) const { return i >= 0 && j >= 0 && i < width_ && j < height_; }
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(i);
  }
  GridIndex cell_of(std::size_t idx) const {
    return {static_cast<int>(idx % static_cast<std::size_t>(width_)),
            static_cast<int>(idx / static_cast<std::size_t>(width_))};
  }

  CostValue at(int i, int j) const { return cells_[index(i, j)]; }
  CostValue at(std::size_t idx) const { return cells_[idx]; }
  void set(int i, int j, CostValue v) {
    cells_[index(i, j)] = v;
    revision_ = detail::next_map_revision();
  }
  void fill(CostValue v) {
    std::fill(cells_.begin(), cells_.end(), v);
    revision_ = detail::next_map_revision();
  }

  std::span<const CostValue> cells() const { return cells_; }
  // Bulk mutable access. Bumps the revision.
  std::span<CostValue> mutable_cells() {
    revision_ = detail::next_map_revision();
    return cells_;
  }

  std::optional<GridIndex> world_to_grid(double x, double y) const {
    const double fx = std::floor((x - origin_.x) / resolution_);
    const double fy = std::floor((y - origin_.y) / resolution_);
    if (!(fx >= 0.0 && fy >= 0.0 && fx < width_ && fy < height_)) return std::nullopt;
    return GridIndex{static_cast<int>(fx), static_cast<int>(fy)};
  }

  // Cell center.
  Point2 grid_to_world(int i, int j) const {
    return {origin_.x + (i + 0.5) * resolution_, origin_.y + (j + 0.5) * resolution_};
  }

  double width_m() const { return width_ * resolution_; }
  double height_m() const { return height_ * resolution_; }

  bool operator==(const Costmap& o) const {
    return width_ == o.width_ && height_ == o.height_ && resolution_ == o.resolution_ &&
           origin_ == o.origin_ && cells_ == o.cells_;
  }

 private:
  int width_;
  int height_;
  double resolution_;
  Point2 origin_;
  std::vector<CostValue> cells_;
  std::uint64_t revision_ = detail::next_map_revision();
};

// Whether a raw cell value blocks the robot center.
inline bool is_lethal(CostValue v, bool allow_unknown = false) {
  return v == cost::kLethal || (v == cost::kUnknown && !allow_unknown);
}

// Cost used in the traversal function. UNKNOWN counts as c_max when allowed.
inline CostValue traversal_cell_cost(CostValue v) {
  return v == cost::kUnknown ? cost::kMaxNonLethal : v;
}

// ---------------------------------------------------------------------------
// Footprint and collision checking

struct CircleFootprint {
  double radius = 0.0;
};

struct PolygonFootprint {
  std::vector<Point2> vertices;  // robot frame, counter-clockwise
};

class Footprint {
 public:
  static Footprint circle(double radius) {
    if (!(radius > 0.0)) throw InvalidArgument("circle footprint radius must be positive");
    return Footprint(CircleFootprint{radius});
  }

  static Footprint polygon(std::vector<Point2> vertices) {
    if (vertices.size() < 3) throw InvalidArgument("polygon footprint needs at least 3 vertices");
    double area2 = 0.0;
    for (std::size_t k = 0; k < vertices.size(); ++k) {
      area2 += cross(vertices[k], vertices[(k + 1) % vertices.size()]);
    }
    if (std::abs(area2) < 1e-12) throw InvalidArgument("polygon footprint has zero area");
    return Footprint(PolygonFootprint{std::move(vertices)});
  }

  bool is_circle() const { return std::holds_alternative<CircleFootprint>(shape_); }
  const CircleFootprint& as_circle() const { return std::get<CircleFootprint>(shape_); }
  const PolygonFootprint& as_polygon() const { return std::get<PolygonFootprint>(shape_); }

 private:
  explicit Footprint(std::variant<CircleFootprint, PolygonFootprint> s) : shape_(std::move(s)) {}
  std::variant<CircleFootprint, PolygonFootprint> shape_;
};

namespace detail {

inline bool point_in_polygon(const Point2& p, std::span<const Point2> poly) {
  bool inside = false;
  for (std::size_t a = 0, b = poly.size() - 1; a < poly.size(); b = a++) {
    const Point2& pa = poly[a];
    const Point2& pb = poly[b];
    if ((pa.y > p.y) != (pb.y > p.y)) {
      const double x_cross = pa.x + (p.y - pa.y) * (pb.x - pa.x) / (pb.y - pa.y);
      if (p.x < x_cross) inside = !inside;
    }
  }
  return inside;
}

// Liang-Barsky clip of segment ab against the closed box [lo, hi].
inline bool segment_hits_box(const Point2& a, const Point2& b, const Point2& lo, const Point2& hi) {
  double t0 = 0.0;
  double t1 = 1.0;
  const double d[2] = {b.x - a.x, b.y - a.y};
  const double p0[2] = {a.x, a.y};
  const double mins[2] = {lo.x, lo.y};
  const double maxs[2] = {hi.x, hi.y};
  for (int k = 0; k < 2; ++k) {
    if (d[k] == 0.0) {
      if (p0[k] < mins[k] || p0[k] > maxs[k]) return false;
      continue;
    }
    double ta = (mins[k] - p0[k]) / d[k];
    double tb = (maxs[k] - p0[k]) / d[k];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 > t1) return false;
  }
  return true;
}

}  // namespace detail

// Cells covered by `polygon` placed at `pose`: cells crossed by an edge plus
// cells whose center lies inside. Cells outside the map are reported with
// in_bounds == false through the callback's GridIndex.
template <typename Fn>
void for_each_covered_cell(const Costmap& map, const PoseSE2& pose, const PolygonFootprint& polygon,
                           Fn&& fn) {
  std::vector<Point2> world;
  world.reserve(polygon.vertices.size());
  const double c = std::cos(pose.theta);
  const double s = std::sin(pose.theta);
  Point2 lo{std::numeric_limits<double>::max(), std::numeric_limits<double>::max()};
  Point2 hi{std::numeric_limits<double>::lowest(), std::numeric_limits<double>::lowest()};
  for (const auto& v : polygon.vertices) {
    Point2 w{pose.x + c * v.x - s * v.y, pose.y + s * v.x + c * v.y};
    lo = {std::min(lo.x, w.x), std::min(lo.y, w.y)};
    hi = {std::max(hi.x, w.x), std::max(hi.y, w.y)};
    world.push_back(w);
  }
  const double res = map.resolution();
  const Point2 o = map.origin();
  const int i0 = static_cast<int>(std::floor((lo.x - o.x) / res));
  const int i1 = static_cast<int>(std::floor((hi.x - o.x) / res));
  const int j0 = static_cast<int>(std::floor((lo.y - o.y) / res));
  const int j1 = static_cast<int>(std::floor((hi.y - o.y) / res));
  for (int j = j0; j <= j1; ++j) {
    for (int i = i0; i <= i1; ++i) {
      const Point2 box_lo{o.x + i * res, o.y + j * res};
      const Point2 box_hi{box_lo.x + res, box_lo.y + res};
      bool covered = detail::point_in_polygon({box_lo.x + 0.5 * res, box_lo.y + 0.5 * res}, world);
      for (std::size_t k = 0; !covered && k < world.size(); ++k) {
        covered = detail::segment_hits_box(world[k], world[(k + 1) % world.size()], box_lo, box_hi);
      }
      if (covered) {
        if (!fn(GridIndex{i, j})) return;
      }
    }
  }
}

// True when the footprint at `pose` touches an obstacle. Circle footprints rely
// on the map having been inflated with inscribed_radius >= radius: a center
// cell at LETHAL or at the inscribed value c_max is a collision.
inline bool collision_check(const Costmap& map, const PoseSE2& pose, const Footprint& footprint,
                            bool allow_unknown = false) {
  const auto center = map.world_to_grid(pose.x, pose.y);
  if (!center) return true;
  if (footprint.is_circle()) {
    const CostValue v = map.at(center->i, center->j);
    return is_lethal(v, allow_unknown) || v == cost::kMaxNonLethal;
  }
  bool hit = false;
  for_each_covered_cell(map, pose, footprint.as_polygon(), [&](GridIndex g) {
    if (!map.in_bounds(g.i, g.j) || is_lethal(map.at(g.i, g.j), allow_unknown)) {
      hit = true;
      return false;
    }
    return true;
  });
  return hit;
}

// ---------------------------------------------------------------------------
// Inflation

namespace detail {

// 1D squared Euclidean distance transform (Felzenszwalb & Huttenlocher).
// Non-source entries carry kEdtFar.
inline constexpr double kEdtFar = 1e20;

inline void edt_1d(const double* f, double* d, int n, std::vector<int>& v, std::vector<double>& z) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  int k = 0;
  v[0] = 0;
  z[0] = -kInf;
  z[1] = kInf;
  auto intersect = [&](int q, int r) {
    return ((f[q] + double(q) * q) - (f[r] + double(r) * r)) / (2.0 * q - 2.0 * r);
  };
  for (int q = 1; q < n; ++q) {
    double s = intersect(q, v[k]);
    while (s <= z[k]) {
      --k;
      s = intersect(q, v[k]);
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kInf;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const double dq = q - v[k];
    d[q] = dq * dq + f[v[k]];
  }
}

}  // namespace detail

// Squared distance, in cells, from every cell center to the nearest cell
// flagged in `sources`. Infinity when there is no source.
inline std::vector<double> squared_distance_transform(int width, int height,
                                                      const std::vector<bool>& sources) {
  const std::size_t n = static_cast<std::size_t>(width) * height;
  std::vector<double> grid(n);
  for (std::size_t k = 0; k < n; ++k) grid[k] = sources[k] ? 0.0 : detail::kEdtFar;
  const int longest = std::max(width, height);
  std::vector<double> f(longest), d(longest), z(longest + 1);
  std::vector<int> v(longest);
  for (int i = 0; i < width; ++i) {
    for (int j = 0; j < height; ++j) f[j] = grid[static_cast<std::size_t>(j) * width + i];
    detail::edt_1d(f.data(), d.data(), height, v, z);
    for (int j = 0; j < height; ++j) grid[static_cast<std::size_t>(j) * width + i] = d[j];
  }
  for (int j = 0; j < height; ++j) {
    double* row = grid.data() + static_cast<std::size_t>(j) * width;
    std::copy(row, row + width, f.begin());
    detail::edt_1d(f.data(), d.data(), width, v, z);
    std::copy(d.begin(), d.begin() + width, row);
  }
  for (auto& g : grid) {
    if (g >= 0.5 * detail::kEdtFar) g = std::numeric_limits<double>::infinity();
  }
  return grid;
}

struct InflationParams {
  double inscribed_radius = 0.0;  // meters
  double decay_factor = 1.0;      // 1/meters
  bool allow_unknown = false;     // unknown cells are not obstacle sources when true
};

// Exponential-decay inflation around lethal cells. Existing higher costs are kept.
inline Costmap inflate(const Costmap& map, const InflationParams& params) {
  if (params.inscribed_radius < 0.0) throw InvalidArgument("inscribed_radius must be >= 0");
  if (!(params.decay_factor > 0.0)) throw InvalidArgument("decay_factor must be > 0");
  std::vector<bool> sources(map.size());
  bool any = false;
  for (std::size_t k = 0; k < map.size(); ++k) {
    sources[k] = is_lethal(map.at(k), params.allow_unknown);
    any = any || sources[k];
  }
  Costmap out = map;
  if (!any) return out;
  const auto sq = squared_distance_transform(map.width(), map.height(), sources);
  const double res = map.resolution();
  const double c_max = Costmap::c_max();
  auto cells = out.mutable_cells();
  for (std::size_t k = 0; k < cells.size(); ++k) {
    const double d = std::sqrt(sq[k]) * res;
    double value;
    if (d <= params.inscribed_radius) {
      value = c_max;
    } else {
      value = std::round(c_max * std::exp(-params.decay_factor * (d - params.inscribed_radius)));
    }
    const auto v = static_cast<CostValue>(value);
    if (v > cells[k]) cells[k] = v;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Random maps

struct RandomMapParams {
  double width_m = 100.0;
  double height_m = 100.0;
  double resolution = 0.05;
  double obstacle_density = 0.1;
  double obstacle_size_min = 0.5;
  double obstacle_size_max = 2.0;
  std::uint64_t seed = 0;
  double density_tolerance = 0.005;
  std::size_t max_rejections = 200000;
};

inline double lethal_fraction(const Costmap& map) {
  std::size_t n = 0;
  for (CostValue v : map.cells()) n += (v == cost::kLethal) ? 1 : 0;
  return static_cast<double>(n) / static_cast<double>(map.size());
}

// Axis-aligned rectangular obstacles over a free map with a lethal border.
// Deterministic for a fixed seed.
inline Costmap generate_random_map(const RandomMapParams& p) {
  if (!(p.obstacle_density >= 0.0 && p.obstacle_density < 1.0)) {
    throw InvalidArgument("obstacle_density must be in [0, 1)");
  }
  if (!(p.obstacle_size_min > 0.0 && p.obstacle_size_max >= p.obstacle_size_min)) {
    throw InvalidArgument("invalid obstacle size range");
  }
  const int w = static_cast<int>(std::lround(p.width_m / p.resolution));
  const int h = static_cast<int>(std::lround(p.height_m / p.resolution));
  Costmap map(w, h, p.resolution);
  auto cells = map.mutable_cells();
  std::size_t lethal = 0;
  auto mark = [&](int i, int j) {
    auto& c = cells[map.index(i, j)];
    if (c != cost::kLethal) {
      c = cost::kLethal;
      ++lethal;
    }
  };
  for (int i = 0; i < w; ++i) {
    mark(i, 0);
    mark(i, h - 1);
  }
  for (int j = 0; j < h; ++j) {
    mark(0, j);
    mark(w - 1, j);
  }
  if (p.obstacle_density == 0.0) return map;

  const double total = static_cast<double>(map.size());
  const double lo = p.obstacle_density - p.density_tolerance;
  const double hi = p.obstacle_density + p.density_tolerance;
  if (lethal / total > hi) {
    throw InvalidArgument("map border alone exceeds the requested obstacle density");
  }
  std::mt19937_64 rng(p.seed);
  std::uniform_real_distribution<double> size_dist(p.obstacle_size_min, p.obstacle_size_max);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::size_t rejections = 0;
  while (lethal / total < lo) {
    const int rw = std::max(1, static_cast<int>(std::lround(size_dist(rng) / p.resolution)));
    const int rh = std::max(1, static_cast<int>(std::lround(size_dist(rng) / p.resolution)));
    const int i0 = static_cast<int>(unit(rng) * std::max(1, w - rw));
    const int j0 = static_cast<int>(unit(rng) * std::max(1, h - rh));
    const int i1 = std::min(w, i0 + rw);
    const int j1 = std::min(h, j0 + rh);
    std::size_t added = 0;
    for (int j = j0; j < j1; ++j) {
      for (int i = i0; i < i1; ++i) added += cells[map.index(i, j)] != cost::kLethal ? 1 : 0;
    }
    if ((lethal + added) / total > hi) {
      if (++rejections > p.max_rejections) {
        throw InvalidArgument("obstacle density infeasible for the obstacle size range");
      }
      continue;
    }
    for (int j = j0; j < j1; ++j) {
      for (int i = i0; i < i1; ++i) mark(i, j);
    }
  }
  return map;
}

// ---------------------------------------------------------------------------
// PGM + sidecar metadata

struct MapMetadata {
  double resolution = 0.05;
  Point2 origin{};
  bool negate = false;
  // "scale": 0 -> lethal, 255 -> free, linear in between. "raw": pixel == cost.
  std::string mode = "scale";
};

inline std::filesystem::path metadata_path_for(const std::filesystem::path& pgm) {
  auto meta = pgm;
  meta.replace_extension(".meta");
  return meta;
}

// Cost for an 8-bit pixel under "scale" mode (darker = costlier).
inline CostValue scale_pixel_to_cost(std::uint8_t pixel) {
  if (pixel == 0) return cost::kLethal;
  if (pixel == 255) return cost::kFree;
  return static_cast<CostValue>(std::lround(253.0 * (255.0 - pixel) / 255.0));
}

inline MapMetadata read_map_metadata(const std::filesystem::path& meta_path) {
  std::ifstream in(meta_path);
  if (!in) throw MapIoError("cannot open map metadata: " + meta_path.string());
  MapMetadata meta;
  bool have_resolution = false;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto colon = line.find(':');
    if (colon == std::string::npos) throw MapIoError("malformed metadata line: " + line);
    std::string key = line.substr(0, colon);
    std::istringstream value(line.substr(colon + 1));
    if (key == "resolution") {
      if (!(value >> meta.resolution)) throw MapIoError("bad resolution value");
      have_resolution = true;
    } else if (key == "origin") {
      if (!(value >> meta.origin.x >> meta.origin.y)) throw MapIoError("bad origin value");
    } else if (key == "negate") {
      int n = 0;
      if (!(value >> n) || (n != 0 && n != 1)) throw MapIoError("negate must be 0 or 1");
      meta.negate = n == 1;
    } else if (key == "mode") {
      value >> meta.mode;
      if (meta.mode != "scale" && meta.mode != "raw") throw MapIoError("mode must be scale or raw");
    } else {
      throw MapIoError("unknown metadata key: " + key);
    }
  }
  if (!have_resolution) throw MapIoError("metadata is missing resolution");
  if (!(meta.resolution > 0.0)) throw MapIoError("resolution must be positive");
  return meta;
}

namespace detail {

inline void skip_pgm_space(std::istream& in) {
  while (true) {
    const int c = in.peek();
    if (c == '#') {
      std::string comment;
      std::getline(in, comment);
    } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      in.get();
    } else {
      return;
    }
  }
}

inline int read_pgm_int(std::istream& in) {
  skip_pgm_space(in);
  int v = -1;
  if (!(in >> v)) throw MapIoError("corrupt PGM header");
  return v;
}

}  // namespace detail

// Reads `<name>.pgm` (binary P5, maxval 255) and `<name>.meta`.
inline Costmap load_map(const std::filesystem::path& pgm_path) {
  const MapMetadata meta = read_map_metadata(metadata_path_for(pgm_path));
  std::ifstream in(pgm_path, std::ios::binary);
  if (!in) throw MapIoError("cannot open map image: " + pgm_path.string());
  char magic[2] = {0, 0};
  in.read(magic, 2);
  if (!in || magic[0] != 'P' || magic[1] != '5') throw MapIoError("not a binary PGM (P5) file");
  const int width = detail::read_pgm_int(in);
  const int height = detail::read_pgm_int(in);
  const int maxval = detail::read_pgm_int(in);
  if (width <= 0 || height <= 0) throw MapIoError("PGM dimensions must be positive");
  if (maxval != 255) throw MapIoError("PGM maxval must be 255");
  const int sep = in.get();
  if (sep != ' ' && sep != '\n' && sep != '\t' && sep != '\r') throw MapIoError("corrupt PGM header");
  const std::size_t n = static_cast<std::size_t>(width) * height;
  std::vector<char> bytes(n);
  in.read(bytes.data(), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n) {
    throw MapIoError("PGM payload shorter than width*height");
  }
  in.peek();
  if (!in.eof()) throw MapIoError("PGM payload longer than width*height");

  Costmap map(width, height, meta.resolution, meta.origin);
  auto cells = map.mutable_cells();
  for (std::size_t k = 0; k < n; ++k) {
    auto pixel = static_cast<std::uint8_t>(bytes[k]);
    if (meta.mode == "raw") {
      cells[k] = pixel;
    } else {
      if (meta.negate) pixel = static_cast<std::uint8_t>(255 - pixel);
      cells[k] = scale_pixel_to_cost(pixel);
    }
  }
  return map;
}

// Writes cost values verbatim ("raw" mode) so that load_map(save_map(m)) == m.
inline void save_map(const Costmap& map, const std::filesystem::path& pgm_path) {
  {
    std::ofstream out(pgm_path, std::ios::binary);
    if (!out) throw MapIoError("cannot write map image: " + pgm_path.string());
    out << "P5\n" << map.width() << ' ' << map.height() << "\n255\n";
    const auto cells = map.cells();
    out.write(reinterpret_cast<const char*>(cells.data()), static_cast<std::streamsize>(cells.size()));
    if (!out) throw MapIoError("failed writing map image");
  }
  std::ofstream meta(metadata_path_for(pgm_path));
  if (!meta) throw MapIoError("cannot write map metadata");
  meta.precision(17);
  meta << "resolution: " << map.resolution() << "\n"
       << "origin: " << map.origin().x << ' ' << map.origin().y << "\n"
       << "negate: 0\n"
       << "mode: raw\n";
}

}  // namespace feasplan
