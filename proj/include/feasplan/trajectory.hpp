#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <utility>
#include <vector>

#include "feasplan/core.hpp"
#include "feasplan/curves.hpp"

namespace feasplan {

// Single circular arc tangent to both heading lines, plus at most one straight
// segment on whichever side is longer.
struct TrajectorySolution {
  PoseSE2 start;
  PoseSE2 end;
  Point2 intersection;
  Point2 p_arc;
  Point2 q_arc;
  Point2 center;
  double radius = std::numeric_limits<double>::infinity();  // infinite for a pure straight line
  int turn_sign = 0;                                         // +1 left, -1 right, 0 straight
  std::optional<std::pair<Point2, Point2>> line_segment;
  bool line_on_start_side = false;
  double arc_length = 0.0;
  double line_length = 0.0;
  double total_length = 0.0;

  bool is_straight() const { return turn_sign == 0; }

  CurvePath as_curve() const {
    CurvePath c;
    c.radius = std::isfinite(radius) ? radius : 1.0;
    if (is_straight()) {
      c.segments.push_back({SegmentType::kStraight, line_length});
      return c;
    }
    const SegmentType arc = turn_sign > 0 ? SegmentType::kLeft : SegmentType::kRight;
    if (line_segment && line_on_start_side) c.segments.push_back({SegmentType::kStraight, line_length});
    c.segments.push_back({arc, arc_length});
    if (line_segment && !line_on_start_side) c.segments.push_back({SegmentType::kStraight, line_length});
    return c;
  }
};

// Builds the minimal-curvature arc+line joining `start` to `end`, or nullopt if
// no such trajectory with radius >= r_min exists. Works on direction vectors
// throughout, so no heading is singular.
inline std::optional<TrajectorySolution> generate_trajectory(const PoseSE2& start, const PoseSE2& end,
                                                             double r_min) {
  if (!(r_min > 0.0)) throw InvalidArgument("minimum radius must be positive");
  const Point2 p = start.position();
  const Point2 q = end.position();
  const Point2 u1 = heading_vector(start.theta);
  const Point2 u2 = heading_vector(end.theta);
  const Point2 pq = q - p;
  const double span = norm(pq);
  if (span < 1e-12) return std::nullopt;

  TrajectorySolution sol;
  sol.start = start;
  sol.end = end;

  const double denom = cross(u1, u2);
  if (std::abs(denom) < 1e-12) {
    if (dot(u1, u2) <= 0.0) return std::nullopt;
    if (std::abs(cross(pq, u1)) > 1e-9 * std::max(1.0, span) || dot(pq, u1) <= 0.0) return std::nullopt;
    sol.intersection = p;
    sol.p_arc = p;
    sol.q_arc = p;
    sol.center = p;
    sol.line_segment = std::make_pair(p, q);
    sol.line_on_start_side = false;
    sol.line_length = span;
    sol.total_length = span;
    return sol;
  }

  const double t = cross(pq, u2) / denom;
  const Point2 I = p + u1 * t;
  const double t1 = dot(I - p, u1);
  const double t2 = dot(q - I, u2);
  const double eps = 1e-12 * std::max(1.0, span);
  if (t1 < -eps || t2 < -eps) return std::nullopt;

  const double d = std::max(0.0, std::min(t1, t2));
  const double turn = std::atan2(denom, dot(u1, u2));
  const double r = d / std::tan(std::abs(turn) / 2.0);
  if (!(r >= r_min * (1.0 - 1e-12))) return std::nullopt;
  const int sign = turn > 0.0 ? 1 : -1;
  const Point2 n1{-u1.y, u1.x};
  const Point2 n2{-u2.y, u2.x};

  // Anchor the circle at whichever endpoint lies on the arc so that both radii
  // and both tangencies hold exactly.
  sol.intersection = I;
  if (t1 >= t2) {
    sol.q_arc = q;
    sol.center = q + n2 * (sign * r);
    sol.p_arc = sol.center - n1 * (sign * r);
  } else {
    sol.p_arc = p;
    sol.center = p + n1 * (sign * r);
    sol.q_arc = sol.center - n2 * (sign * r);
  }
  sol.radius = r;
  sol.turn_sign = sign;
  sol.arc_length = r * std::abs(turn);
  const double extra = std::abs(t1 - t2);
  if (extra > 1e-12 * std::max(1.0, span)) {
    sol.line_on_start_side = t1 > t2;
    sol.line_segment = sol.line_on_start_side ? std::make_pair(p, sol.p_arc) : std::make_pair(sol.q_arc, q);
    sol.line_length = extra;
  }
  sol.total_length = sol.arc_length + sol.line_length;
  return sol;
}

inline std::vector<PoseSE2> sample_trajectory(const TrajectorySolution& sol, double step) {
  auto poses = sample_curve(sol.start, sol.as_curve(), step).poses;
  poses.back() = sol.end;  // remove floating-point drift at the endpoint
  return poses;
}

// Tangent length from the heading-line intersection to the arc endpoints for an
// arc of radius r turning through |dtheta|.
inline double tangent_length_for_radius(double r, double dtheta) {
  return r * std::tan(std::abs(wrap_to_pi(dtheta)) / 2.0);
}

// Closed-form lower bound on the tangent length, psi = pi/2 - |dtheta|,
// d = r / tan(psi / 2). Kept for comparison against tangent_length_for_radius;
// planning uses the constructed radius instead.
inline double closed_form_min_tangent_length(double r, double dtheta) {
  const double psi = kPi / 2.0 - std::abs(wrap_to_pi(dtheta));
  return r / std::tan(psi / 2.0);
}

// ---------------------------------------------------------------------------

struct MotionPrimitive {
  int id = 0;
  int start_heading_bin = 0;
  int end_heading_bin = 0;
  std::vector<PoseSE2> poses;  // origin-relative, first pose at (0, 0, start heading)
  double length = 0.0;
  int turn = 0;  // -1 right, 0 straight, +1 left
  bool reversed = false;

  friend bool operator==(const MotionPrimitive&, const MotionPrimitive&) = default;
};

// Largest Menger curvature over consecutive pose triples. Triples that straddle
// a change of travel direction (a cusp) are skipped: `reversed[k]` flags edge k.
inline double max_discrete_curvature(const std::vector<PoseSE2>& poses,
                                     const std::vector<bool>& reversed = {}) {
  double kmax = 0.0;
  for (std::size_t k = 1; k + 1 < poses.size(); ++k) {
    if (!reversed.empty() && reversed[k - 1] != reversed[k]) continue;
    kmax = std::max(kmax, menger_curvature(poses[k - 1].position(), poses[k].position(),
                                           poses[k + 1].position()));
  }
  return kmax;
}

inline double max_spacing(const std::vector<PoseSE2>& poses) {
  double s = 0.0;
  for (std::size_t k = 1; k < poses.size(); ++k) {
    s = std::max(s, distance(poses[k - 1].position(), poses[k].position()));
  }
  return s;
}

// Turn angle used by the hybrid primitives: the angle subtended by a sqrt(2)-cell
// chord at r_min, rounded up to whole heading bins.
inline double hybrid_turn_angle(double r_min, double resolution, int heading_bins) {
  const double chord = std::sqrt(2.0) * resolution;
  if (chord / (2.0 * r_min) > 1.0) {
    std::ostringstream msg;
    msg << "turning radius " << r_min << " too small for resolution " << resolution
        << "; minimum feasible radius is " << chord / 2.0;
    throw InvalidArgument(msg.str());
  }
  const double bin = kTwoPi / heading_bins;
  const double raw = std::max(2.0 * std::asin(chord / (2.0 * r_min)), bin);
  const double bins = std::ceil(raw / bin - 1e-9);
  return bins * bin;
}

// Primitive set for the continuous-state planner, expressed for start heading 0.
// Callers rotate the poses into the heading of the expanded state.
inline std::vector<MotionPrimitive> hybrid_primitives(double r_min, double resolution, int heading_bins,
                                                      bool allow_reverse) {
  if (!(r_min > 0.0) || !(resolution > 0.0)) throw InvalidArgument("radius and resolution must be positive");
  if (heading_bins < 8) throw InvalidArgument("at least 8 heading bins are required");
  const double dtheta = hybrid_turn_angle(r_min, resolution, heading_bins);
  if (dtheta > kPi / 2.0 + 1e-9) {
    std::ostringstream msg;
    msg << "turning radius " << r_min << " needs a turn of " << dtheta
        << " rad per primitive; minimum feasible radius at this resolution is "
        << std::sqrt(2.0) * resolution / (2.0 * std::sin(kPi / 4.0));
    throw InvalidArgument(msg.str());
  }
  const double bin = kTwoPi / heading_bins;
  const int dbins = static_cast<int>(std::lround(dtheta / bin));
  const double step = resolution;

  std::vector<MotionPrimitive> out;
  auto add = [&](SegmentType type, double length, int turn, int bins) {
    for (int dir : {1, -1}) {
      if (dir < 0 && !allow_reverse) continue;
      CurvePath c;
      c.radius = r_min;
      c.segments.push_back({type, dir * length});
      MotionPrimitive m;
      m.id = static_cast<int>(out.size());
      m.start_heading_bin = 0;
      // Driving an arc backwards turns the heading the other way.
      m.end_heading_bin = ((dir * turn * bins) % heading_bins + heading_bins) % heading_bins;
      m.poses = sample_curve(PoseSE2{}, c, step).poses;
      m.length = length;
      m.turn = turn;
      m.reversed = dir < 0;
      out.push_back(std::move(m));
    }
  };
  add(SegmentType::kStraight, std::sqrt(2.0) * resolution, 0, 0);
  add(SegmentType::kLeft, r_min * dtheta, 1, dbins);
  add(SegmentType::kRight, r_min * dtheta, -1, dbins);
  if (2.0 * dtheta <= kPi / 2.0 + 1e-9) {
    add(SegmentType::kLeft, r_min * 2.0 * dtheta, 1, 2 * dbins);
    add(SegmentType::kRight, r_min * 2.0 * dtheta, -1, 2 * dbins);
  }
  return out;
}

}  // namespace feasplan
