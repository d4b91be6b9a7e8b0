#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace feasplan {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Raised when an internal invariant is found broken (exit code 4 in the CLI).
class InvariantViolation : public Error {
 public:
  using Error::Error;
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
  Point2 operator+(const Point2& o) const { return {x + o.x, y + o.y}; }
  Point2 operator-(const Point2& o) const { return {x - o.x, y - o.y}; }
  Point2 operator*(double s) const { return {x * s, y * s}; }
};

inline double dot(const Point2& a, const Point2& b) { return a.x * b.x + a.y * b.y; }
inline double cross(const Point2& a, const Point2& b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Point2& a) { return std::hypot(a.x, a.y); }
inline double distance(const Point2& a, const Point2& b) { return norm(a - b); }
inline Point2 heading_vector(double theta) { return {std::cos(theta), std::sin(theta)}; }

// Wraps to [0, 2pi).
inline double normalize_angle(double theta) {
  double v = std::fmod(theta, kTwoPi);
  if (v < 0.0) v += kTwoPi;
  if (v >= kTwoPi) v -= kTwoPi;
  return v;
}

// Wraps to (-pi, pi].
inline double wrap_to_pi(double theta) {
  double v = std::fmod(theta, kTwoPi);
  if (v <= -kPi) v += kTwoPi;
  else if (v > kPi) v -= kTwoPi;
  return v;
}

inline double angle_diff(double a, double b) { return std::abs(wrap_to_pi(a - b)); }

// Continuous planar pose. theta is kept in [0, 2pi).
struct PoseSE2 {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;

  PoseSE2() = default;
  PoseSE2(double x_, double y_, double theta_) : x(x_), y(y_), theta(normalize_angle(theta_)) {}

  Point2 position() const { return {x, y}; }
  friend bool operator==(const PoseSE2&, const PoseSE2&) = default;
};

// Expresses `p` in the frame of `frame`.
inline PoseSE2 relative_pose(const PoseSE2& frame, const PoseSE2& p) {
  const double c = std::cos(frame.theta);
  const double s = std::sin(frame.theta);
  const double dx = p.x - frame.x;
  const double dy = p.y - frame.y;
  return PoseSE2(c * dx + s * dy, -s * dx + c * dy, p.theta - frame.theta);
}

// Inverse of relative_pose: maps a pose given in `frame` coordinates to the world.
inline PoseSE2 compose(const PoseSE2& frame, const PoseSE2& local) {
  const double c = std::cos(frame.theta);
  const double s = std::sin(frame.theta);
  return PoseSE2(frame.x + c * local.x - s * local.y, frame.y + s * local.x + c * local.y,
                 frame.theta + local.theta);
}

// Menger curvature of three points (1 / circumradius). Zero for collinear or
// degenerate triples.
inline double menger_curvature(const Point2& a, const Point2& b, const Point2& c) {
  const double ab = distance(a, b);
  const double bc = distance(b, c);
  const double ca = distance(c, a);
  const double denom = ab * bc * ca;
  if (denom <= 0.0) return 0.0;
  return 2.0 * std::abs(cross(b - a, c - a)) / denom;
}

}  // namespace feasplan
