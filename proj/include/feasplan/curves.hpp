#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "feasplan/core.hpp"

namespace feasplan {

enum class SegmentType : char { kLeft = 'L', kStraight = 'S', kRight = 'R' };

struct CurveSegment {
  SegmentType type = SegmentType::kStraight;
  double length = 0.0;  // meters; negative when driven in reverse
};

// A sequence of constant-curvature segments for a vehicle with turning radius `radius`.
struct CurvePath {
  std::vector<CurveSegment> segments;
  double radius = 1.0;

  double length() const {
    double total = 0.0;
    for (const auto& s : segments) total += std::abs(s.length);
    return total;
  }

  std::string word() const {
    std::string w;
    for (const auto& s : segments) {
      w.push_back(static_cast<char>(s.type));
      w.push_back(s.length < 0.0 ? '-' : '+');
    }
    return w;
  }
};

// Moves `p` by signed arc length `s` along a segment of the given type.
inline PoseSE2 advance(const PoseSE2& p, SegmentType type, double s, double radius) {
  switch (type) {
    case SegmentType::kStraight:
      return {p.x + s * std::cos(p.theta), p.y + s * std::sin(p.theta), p.theta};
    case SegmentType::kLeft: {
      const double th = p.theta + s / radius;
      return {p.x + radius * (std::sin(th) - std::sin(p.theta)),
              p.y - radius * (std::cos(th) - std::cos(p.theta)), th};
    }
    case SegmentType::kRight: {
      const double th = p.theta - s / radius;
      return {p.x - radius * (std::sin(th) - std::sin(p.theta)),
              p.y + radius * (std::cos(th) - std::cos(p.theta)), th};
    }
  }
  return p;
}

inline PoseSE2 curve_end(const PoseSE2& start, const CurvePath& path) {
  PoseSE2 p = start;
  for (const auto& s : path.segments) p = advance(p, s.type, s.length, path.radius);
  return p;
}

struct SampledCurve {
  std::vector<PoseSE2> poses;
  std::vector<bool> reversed;  // one flag per edge (poses.size() - 1)
  std::vector<int> turn;       // -1 right, 0 straight, +1 left, per edge
};

// Samples the path with uniform spacing inside each segment, never larger than `step`.
inline SampledCurve sample_curve(const PoseSE2& start, const CurvePath& path, double step) {
  SampledCurve out;
  out.poses.push_back(start);
  PoseSE2 seg_start = start;
  for (const auto& seg : path.segments) {
    const double len = std::abs(seg.length);
    if (len < 1e-12) continue;
    const int n = std::max(1, static_cast<int>(std::ceil(len / step - 1e-9)));
    const int turn = seg.type == SegmentType::kLeft ? 1 : (seg.type == SegmentType::kRight ? -1 : 0);
    for (int k = 1; k <= n; ++k) {
      out.poses.push_back(advance(seg_start, seg.type, seg.length * k / n, path.radius));
      out.reversed.push_back(seg.length < 0.0);
      out.turn.push_back(turn);
    }
    seg_start = out.poses.back();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Dubins (forward only), normalized formulation over the six words.

namespace dubins_detail {

// Round-off just below zero must not become a full turn.
inline double mod2pi(double x) {
  const double v = normalize_angle(x);
  return v > kTwoPi - 1e-10 ? 0.0 : v;
}

struct Word {
  std::array<SegmentType, 3> types;
  std::array<double, 3> params;  // normalized lengths
  bool valid = false;
};

inline std::array<Word, 6> all_words(double alpha, double beta, double d) {
  using enum SegmentType;
  const double sa = std::sin(alpha), sb = std::sin(beta);
  const double ca = std::cos(alpha), cb = std::cos(beta);
  const double cab = std::cos(alpha - beta);
  std::array<Word, 6> w{};

  {  // LSL
    const double p2 = 2.0 + d * d - 2.0 * cab + 2.0 * d * (sa - sb);
    if (p2 >= 0.0) {
      const double tmp = std::atan2(cb - ca, d + sa - sb);
      w[0] = {{kLeft, kStraight, kLeft}, {mod2pi(-alpha + tmp), std::sqrt(p2), mod2pi(beta - tmp)}, true};
    }
  }
  {  // RSR
    const double p2 = 2.0 + d * d - 2.0 * cab + 2.0 * d * (sb - sa);
    if (p2 >= 0.0) {
      const double tmp = std::atan2(ca - cb, d - sa + sb);
      w[1] = {{kRight, kStraight, kRight}, {mod2pi(alpha - tmp), std::sqrt(p2), mod2pi(-beta + tmp)}, true};
    }
  }
  {  // LSR
    const double p2 = -2.0 + d * d + 2.0 * cab + 2.0 * d * (sa + sb);
    if (p2 >= 0.0) {
      const double p = std::sqrt(p2);
      const double tmp = std::atan2(-ca - cb, d + sa + sb) - std::atan2(-2.0, p);
      w[2] = {{kLeft, kStraight, kRight}, {mod2pi(-alpha + tmp), p, mod2pi(-beta + tmp)}, true};
    }
  }
  {  // RSL
    const double p2 = d * d - 2.0 + 2.0 * cab - 2.0 * d * (sa + sb);
    if (p2 >= 0.0) {
      const double p = std::sqrt(p2);
      const double tmp = std::atan2(ca + cb, d - sa - sb) - std::atan2(2.0, p);
      w[3] = {{kRight, kStraight, kLeft}, {mod2pi(alpha - tmp), p, mod2pi(beta - tmp)}, true};
    }
  }
  {  // RLR
    const double tmp = (6.0 - d * d + 2.0 * cab + 2.0 * d * (sa - sb)) / 8.0;
    if (std::abs(tmp) <= 1.0) {
      const double p = mod2pi(kTwoPi - std::acos(tmp));
      const double t = mod2pi(alpha - std::atan2(ca - cb, d - sa + sb) + p / 2.0);
      w[4] = {{kRight, kLeft, kRight}, {t, p, mod2pi(alpha - beta - t + p)}, true};
    }
  }
  {  // LRL
    const double tmp = (6.0 - d * d + 2.0 * cab + 2.0 * d * (sb - sa)) / 8.0;
    if (std::abs(tmp) <= 1.0) {
      const double p = mod2pi(kTwoPi - std::acos(tmp));
      const double t = mod2pi(-alpha - std::atan2(ca - cb, d + sa - sb) + p / 2.0);
      w[5] = {{kLeft, kRight, kLeft}, {t, p, mod2pi(beta - alpha - t + p)}, true};
    }
  }
  return w;
}

}  // namespace dubins_detail

// Shortest forward-only path from a to b with turning radius `radius`.
inline CurvePath dubins_path(const PoseSE2& a, const PoseSE2& b, double radius) {
  if (!(radius > 0.0)) throw InvalidArgument("turning radius must be positive");
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double D = std::hypot(dx, dy);
  const double d = D / radius;
  const double th = D > 0.0 ? normalize_angle(std::atan2(dy, dx)) : 0.0;
  const double alpha = normalize_angle(a.theta - th);
  const double beta = normalize_angle(b.theta - th);
  const auto words = dubins_detail::all_words(alpha, beta, d);
  CurvePath best;
  best.radius = radius;
  double best_len = std::numeric_limits<double>::infinity();
  for (const auto& w : words) {
    if (!w.valid) continue;
    const double len = w.params[0] + w.params[1] + w.params[2];
    if (len < best_len) {
      best_len = len;
      best.segments.clear();
      for (int k = 0; k < 3; ++k) best.segments.push_back({w.types[k], w.params[k] * radius});
    }
  }
  return best;
}

inline double dubins_distance(const PoseSE2& a, const PoseSE2& b, double radius) {
  return dubins_path(a, b, radius).length();
}

// ---------------------------------------------------------------------------
// Reeds-Shepp (forward and reverse), full standard word set in unit-radius
// coordinates, using time-flip / reflection / backwards symmetries.

namespace rs_detail {

using enum SegmentType;
// Acceptance slack for segment signs. Boundary words with one zero-length arc
// otherwise flip in and out of validity on round-off.
inline constexpr double kZero = 1e-10;
inline constexpr SegmentType kNop = SegmentType::kStraight;

// Word table; unused trailing slots are ignored via `count`.
struct WordType {
  std::array<SegmentType, 5> t;
  int count;
};

inline constexpr std::array<WordType, 18> kWords = {{
    {{kLeft, kRight, kLeft, kNop, kNop}, 3},          // 0
    {{kRight, kLeft, kRight, kNop, kNop}, 3},         // 1
    {{kLeft, kRight, kLeft, kRight, kNop}, 4},        // 2
    {{kRight, kLeft, kRight, kLeft, kNop}, 4},        // 3
    {{kLeft, kRight, kStraight, kLeft, kNop}, 4},     // 4
    {{kRight, kLeft, kStraight, kRight, kNop}, 4},    // 5
    {{kLeft, kStraight, kRight, kLeft, kNop}, 4},     // 6
    {{kRight, kStraight, kLeft, kRight, kNop}, 4},    // 7
    {{kLeft, kRight, kStraight, kRight, kNop}, 4},    // 8
    {{kRight, kLeft, kStraight, kLeft, kNop}, 4},     // 9
    {{kRight, kStraight, kRight, kLeft, kNop}, 4},    // 10
    {{kLeft, kStraight, kLeft, kRight, kNop}, 4},     // 11
    {{kLeft, kStraight, kRight, kNop, kNop}, 3},      // 12
    {{kRight, kStraight, kLeft, kNop, kNop}, 3},      // 13
    {{kLeft, kStraight, kLeft, kNop, kNop}, 3},       // 14
    {{kRight, kStraight, kRight, kNop, kNop}, 3},     // 15
    {{kLeft, kRight, kStraight, kLeft, kRight}, 5},   // 16
    {{kRight, kLeft, kStraight, kRight, kLeft}, 5},   // 17
}};

struct Candidate {
  int word = -1;
  std::array<double, 5> len{};
  double total = std::numeric_limits<double>::infinity();

  void offer(int w, std::array<double, 5> l) {
    double sum = 0.0;
    for (int k = 0; k < kWords[w].count; ++k) sum += std::abs(l[k]);
    if (sum < total) {
      total = sum;
      word = w;
      len = l;
    }
  }
};

inline double mod2pi(double x) { return wrap_to_pi(x); }

inline void polar(double x, double y, double& r, double& theta) {
  r = std::sqrt(x * x + y * y);
  theta = std::atan2(y, x);
}

inline void tau_omega(double u, double v, double xi, double eta, double phi, double& tau, double& omega) {
  const double delta = mod2pi(u - v);
  const double A = std::sin(u) - std::sin(delta);
  const double B = std::cos(u) - std::cos(delta) - 1.0;
  const double t1 = std::atan2(eta * A - xi * B, xi * A + eta * B);
  const double t2 = 2.0 * (std::cos(delta) - std::cos(v) - std::cos(u)) + 3.0;
  tau = (t2 < 0.0) ? mod2pi(t1 + kPi) : mod2pi(t1);
  omega = mod2pi(tau - u + v - phi);
}

inline bool LpSpLp(double x, double y, double phi, double& t, double& u, double& v) {
  polar(x - std::sin(phi), y - 1.0 + std::cos(phi), u, t);
  if (t >= -kZero) {
    v = mod2pi(phi - t);
    if (v >= -kZero) return true;
  }
  return false;
}

inline bool LpSpRp(double x, double y, double phi, double& t, double& u, double& v) {
  double t1, u1;
  polar(x + std::sin(phi), y - 1.0 - std::cos(phi), u1, t1);
  u1 = u1 * u1;
  if (u1 >= 4.0) {
    u = std::sqrt(u1 - 4.0);
    const double theta = std::atan2(2.0, u);
    t = mod2pi(t1 + theta);
    v = mod2pi(t - phi);
    return t >= -kZero && v >= -kZero;
  }
  return false;
}

inline bool LpRmL(double x, double y, double phi, double& t, double& u, double& v) {
  const double xi = x - std::sin(phi);
  const double eta = y - 1.0 + std::cos(phi);
  double u1, theta;
  polar(xi, eta, u1, theta);
  if (u1 <= 4.0) {
    u = -2.0 * std::asin(0.25 * u1);
    t = mod2pi(theta + 0.5 * u + kPi);
    v = mod2pi(phi - t + u);
    return t >= -kZero && u <= kZero;
  }
  return false;
}

inline bool LpRupLumRm(double x, double y, double phi, double& t, double& u, double& v) {
  const double xi = x + std::sin(phi);
  const double eta = y - 1.0 - std::cos(phi);
  const double rho = 0.25 * (2.0 + std::sqrt(xi * xi + eta * eta));
  if (rho <= 1.0) {
    u = std::acos(rho);
    tau_omega(u, -u, xi, eta, phi, t, v);
    return t >= -kZero && v <= kZero;
  }
  return false;
}

inline bool LpRumLumRp(double x, double y, double phi, double& t, double& u, double& v) {
  const double xi = x + std::sin(phi);
  const double eta = y - 1.0 - std::cos(phi);
  const double rho = (20.0 - xi * xi - eta * eta) / 16.0;
  if (rho >= 0.0 && rho <= 1.0) {
    u = -std::acos(rho);
    if (u >= -0.5 * kPi) {
      tau_omega(u, u, xi, eta, phi, t, v);
      return t >= -kZero && v >= -kZero;
    }
  }
  return false;
}

inline bool LpRmSmLm(double x, double y, double phi, double& t, double& u, double& v) {
  const double xi = x - std::sin(phi);
  const double eta = y - 1.0 + std::cos(phi);
  double rho, theta;
  polar(xi, eta, rho, theta);
  if (rho >= 2.0) {
    const double r = std::sqrt(rho * rho - 4.0);
    u = 2.0 - r;
    t = mod2pi(theta + std::atan2(r, -2.0));
    v = mod2pi(phi - 0.5 * kPi - t);
    return t >= -kZero && u <= kZero && v <= kZero;
  }
  return false;
}

inline bool LpRmSmRm(double x, double y, double phi, double& t, double& u, double& v) {
  const double xi = x + std::sin(phi);
  const double eta = y - 1.0 - std::cos(phi);
  double rho, theta;
  polar(-eta, xi, rho, theta);
  if (rho >= 2.0) {
    t = theta;
    u = 2.0 - rho;
    v = mod2pi(t + 0.5 * kPi - phi);
    return t >= -kZero && u <= kZero && v <= kZero;
  }
  return false;
}

inline bool LpRmSLmRp(double x, double y, double phi, double& t, double& u, double& v) {
  const double xi = x + std::sin(phi);
  const double eta = y - 1.0 - std::cos(phi);
  double rho, theta;
  polar(xi, eta, rho, theta);
  if (rho >= 2.0) {
    u = 4.0 - std::sqrt(rho * rho - 4.0);
    if (u <= kZero) {
      t = mod2pi(std::atan2((4.0 - u) * xi - 2.0 * eta, -2.0 * xi + (u - 4.0) * eta));
      v = mod2pi(t - phi);
      return t >= -kZero && v >= -kZero;
    }
  }
  return false;
}

inline void CSC(double x, double y, double phi, Candidate& c) {
  double t, u, v;
  if (LpSpLp(x, y, phi, t, u, v)) c.offer(14, {t, u, v});
  if (LpSpLp(-x, y, -phi, t, u, v)) c.offer(14, {-t, -u, -v});
  if (LpSpLp(x, -y, -phi, t, u, v)) c.offer(15, {t, u, v});
  if (LpSpLp(-x, -y, phi, t, u, v)) c.offer(15, {-t, -u, -v});
  if (LpSpRp(x, y, phi, t, u, v)) c.offer(12, {t, u, v});
  if (LpSpRp(-x, y, -phi, t, u, v)) c.offer(12, {-t, -u, -v});
  if (LpSpRp(x, -y, -phi, t, u, v)) c.offer(13, {t, u, v});
  if (LpSpRp(-x, -y, phi, t, u, v)) c.offer(13, {-t, -u, -v});
}

inline void CCC(double x, double y, double phi, Candidate& c) {
  double t, u, v;
  if (LpRmL(x, y, phi, t, u, v)) c.offer(0, {t, u, v});
  if (LpRmL(-x, y, -phi, t, u, v)) c.offer(0, {-t, -u, -v});
  if (LpRmL(x, -y, -phi, t, u, v)) c.offer(1, {t, u, v});
  if (LpRmL(-x, -y, phi, t, u, v)) c.offer(1, {-t, -u, -v});
  const double xb = x * std::cos(phi) + y * std::sin(phi);
  const double yb = x * std::sin(phi) - y * std::cos(phi);
  if (LpRmL(xb, yb, phi, t, u, v)) c.offer(0, {v, u, t});
  if (LpRmL(-xb, yb, -phi, t, u, v)) c.offer(0, {-v, -u, -t});
  if (LpRmL(xb, -yb, -phi, t, u, v)) c.offer(1, {v, u, t});
  if (LpRmL(-xb, -yb, phi, t, u, v)) c.offer(1, {-v, -u, -t});
}

inline void CCCC(double x, double y, double phi, Candidate& c) {
  double t, u, v;
  if (LpRupLumRm(x, y, phi, t, u, v)) c.offer(2, {t, u, -u, v});
  if (LpRupLumRm(-x, y, -phi, t, u, v)) c.offer(2, {-t, -u, u, -v});
  if (LpRupLumRm(x, -y, -phi, t, u, v)) c.offer(3, {t, u, -u, v});
  if (LpRupLumRm(-x, -y, phi, t, u, v)) c.offer(3, {-t, -u, u, -v});
  if (LpRumLumRp(x, y, phi, t, u, v)) c.offer(2, {t, u, u, v});
  if (LpRumLumRp(-x, y, -phi, t, u, v)) c.offer(2, {-t, -u, -u, -v});
  if (LpRumLumRp(x, -y, -phi, t, u, v)) c.offer(3, {t, u, u, v});
  if (LpRumLumRp(-x, -y, phi, t, u, v)) c.offer(3, {-t, -u, -u, -v});
}

inline void CCSC(double x, double y, double phi, Candidate& c) {
  double t, u, v;
  const double h = 0.5 * kPi;
  if (LpRmSmLm(x, y, phi, t, u, v)) c.offer(4, {t, -h, u, v});
  if (LpRmSmLm(-x, y, -phi, t, u, v)) c.offer(4, {-t, h, -u, -v});
  if (LpRmSmLm(x, -y, -phi, t, u, v)) c.offer(5, {t, -h, u, v});
  if (LpRmSmLm(-x, -y, phi, t, u, v)) c.offer(5, {-t, h, -u, -v});
  if (LpRmSmRm(x, y, phi, t, u, v)) c.offer(8, {t, -h, u, v});
  if (LpRmSmRm(-x, y, -phi, t, u, v)) c.offer(8, {-t, h, -u, -v});
  if (LpRmSmRm(x, -y, -phi, t, u, v)) c.offer(9, {t, -h, u, v});
  if (LpRmSmRm(-x, -y, phi, t, u, v)) c.offer(9, {-t, h, -u, -v});
  const double xb = x * std::cos(phi) + y * std::sin(phi);
  const double yb = x * std::sin(phi) - y * std::cos(phi);
  if (LpRmSmLm(xb, yb, phi, t, u, v)) c.offer(6, {v, u, -h, t});
  if (LpRmSmLm(-xb, yb, -phi, t, u, v)) c.offer(6, {-v, -u, h, -t});
  if (LpRmSmLm(xb, -yb, -phi, t, u, v)) c.offer(7, {v, u, -h, t});
  if (LpRmSmLm(-xb, -yb, phi, t, u, v)) c.offer(7, {-v, -u, h, -t});
  if (LpRmSmRm(xb, yb, phi, t, u, v)) c.offer(10, {v, u, -h, t});
  if (LpRmSmRm(-xb, yb, -phi, t, u, v)) c.offer(10, {-v, -u, h, -t});
  if (LpRmSmRm(xb, -yb, -phi, t, u, v)) c.offer(11, {v, u, -h, t});
  if (LpRmSmRm(-xb, -yb, phi, t, u, v)) c.offer(11, {-v, -u, h, -t});
}

inline void CCSCC(double x, double y, double phi, Candidate& c) {
  double t, u, v;
  const double h = 0.5 * kPi;
  if (LpRmSLmRp(x, y, phi, t, u, v)) c.offer(16, {t, -h, u, -h, v});
  if (LpRmSLmRp(-x, y, -phi, t, u, v)) c.offer(16, {-t, h, -u, h, -v});
  if (LpRmSLmRp(x, -y, -phi, t, u, v)) c.offer(17, {t, -h, u, -h, v});
  if (LpRmSLmRp(-x, -y, phi, t, u, v)) c.offer(17, {-t, h, -u, h, -v});
}

}  // namespace rs_detail

// Shortest path from a to b allowing reverse motion.
inline CurvePath reeds_shepp_path(const PoseSE2& a, const PoseSE2& b, double radius) {
  if (!(radius > 0.0)) throw InvalidArgument("turning radius must be positive");
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double c = std::cos(a.theta);
  const double s = std::sin(a.theta);
  const double x = (c * dx + s * dy) / radius;
  const double y = (-s * dx + c * dy) / radius;
  const double phi = wrap_to_pi(b.theta - a.theta);

  rs_detail::Candidate best;
  rs_detail::CSC(x, y, phi, best);
  rs_detail::CCC(x, y, phi, best);
  rs_detail::CCCC(x, y, phi, best);
  rs_detail::CCSC(x, y, phi, best);
  rs_detail::CCSCC(x, y, phi, best);

  CurvePath path;
  path.radius = radius;
  if (best.word < 0) return path;  // unreachable: CSC always has a solution
  const auto& w = rs_detail::kWords[best.word];
  for (int k = 0; k < w.count; ++k) path.segments.push_back({w.t[k], best.len[k] * radius});
  return path;
}

inline double reeds_shepp_distance(const PoseSE2& a, const PoseSE2& b, double radius) {
  return reeds_shepp_path(a, b, radius).length();
}

enum class MotionModel { kDubins, kReedsShepp };

inline const char* to_string(MotionModel m) {
  return m == MotionModel::kDubins ? "dubins" : "reeds_shepp";
}

inline CurvePath shortest_curve(MotionModel model, const PoseSE2& a, const PoseSE2& b, double radius) {
  return model == MotionModel::kDubins ? dubins_path(a, b, radius) : reeds_shepp_path(a, b, radius);
}

}  // namespace feasplan
