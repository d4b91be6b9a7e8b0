#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "feasplan/core.hpp"
#include "feasplan/gridmap.hpp"

namespace feasplan {

struct SmootherParams {
  bool enabled = false;
  double weight_smooth = 0.3;
  double weight_data = 0.7;
  double step_size = 0.1;
  int max_iterations = 1000;
  double tolerance = 1e-4;  // stop once no point moves farther than this
};

// Sum of squared second differences.
inline double smoothness_term(const std::vector<Point2>& p) {
  double s = 0.0;
  for (std::size_t i = 1; i + 1 < p.size(); ++i) {
    const Point2 d = p[i - 1] - p[i] * 2.0 + p[i + 1];
    s += dot(d, d);
  }
  return s;
}

// Sum of squared distances to the original points.
inline double data_term(const std::vector<Point2>& p, const std::vector<Point2>& p0) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const Point2 d = p[i] - p0[i];
    s += dot(d, d);
  }
  return s;
}

struct SmoothReport {
  int iterations = 0;              // accepted steps
  std::vector<double> smoothness;  // after each accepted step, starting with the input
  std::vector<double> objective;
  bool reverted_to_input = false;
};

// Gradient descent on w_s * smoothness + w_d * data over the free points.
// `fixed[i]` pins a point (endpoints and cusps); `reversed[k]` flags edge k.
// A step is kept only if neither the full objective nor the smoothness term
// increases; otherwise the step size is halved. Points whose new position
// collides are left where they were.
inline std::vector<PoseSE2> smooth_poses(const std::vector<PoseSE2>& poses, const std::vector<bool>& reversed,
                                         const Costmap& map, const Footprint& footprint, const SmootherParams& params,
                                         bool allow_unknown = false, SmoothReport* report = nullptr) {
  if (!(params.weight_smooth > 0.0) || !(params.weight_data > 0.0)) {
    throw InvalidArgument("smoother weights must be positive");
  }
  SmoothReport rep;
  const std::size_t n = poses.size();
  if (n < 3) {
    if (report) *report = rep;
    return poses;
  }
  std::vector<bool> fixed(n, false);
  fixed.front() = fixed.back() = true;
  for (std::size_t k = 1; k + 1 < n; ++k) {
    if (k < reversed.size() && reversed[k - 1] != reversed[k]) fixed[k] = true;
  }

  std::vector<Point2> p0(n);
  for (std::size_t i = 0; i < n; ++i) p0[i] = poses[i].position();
  std::vector<Point2> p = p0;
  const double ws = params.weight_smooth, wd = params.weight_data;
  auto objective = [&](const std::vector<Point2>& q, double& s) {
    s = smoothness_term(q);
    return ws * s + wd * data_term(q, p0);
  };
  double s_cur = 0.0;
  double j_cur = objective(p, s_cur);
  rep.smoothness.push_back(s_cur);
  rep.objective.push_back(j_cur);

  auto heading_at = [&](const std::vector<Point2>& q, std::size_t i) {
    const Point2 d = q[std::min(i + 1, n - 1)] - q[i == 0 ? 0 : i - 1];
    const bool rev = i < reversed.size() ? reversed[i] : (!reversed.empty() && reversed.back());
    return std::atan2(d.y, d.x) + (rev ? kPi : 0.0);
  };

  double step = params.step_size;
  std::vector<Point2> grad(n), trial(n);
  for (int iter = 0; iter < params.max_iterations && step > 1e-12; ++iter) {
    std::vector<Point2> second(n, Point2{0.0, 0.0});
    for (std::size_t i = 1; i + 1 < n; ++i) second[i] = p[i - 1] - p[i] * 2.0 + p[i + 1];
    for (std::size_t i = 1; i + 1 < n; ++i) {
      Point2 g = second[i] * (-4.0 * ws);
      if (i >= 2) g = g + second[i - 1] * (2.0 * ws);
      if (i + 2 <= n - 1) g = g + second[i + 1] * (2.0 * ws);
      grad[i] = g + (p[i] - p0[i]) * (2.0 * wd);
    }
    bool accepted = false;
    double moved = 0.0;
    while (step > 1e-12) {
      trial = p;
      for (std::size_t i = 1; i + 1 < n; ++i) {
        if (!fixed[i]) trial[i] = p[i] - grad[i] * step;
      }
      for (std::size_t i = 1; i + 1 < n; ++i) {
        if (fixed[i]) continue;
        const PoseSE2 candidate(trial[i].x, trial[i].y, heading_at(trial, i));
        if (collision_check(map, candidate, footprint, allow_unknown)) trial[i] = p[i];
      }
      double s_new = 0.0;
      const double j_new = objective(trial, s_new);
      if (j_new <= j_cur && s_new <= s_cur) {
        moved = 0.0;
        for (std::size_t i = 0; i < n; ++i) moved = std::max(moved, distance(trial[i], p[i]));
        p.swap(trial);
        j_cur = j_new;
        s_cur = s_new;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    ++rep.iterations;
    rep.smoothness.push_back(s_cur);
    rep.objective.push_back(j_cur);
    if (moved < params.tolerance) break;
  }

  std::vector<PoseSE2> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = (i == 0 || i + 1 == n || fixed[i]) ? poses[i] : PoseSE2(p[i].x, p[i].y, heading_at(p, i));
    if (collision_check(map, out[i], footprint, allow_unknown)) {
      rep.reverted_to_input = true;
      if (report) *report = rep;
      return poses;
    }
  }
  if (report) *report = rep;
  return out;
}

}  // namespace feasplan
