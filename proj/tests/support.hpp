#pragma once

// Independent reference implementations used by the tests. None of these
// call into the library: region membership is restated from the definitions
// and line extrema are found by scanning plus bisection.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "neargather/geometry.hpp"
#include "neargather/protocol.hpp"

namespace oracle {

using neargather::Point2;

struct Regions {
  double v, rho, r0, r1, r2, h, p1x;
  explicit Regions(double v_, double rho_)
      : v(v_), rho(rho_), r0(v_), r1(v_ - rho_ / 2), r2(v_ - rho_), h(v_ - rho_),
        p1x(-std::sqrt((v_ - rho_ / 2) * (v_ - rho_ / 2) - (v_ - rho_) * (v_ - rho_))) {}
};

inline double norm(Point2 p) { return std::hypot(p.x, p.y); }

// `grow` enlarges the closed set by the given margin on every side.
inline bool in_r(const Regions& g, Point2 p, double grow = 0.0) {
  return norm(p) <= g.r1 + grow && std::abs(p.x) <= g.h + grow && std::abs(p.y) <= g.h + grow;
}
inline bool in_q1(const Regions& g, Point2 p) { return p.y > 0 && p.x <= 0 && norm(p) <= g.r0; }
inline bool in_q2(const Regions& g, Point2 p) { return p.x > 0 && p.y <= 0 && norm(p) <= g.r0; }

// Exact H1 with its x < p1.x side and D2 arc moved by `shift` (positive grows).
inline bool in_h1(const Regions& g, Point2 p, double shift = 0.0) {
  return in_q1(g, p) && p.x < g.p1x + shift && norm(p) > g.r2 - shift && in_r(g, p, std::max(0.0, shift));
}
inline bool in_h2(const Regions& g, Point2 p, double shift = 0.0) { return in_h1(g, {p.y, p.x}, shift); }

/// Leftmost x on line y with in_r && !in_h1 (exact sets), by scan + bisection.
inline double leftmost_exact(const Regions& g, double y) {
  auto member = [&](double x) { return in_r(g, {x, y}) && !in_h1(g, {x, y}); };
  const int steps = 40000;
  double prev = -g.h;
  if (member(prev)) return prev;
  for (int i = 1; i <= steps; ++i) {
    const double x = -g.h + 2.0 * g.h * i / steps;
    if (member(x)) {
      double lo = prev, hi = x;
      for (int k = 0; k < 200; ++k) {
        const double mid = 0.5 * (lo + hi);
        (member(mid) ? hi : lo) = mid;
      }
      return hi;
    }
    prev = x;
  }
  return std::nan("");
}

/// Brute-force closest approach by dense time sampling.
inline double sampled_min_distance(Point2 p0, Point2 pv, Point2 q0, Point2 qv, double dt, int samples = 10000) {
  double best = INFINITY;
  for (int i = 0; i <= samples; ++i) {
    const double t = dt * i / samples;
    best = std::min(best, std::hypot(p0.x + t * pv.x - q0.x - t * qv.x, p0.y + t * pv.y - q0.y - t * qv.y));
  }
  return best;
}

/// Snapshots that stress the region boundaries: a mix of uniform points in
/// the visibility disk, points near the halt zones, near the axes and near
/// the origin.
class SnapshotGenerator {
 public:
  SnapshotGenerator(double v, double rho, std::uint64_t seed) : g_(v, rho), rng_(seed) {}

  neargather::Snapshot next(std::size_t max_others = 12) {
    neargather::Snapshot s;
    s.positions.push_back({0.0, 0.0});
    const auto count = std::uniform_int_distribution<std::size_t>(0, max_others)(rng_);
    while (s.positions.size() < count + 1) {
      Point2 p = sample();
      if (norm(p) > g_.v) continue;
      if (std::find(s.positions.begin(), s.positions.end(), p) != s.positions.end()) continue;
      s.positions.push_back(p);
    }
    std::shuffle(s.positions.begin(), s.positions.end(), rng_);
    return s;
  }

  Point2 sample() {
    const int kind = std::uniform_int_distribution<int>(0, 6)(rng_);
    const double v = g_.v;
    switch (kind) {
      case 0: {  // annulus band in the upper-left quadrant (H1 candidates)
        const double r = uni(g_.r2 - 0.05 * g_.rho, g_.r1 + 0.05 * g_.rho);
        const double a = uni(M_PI / 2, M_PI);
        return {r * std::cos(a), r * std::sin(a)};
      }
      case 1: {  // mirror band (H2 candidates)
        const double r = uni(g_.r2 - 0.05 * g_.rho, g_.r1 + 0.05 * g_.rho);
        const double a = uni(-M_PI / 2, 0.0);
        return {r * std::cos(a), r * std::sin(a)};
      }
      case 2:  // on an axis
        return uni(0, 1) < 0.5 ? Point2{uni(-v, v), 0.0} : Point2{0.0, uni(-v, v)};
      case 3:  // close to the observer
        return {uni(-g_.rho, g_.rho), uni(-g_.rho, g_.rho)};
      case 4:  // near p1 / p2
        return uni(0, 1) < 0.5 ? Point2{g_.p1x + uni(-0.01, 0.01) * v, g_.r2 + uni(-0.01, 0.01) * v}
                               : Point2{g_.r2 + uni(-0.01, 0.01) * v, g_.p1x + uni(-0.01, 0.01) * v};
      default: {
        const double r = v * std::sqrt(uni(0, 1));
        const double a = uni(0, 2 * M_PI);
        return {r * std::cos(a), r * std::sin(a)};
      }
    }
  }

  double uni(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  std::mt19937_64& rng() { return rng_; }

 private:
  Regions g_;
  std::mt19937_64 rng_;
};

}  // namespace oracle
