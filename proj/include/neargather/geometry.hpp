#pragma once

// Planar geometry for the near-gathering protocol: norms, the region family
// every robot builds around itself during Compute, line/region intersections
// and closest approach of two linearly moving points.
//
// All regions are centered at the origin, i.e. in the frame of the robot that
// is computing. Callers translate into that frame first.

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace neargather {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend constexpr Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Point2 operator-(Point2 a) { return {-a.x, -a.y}; }
  friend constexpr Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
  friend constexpr Point2 operator*(Point2 a, double s) { return {s * a.x, s * a.y}; }
  friend constexpr bool operator==(Point2 a, Point2 b) = default;
};

class GeometryError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

inline bool is_finite(Point2 p) { return std::isfinite(p.x) && std::isfinite(p.y); }

/// Swaps the coordinates, i.e. reflects across the line y = x.
constexpr Point2 transpose(Point2 p) { return {p.y, p.x}; }

constexpr double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }

inline double norm2(Point2 p) { return std::sqrt(p.x * p.x + p.y * p.y); }

inline double norm_inf(Point2 p) { return std::max(std::abs(p.x), std::abs(p.y)); }

/// Euclidean distance. Computed as the norm of q - p so that it agrees
/// bit-for-bit with norms of snapshot entries.
inline double dist2(Point2 p, Point2 q) { return norm2(q - p); }

inline double dist_inf(Point2 p, Point2 q) { return norm_inf(q - p); }

/// p + f * (q - p); returns q exactly at f == 1. Each coordinate is rounded
/// toward p, so an interpolated point never lies past the exact one.
inline Point2 lerp(Point2 p, Point2 q, double f) {
  if (f == 1.0) return q;
  auto axis = [f](double from, double to) {
    const double step = f * (to - from);
    double v = from + step;
    while (std::abs(v - from) > std::abs(step)) v = std::nextafter(v, from);
    return v;
  };
  return {axis(p.x, q.x), axis(p.y, q.y)};
}

// ---------------------------------------------------------------------------
// Region family
// ---------------------------------------------------------------------------

enum class Region { D0, D1, D2, S, R, Q1, Q2, H1, H2 };

/// Disks D0 ⊃ D1 ⊃ D2 of radii V, V - rho/2, V - rho, the square S of
/// half-side V - rho, and the two corner points of the halt zones.
struct ComputeRegions {
  double visibility = 0.0;
  double rho = 0.0;
  double radius0 = 0.0;
  double radius1 = 0.0;
  double radius2 = 0.0;
  double square_half_side = 0.0;
  /// Conservative boundary tolerance (1e-9 * V).
  double tolerance = 0.0;
  /// Leftmost point of the D1 boundary at height V - rho.
  Point2 p1;
  /// Bottommost point of the D1 boundary at abscissa V - rho; transpose(p1).
  Point2 p2;
};

inline ComputeRegions make_regions(double visibility, double rho) {
  if (!(visibility > 0.0) || !std::isfinite(visibility)) {
    throw std::invalid_argument("make_regions: visibility radius must be positive and finite");
  }
  if (!(rho > 0.0) || rho > visibility / 4.0) {
    throw std::invalid_argument("make_regions: rho must satisfy 0 < rho <= V/4");
  }
  ComputeRegions r;
  r.visibility = visibility;
  r.rho = rho;
  r.radius0 = visibility;
  r.radius1 = visibility - rho / 2.0;
  r.radius2 = visibility - rho;
  r.square_half_side = visibility - rho;
  r.tolerance = 1e-9 * visibility;
  const double offset = std::sqrt(r.radius1 * r.radius1 - r.radius2 * r.radius2);
  r.p1 = {-offset, r.radius2};
  r.p2 = transpose(r.p1);
  return r;
}

namespace detail {

inline bool in_r(const ComputeRegions& g, Point2 p) {
  return norm2(p) <= g.radius1 && std::abs(p.x) <= g.square_half_side &&
         std::abs(p.y) <= g.square_half_side;
}

inline bool in_q1(const ComputeRegions& g, Point2 p) {
  return p.y > 0.0 && p.x <= 0.0 && norm2(p) <= g.radius0;
}

// H1 grown by the tolerance on every boundary that separates it from R \ H1.
// The quadrant conditions stay exact so that H1 ⊆ Q1 holds without slack.
inline bool in_h1(const ComputeRegions& g, Point2 p) {
  if (!(p.y > 0.0 && p.x <= 0.0)) return false;
  if (!(p.x < g.p1.x + g.tolerance)) return false;
  const double n = norm2(p);
  const double h = g.square_half_side + g.tolerance;
  return n > g.radius2 - g.tolerance && n <= g.radius1 + g.tolerance && std::abs(p.x) <= h &&
         std::abs(p.y) <= h;
}

inline bool in_r_minus_h1(const ComputeRegions& g, Point2 p) { return in_r(g, p) && !in_h1(g, p); }

}  // namespace detail

/// Membership test. Disks, S and R are closed. Q1 includes its right border
/// x = 0 but not its bottom border y = 0; Q2 is the mirror image. H1 and H2 are
/// inflated by `regions.tolerance`.
inline bool in_region(const ComputeRegions& regions, Region id, Point2 p) {
  switch (id) {
    case Region::D0: return norm2(p) <= regions.radius0;
    case Region::D1: return norm2(p) <= regions.radius1;
    case Region::D2: return norm2(p) <= regions.radius2;
    case Region::S:
      return std::abs(p.x) <= regions.square_half_side && std::abs(p.y) <= regions.square_half_side;
    case Region::R: return detail::in_r(regions, p);
    case Region::Q1: return detail::in_q1(regions, p);
    case Region::Q2: return detail::in_q1(regions, transpose(p));
    case Region::H1: return detail::in_h1(regions, p);
    case Region::H2: return detail::in_h1(regions, transpose(p));
  }
  return false;
}

/// Leftmost point of R \ H1 on the horizontal line at height y.
///
/// Closed form over the binding constraint (square edge, D1 arc, the vertical
/// side x = p1.x of H1, or the D2 arc bounding H1), then rounded rightward
/// ulp by ulp until the membership predicate accepts it, so a robot clamping
/// against the result never moves further than the exact answer allows.
inline Point2 leftmost_in_r_minus_h1(const ComputeRegions& g, double y) {
  const double h = g.square_half_side;
  if (!(std::abs(y) <= h)) {
    throw GeometryError("leftmost_in_r_minus_h1: line y = " + std::to_string(y) + " misses R");
  }
  const double half_chord = std::min(h, std::sqrt(std::max(0.0, g.radius1 * g.radius1 - y * y)));
  double x = -half_chord;
  if (y > 0.0) {
    double halt_end = g.p1.x + g.tolerance;
    const double inner = g.radius2 - g.tolerance;
    if (y < inner) halt_end = std::min(halt_end, -std::sqrt(inner * inner - y * y));
    x = std::max(x, halt_end);
  }
  for (int i = 0; i < 256 && !detail::in_r_minus_h1(g, {x, y}); ++i) {
    x = std::nextafter(x, std::numeric_limits<double>::infinity());
  }
  if (!detail::in_r_minus_h1(g, {x, y})) {
    throw GeometryError("leftmost_in_r_minus_h1: line y = " + std::to_string(y) + " misses R \\ H1");
  }
  return {x, y};
}

/// Bottommost point of R \ H2 on the vertical line at abscissa x. Exact mirror
/// image of leftmost_in_r_minus_h1.
inline Point2 bottommost_in_r_minus_h2(const ComputeRegions& g, double x) {
  return transpose(leftmost_in_r_minus_h1(g, x));
}

/// Length of the vertical chord of the annulus D1 \ D2 at abscissa x:
/// sqrt((V - rho/2)^2 - x^2) - sqrt((V - rho)^2 - x^2), for 0 <= x <= V - rho.
inline double annulus_chord_gap(double visibility, double rho, double x) {
  const double outer = visibility - rho / 2.0;
  const double inner = visibility - rho;
  if (!(x >= 0.0) || x > inner) {
    throw GeometryError("annulus_chord_gap: x outside [0, V - rho]");
  }
  return std::sqrt(outer * outer - x * x) - std::sqrt(std::max(0.0, inner * inner - x * x));
}

struct ClosestApproach {
  double distance = 0.0;
  double time = 0.0;
};

/// Minimum of |(p0 - q0) + t (pv - qv)| over t in [0, dt].
inline ClosestApproach min_dist_linear_motions(Point2 p0, Point2 pv, Point2 q0, Point2 qv, double dt) {
  const Point2 w = p0 - q0;
  const Point2 u = pv - qv;
  const double uu = dot(u, u);
  double t = 0.0;
  if (uu > 0.0 && dt > 0.0) t = std::clamp(-dot(w, u) / uu, 0.0, dt);
  return {norm2(w + t * u), t};
}

}  // namespace neargather
