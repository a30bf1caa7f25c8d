#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "diffvor/error.hpp"

namespace diffvor {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double squared_norm(Vec2 v) { return dot(v, v); }
inline double norm(Vec2 v) { return std::sqrt(squared_norm(v)); }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }
// CCW quarter turn.
inline Vec2 perp(Vec2 v) { return {-v.y, v.x}; }

struct Bbox {
  Vec2 lo{std::numeric_limits<double>::max(), std::numeric_limits<double>::max()};
  Vec2 hi{std::numeric_limits<double>::lowest(), std::numeric_limits<double>::lowest()};

  void expand(Vec2 p) {
    lo.x = std::min(lo.x, p.x);
    lo.y = std::min(lo.y, p.y);
    hi.x = std::max(hi.x, p.x);
    hi.y = std::max(hi.y, p.y);
  }
  bool valid() const { return lo.x <= hi.x && lo.y <= hi.y; }
  Vec2 center() const { return {0.5 * (lo.x + hi.x), 0.5 * (lo.y + hi.y)}; }
  double diagonal() const { return valid() ? distance(lo, hi) : 0.0; }
};

inline Bbox bounding_box(std::span<const Vec2> points) {
  Bbox box;
  for (Vec2 p : points) box.expand(p);
  return box;
}

// Shoelace sum; positive for CCW simple polygons.
inline double polygon_signed_area(std::span<const Vec2> poly) {
  double twice = 0.0;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a = poly[i];
    const Vec2 b = poly[(i + 1) % n];
    twice += a.x * b.y - b.x * a.y;
  }
  return 0.5 * twice;
}

// Fixed convex clipping window. Vertices are plain numbers and never carry
// gradients. Normalized to CCW order on construction.
class Boundary {
 public:
  explicit Boundary(std::vector<Vec2> vertices);

  const std::vector<Vec2>& vertices() const noexcept { return vertices_; }
  std::size_t size() const noexcept { return vertices_.size(); }
  double area() const { return polygon_signed_area(vertices_); }
  Bbox bbox() const { return bounding_box(vertices_); }

  // Signed distance to the nearest edge line; positive strictly inside,
  // zero on the boundary.
  double min_edge_distance(Vec2 p) const;
  bool contains(Vec2 p) const { return min_edge_distance(p) >= 0.0; }
  bool contains_strict(Vec2 p) const { return min_edge_distance(p) > 0.0; }

  // Moves p the short way back inside so that every edge distance is at
  // least `margin`. Cyclic half-plane projections; converges because the
  // window is convex.
  Vec2 clamp_inside(Vec2 p, double margin) const;

 private:
  std::vector<Vec2> vertices_;
};

}  // namespace diffvor
