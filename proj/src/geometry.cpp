#include "diffvor/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace diffvor {

Boundary::Boundary(std::vector<Vec2> vertices) : vertices_(std::move(vertices)) {
  if (vertices_.size() < 3) {
    throw ConfigError("boundary needs at least 3 vertices");
  }
  for (Vec2 v : vertices_) {
    if (!std::isfinite(v.x) || !std::isfinite(v.y)) {
      throw ConfigError("boundary vertices must be finite");
    }
  }
  const double area = polygon_signed_area(vertices_);
  if (area == 0.0) {
    throw ConfigError("boundary polygon has zero area");
  }
  if (area < 0.0) {
    std::reverse(vertices_.begin(), vertices_.end());
  }
  const std::size_t n = vertices_.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a = vertices_[i];
    const Vec2 b = vertices_[(i + 1) % n];
    const Vec2 c = vertices_[(i + 2) % n];
    if (cross(b - a, c - b) <= 0.0) {
      throw ConfigError("boundary polygon must be strictly convex");
    }
  }
}

double Boundary::min_edge_distance(Vec2 p) const {
  double best = std::numeric_limits<double>::max();
  const std::size_t n = vertices_.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a = vertices_[i];
    const Vec2 b = vertices_[(i + 1) % n];
    const double len = distance(a, b);
    best = std::min(best, cross(b - a, p - a) / len);
  }
  return best;
}

Vec2 Boundary::clamp_inside(Vec2 p, double margin) const {
  const std::size_t n = vertices_.size();
  for (std::size_t pass = 0; pass < 8 * n; ++pass) {
    bool moved = false;
    for (std::size_t i = 0; i < n; ++i) {
      const Vec2 a = vertices_[i];
      const Vec2 b = vertices_[(i + 1) % n];
      const Vec2 dir = b - a;
      const double len = norm(dir);
      const Vec2 inward = (1.0 / len) * perp(dir);
      const double sd = dot(p - a, inward);
      if (sd < margin) {
        p = p + (margin - sd) * inward;
        moved = true;
      }
    }
    if (!moved) break;
  }
  return p;
}

}  // namespace diffvor
