#pragma once

// Test-side oracles. Each one recomputes a quantity along a route
// independent of the library code it checks: perpendicular-bisector
// circumcenters, gift-wrapping hulls, half-plane cell construction,
// rejection-sampling quadrature, and plain finite differences.

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "diffvor/delaunay.hpp"
#include "diffvor/geometry.hpp"
#include "diffvor/pcg32.hpp"

namespace oracles {

using diffvor::Vec2;

inline std::vector<double> fd_gradient(
    const std::function<double(std::span<const double>)>& f,
    std::span<const double> x, double h = 1e-6) {
  std::vector<double> grad(x.size());
  std::vector<double> probe(x.begin(), x.end());
  for (std::size_t i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + h;
    const double plus = f(probe);
    probe[i] = x[i] - h;
    const double minus = f(probe);
    probe[i] = x[i];
    grad[i] = (plus - minus) / (2.0 * h);
  }
  return grad;
}

// Matches within a relative band, or an absolute band for tiny values.
inline bool close(double a, double b, double rel = 1e-5, double abs_tol = 1e-8) {
  const double diff = std::abs(a - b);
  return diff <= std::max(rel * std::max(std::abs(a), std::abs(b)), abs_tol);
}

// Circumcenter by intersecting two perpendicular bisectors (2x2 solve).
inline Vec2 circumcenter_bisector(Vec2 a, Vec2 b, Vec2 c) {
  const double a11 = b.x - a.x, a12 = b.y - a.y;
  const double a21 = c.x - a.x, a22 = c.y - a.y;
  const double r1 = 0.5 * (dot(b, b) - dot(a, a));
  const double r2 = 0.5 * (dot(c, c) - dot(a, a));
  const double det = a11 * a22 - a12 * a21;
  return {(r1 * a22 - r2 * a12) / det, (a11 * r2 - a21 * r1) / det};
}

inline double polygon_area(std::span<const Vec2> poly) {
  double acc = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2 p = poly[i];
    const Vec2 q = poly[(i + 1) % poly.size()];
    acc += p.x * q.y - q.x * p.y;
  }
  return 0.5 * acc;
}

// Fan decomposition from vertex 0: sum of cross-product triangle areas.
inline double fan_area(std::span<const Vec2> poly) {
  double acc = 0.0;
  for (std::size_t i = 1; i + 1 < poly.size(); ++i) {
    acc += 0.5 * cross(poly[i] - poly[0], poly[i + 1] - poly[0]);
  }
  return acc;
}

// Clip a convex polygon by the half-plane {p : n . p <= c}.
inline std::vector<Vec2> clip_halfplane(std::span<const Vec2> poly, Vec2 n,
                                        double c) {
  std::vector<Vec2> out;
  const std::size_t m = poly.size();
  for (std::size_t i = 0; i < m; ++i) {
    const Vec2 cur = poly[i];
    const Vec2 prev = poly[(i + m - 1) % m];
    const double fc = dot(n, cur) - c;
    const double fp = dot(n, prev) - c;
    if ((fc <= 0.0) != (fp <= 0.0)) {
      const double t = fp / (fp - fc);
      out.push_back(prev + t * (cur - prev));
    }
    if (fc <= 0.0) {
      out.push_back(cur);
    }
  }
  return out;
}

// Voronoi cell of `site` as the boundary polygon cut by the perpendicular
// bisector half-planes against every other site.
inline std::vector<Vec2> halfplane_cell(std::size_t site,
                                        std::span<const Vec2> sites,
                                        std::span<const Vec2> boundary) {
  std::vector<Vec2> cell(boundary.begin(), boundary.end());
  const Vec2 s = sites[site];
  for (std::size_t j = 0; j < sites.size(); ++j) {
    if (j == site || cell.empty()) continue;
    const Vec2 o = sites[j];
    // |p - s|^2 <= |p - o|^2  <=>  2 (o - s) . p <= |o|^2 - |s|^2
    cell = clip_halfplane(cell, 2.0 * (o - s), dot(o, o) - dot(s, s));
  }
  return cell;
}

inline bool point_in_convex(std::span<const Vec2> poly, Vec2 p) {
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2 a = poly[i];
    const Vec2 b = poly[(i + 1) % poly.size()];
    if (cross(b - a, p - a) < 0.0) return false;
  }
  return true;
}

// Monte-Carlo integral of `rho` over a convex polygon by rejection
// sampling in its bounding box.
inline double mc_integral(std::span<const Vec2> poly,
                          const std::function<double(Vec2)>& rho, int samples,
                          std::uint64_t seed) {
  const diffvor::Bbox box = diffvor::bounding_box(poly);
  const Vec2 span = box.hi - box.lo;
  diffvor::Pcg32 rng(seed);
  double acc = 0.0;
  for (int i = 0; i < samples; ++i) {
    const Vec2 p =
        box.lo + Vec2{rng.next_double() * span.x, rng.next_double() * span.y};
    if (point_in_convex(poly, p)) {
      acc += rho(p);
    }
  }
  return acc / samples * (span.x * span.y);
}

// Gift wrapping; returns hull site indices in CCW order starting from the
// lowest-leftmost point. Collinear points on hull edges are skipped.
inline std::vector<std::uint32_t> gift_wrap_hull(std::span<const Vec2> pts) {
  const std::size_t n = pts.size();
  std::size_t start = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (pts[i].y < pts[start].y ||
        (pts[i].y == pts[start].y && pts[i].x < pts[start].x)) {
      start = i;
    }
  }
  std::vector<std::uint32_t> hull;
  std::size_t cur = start;
  do {
    hull.push_back(static_cast<std::uint32_t>(cur));
    std::size_t best = (cur + 1) % n;
    for (std::size_t cand = 0; cand < n; ++cand) {
      if (cand == cur) continue;
      const double turn = cross(pts[best] - pts[cur], pts[cand] - pts[cur]);
      if (turn < 0.0 ||
          (turn == 0.0 && squared_norm(pts[cand] - pts[cur]) >
                              squared_norm(pts[best] - pts[cur]))) {
        best = cand;
      }
    }
    cur = best;
  } while (cur != start && hull.size() <= n);
  return hull;
}

// Largest relative circumcircle violation over all (triangle, site) pairs:
// positive values mean a site sits inside a circumcircle.
inline double max_incircle_violation(const diffvor::Triangulation& tri,
                                     std::span<const Vec2> pts) {
  double worst = -1e300;
  for (const auto& t : tri.triangles) {
    const Vec2 center = circumcenter_bisector(pts[t[0]], pts[t[1]], pts[t[2]]);
    const double radius = distance(center, pts[t[0]]);
    for (std::size_t s = 0; s < pts.size(); ++s) {
      if (s == t[0] || s == t[1] || s == t[2]) continue;
      const double violation = (radius - distance(center, pts[s])) / radius;
      worst = std::max(worst, violation);
    }
  }
  return worst;
}

inline double variance(std::span<const double> xs) {
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double acc = 0.0;
  for (double x : xs) acc += (x - mean) * (x - mean);
  return acc / static_cast<double>(xs.size());
}

inline std::vector<Vec2> random_points(int n, std::uint64_t seed,
                                       double lo = 0.0, double hi = 1.0) {
  diffvor::Pcg32 rng(seed);
  std::vector<Vec2> pts;
  pts.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double x = lo + (hi - lo) * rng.next_double();
    const double y = lo + (hi - lo) * rng.next_double();
    pts.push_back({x, y});
  }
  return pts;
}

}  // namespace oracles
