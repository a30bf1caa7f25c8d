#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "diffvor/geometry.hpp"

namespace diffvor {

// Plain numeric snapshot of the site positions.
struct SiteSnapshot {
  std::vector<Vec2> coords;
  std::size_t size() const noexcept { return coords.size(); }
};

// One convex-hull edge of the triangulation, directed (a -> b) so the
// triangulated interior lies on its left. `opposite` is the third vertex
// of its unique triangle, used downstream to orient outward rays away
// from the interior.
struct BorderEdge {
  std::uint32_t a = 0;
  std::uint32_t b = 0;
  std::uint32_t opposite = 0;
  std::uint32_t triangle = 0;
};

// Combinatorial result of Delaunay triangulation. Purely an adjacency
// structure: triangles are CCW index triples under the snapshot that
// produced them and no coordinate is stored here.
struct Triangulation {
  std::size_t site_count = 0;
  std::vector<std::array<std::uint32_t, 3>> triangles;
  // Undirected edge (lo, hi) -> adjacent triangle ids; second is -1 for
  // border edges.
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::pair<int, int>>
      edge_adjacency;
  std::vector<std::uint32_t> hull;  // CCW ordered site indices
  std::vector<BorderEdge> border_edges;
  std::vector<std::vector<std::uint32_t>> site_triangles;  // ascending ids
  std::vector<bool> on_hull;
};

// Bowyer-Watson Delaunay triangulation. Deterministic for a fixed
// snapshot; cocircular quads resolve to the diagonal incident to the
// lowest site index. Throws ConfigError for fewer than three sites or
// non-finite coordinates, DegeneracyError for duplicate points (closer
// than 1e-12 x bbox diagonal) and all-collinear input.
Triangulation triangulate(const SiteSnapshot& snapshot);

// Hull edges with their unique adjacent triangle and its opposite vertex.
const std::vector<BorderEdge>& border_edges(const Triangulation& tri);

// Triangles incident to `site`, in CCW fan order around it: consecutive
// entries share an edge through the site. For hull sites the fan is open
// and starts at the clockwise-most border triangle.
std::vector<std::uint32_t> triangles_adjacent_to_site(const Triangulation& tri,
                                                      std::uint32_t site);

}  // namespace diffvor
