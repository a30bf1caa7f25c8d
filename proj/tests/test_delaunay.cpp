#include "doctest.h"

#include <algorithm>
#include <set>

#include "diffvor/delaunay.hpp"
#include "oracles.hpp"

using namespace diffvor;

namespace {

SiteSnapshot snap(std::vector<Vec2> pts) { return SiteSnapshot{std::move(pts)}; }

bool has_edge(const Triangulation& tri, std::uint32_t a, std::uint32_t b) {
  return tri.edge_adjacency.count({std::min(a, b), std::max(a, b)}) > 0;
}

}  // namespace

TEST_CASE("single triangle") {
  const Triangulation tri = triangulate(snap({{0, 0}, {1, 0}, {0, 1}}));
  CHECK(tri.triangles.size() == 1);
  CHECK(tri.border_edges.size() == 3);
  CHECK(tri.hull.size() == 3);
  CHECK(border_edges(tri).size() == 3);
  for (const BorderEdge& e : tri.border_edges) {
    // Exactly one adjacent triangle, and the opposite vertex is the one
    // not on the edge.
    CHECK(e.triangle == 0);
    CHECK(e.opposite != e.a);
    CHECK(e.opposite != e.b);
  }
}

TEST_CASE("unit square resolves its cocircular tie to the lowest index") {
  const Triangulation tri =
      triangulate(snap({{0, 0}, {1, 0}, {1, 1}, {0, 1}}));
  REQUIRE(tri.triangles.size() == 2);
  CHECK(tri.border_edges.size() == 4);
  CHECK(tri.hull.size() == 4);
  CHECK(has_edge(tri, 0, 2));   // diagonal through site 0
  CHECK(!has_edge(tri, 1, 3));
}

TEST_CASE("rejects degenerate inputs") {
  CHECK_THROWS_AS(triangulate(snap({{0, 0}, {1, 1}})), ConfigError);
  CHECK_THROWS_AS(triangulate(snap({{0, 0}, {1, 1}, {2, 2}, {3, 3}})),
                  DegeneracyError);
  CHECK_THROWS_AS(triangulate(snap({{0, 0}, {0, 0}, {1, 0}, {0, 1}})),
                  DegeneracyError);
  CHECK_THROWS_AS(
      triangulate(snap({{0, 0}, {1e-15, 1e-15}, {1, 0}, {0, 1}})),
      DegeneracyError);
}

TEST_CASE("random sets satisfy the empty-circumcircle property") {
  for (std::uint64_t seed : {42ull, 7ull, 123ull}) {
    const std::vector<Vec2> pts = oracles::random_points(100, seed);
    const Triangulation tri = triangulate(snap(pts));
    CAPTURE(seed);
    CHECK(oracles::max_incircle_violation(tri, pts) <= 1e-9);

    // Euler relation for planar triangulations of the hull interior.
    CHECK(tri.triangles.size() == 2 * pts.size() - tri.hull.size() - 2);
    CHECK(tri.border_edges.size() == tri.hull.size());
  }
}

TEST_CASE("hull agrees with gift wrapping") {
  for (std::uint64_t seed : {42ull, 9ull, 77ull}) {
    const std::vector<Vec2> pts = oracles::random_points(100, seed);
    const Triangulation tri = triangulate(snap(pts));
    const std::vector<std::uint32_t> expected = oracles::gift_wrap_hull(pts);
    REQUIRE(tri.hull.size() == expected.size());
    // Same cyclic order; align on the first element.
    const auto pivot =
        std::find(tri.hull.begin(), tri.hull.end(), expected.front());
    REQUIRE(pivot != tri.hull.end());
    std::vector<std::uint32_t> rotated(pivot, tri.hull.end());
    rotated.insert(rotated.end(), tri.hull.begin(), pivot);
    CHECK(rotated == expected);
  }
}

TEST_CASE("all points in convex position have N border edges") {
  std::vector<Vec2> pts;
  for (int k = 0; k < 12; ++k) {
    const double a = 2.0 * 3.14159265358979323846 * k / 12.0;
    pts.push_back({std::cos(a), 0.7 * std::sin(a)});  // ellipse: no cocircular mass
  }
  const Triangulation tri = triangulate(snap(pts));
  CHECK(tri.border_edges.size() == pts.size());
  CHECK(tri.hull.size() == pts.size());
}

TEST_CASE("fan around an interior site of the 5-point cross") {
  const std::vector<Vec2> pts = {{0, 0}, {1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  const Triangulation tri = triangulate(snap(pts));
  CHECK_FALSE(tri.on_hull[0]);
  const std::vector<std::uint32_t> fan = triangles_adjacent_to_site(tri, 0);
  REQUIRE(fan.size() == 4);
  // Closed fan: consecutive triangles (cyclically) share an edge through
  // the site.
  for (std::size_t i = 0; i < fan.size(); ++i) {
    const auto& t0 = tri.triangles[fan[i]];
    const auto& t1 = tri.triangles[fan[(i + 1) % fan.size()]];
    std::set<std::uint32_t> shared;
    for (std::uint32_t a : t0) {
      for (std::uint32_t b : t1) {
        if (a == b) shared.insert(a);
      }
    }
    CHECK(shared.size() == 2);
    CHECK(shared.count(0) == 1);
  }
}

TEST_CASE("hull sites have open fans whose ends own border edges") {
  const std::vector<Vec2> pts = oracles::random_points(40, 5);
  const Triangulation tri = triangulate(snap(pts));
  for (std::uint32_t h : tri.hull) {
    const std::vector<std::uint32_t> fan = triangles_adjacent_to_site(tri, h);
    REQUIRE(!fan.empty());
    std::set<std::uint32_t> border_tris;
    for (const BorderEdge& e : tri.border_edges) {
      if (e.a == h || e.b == h) border_tris.insert(e.triangle);
    }
    CHECK(border_tris.count(fan.front()) == 1);
    CHECK(border_tris.count(fan.back()) == 1);
  }
}

TEST_CASE("interior fans are closed chains on random input") {
  const std::vector<Vec2> pts = oracles::random_points(60, 11);
  const Triangulation tri = triangulate(snap(pts));
  for (std::uint32_t s = 0; s < pts.size(); ++s) {
    if (tri.on_hull[s]) continue;
    const std::vector<std::uint32_t> fan = triangles_adjacent_to_site(tri, s);
    CHECK(fan.size() == tri.site_triangles[s].size());
    for (std::size_t i = 0; i + 1 < fan.size(); ++i) {
      std::set<std::uint32_t> shared;
      for (std::uint32_t a : tri.triangles[fan[i]]) {
        for (std::uint32_t b : tri.triangles[fan[i + 1]]) {
          if (a == b) shared.insert(a);
        }
      }
      CHECK(shared.size() == 2);   // adjacent through an edge
      CHECK(shared.count(s) == 1); // and that edge passes through the site
    }
  }
}

TEST_CASE("triangulation is deterministic") {
  const std::vector<Vec2> pts = oracles::random_points(80, 31);
  const Triangulation a = triangulate(snap(pts));
  const Triangulation b = triangulate(snap(pts));
  CHECK(a.triangles == b.triangles);
  CHECK(a.hull == b.hull);
}
