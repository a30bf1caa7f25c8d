#include "diffvor/voronoi.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace diffvor {

namespace {

Vec2 value_of(const Tape& tape, const DiffPoint& p) {
  return {tape.value(p.x), tape.value(p.y)};
}

}  // namespace

DiffPoint circumcenter(Tape& tape, const DiffPoint& a, const DiffPoint& b,
                       const DiffPoint& c, std::array<int, 3> sites) {
  const Vec2 av = value_of(tape, a);
  const Vec2 bv = value_of(tape, b);
  const Vec2 cv = value_of(tape, c);
  const double d_num =
      2.0 * ((av.x - cv.x) * (bv.y - cv.y) - (bv.x - cv.x) * (av.y - cv.y));
  if (std::abs(d_num) <= Tape::kDivEps) {
    throw DegeneracyError("degenerate triangle: sites nearly collinear",
                          {sites[0], sites[1], sites[2]});
  }

  const Expr a1{tape, a.x}, a2{tape, a.y};
  const Expr b1{tape, b.x}, b2{tape, b.y};
  const Expr c1{tape, c.x}, c2{tape, c.y};

  const Expr alpha = square(a1) - square(c1) + square(a2) - square(c2);
  const Expr beta = square(b1) - square(c1) + square(b2) - square(c2);
  const Expr d = 2.0 * ((a1 - c1) * (b2 - c2) - (b1 - c1) * (a2 - c2));
  const Expr v1 = (alpha * (b2 - c2) - beta * (a2 - c2)) / d;
  const Expr v2 = (beta * (a1 - c1) - alpha * (b1 - c1)) / d;
  return {v1.handle(), v2.handle()};
}

DiffPoint ghost_point(Tape& tape, const DiffPoint& p, const DiffPoint& q,
                      Vec2 outward_ref, double omega) {
  if (!(omega > 0.0)) {
    throw ConfigError("ghost distance omega must be positive");
  }
  const Vec2 pv = value_of(tape, p);
  const Vec2 qv = value_of(tape, q);
  const Vec2 diff = pv - qv;
  if (norm(diff) <= Tape::kDivEps) {
    throw DegeneracyError("ghost point on a zero-length edge");
  }
  const Vec2 mid = 0.5 * (pv + qv);
  // Of the two perpendiculars of p - q, keep the one pointing away from
  // the reference vertex. The branch is combinatorial; only the chosen
  // expression is recorded.
  const double side = dot(perp(diff), outward_ref - mid);
  if (side == 0.0) {
    throw DegeneracyError("ghost direction undefined: reference on edge line");
  }
  const bool use_ccw_perp = side < 0.0;

  const Expr px{tape, p.x}, py{tape, p.y};
  const Expr qx{tape, q.x}, qy{tape, q.y};
  const Expr dx = px - qx;
  const Expr dy = py - qy;
  const Expr dir_x = use_ccw_perp ? -1.0 * dy : dy;
  const Expr dir_y = use_ccw_perp ? dx : -1.0 * dx;
  const Expr length = sqrt(square(dx) + square(dy));
  const Expr gx = 0.5 * (px + qx) + omega * (dir_x / length);
  const Expr gy = 0.5 * (py + qy) + omega * (dir_y / length);
  return {gx.handle(), gy.handle()};
}

VarHandle edge_length(Tape& tape, const DiffPoint& u, const DiffPoint& v) {
  const Vec2 uv = value_of(tape, u);
  const Vec2 vv = value_of(tape, v);
  if (distance(uv, vv) <= Tape::kDivEps) {
    throw DegeneracyError("edge endpoints coincide");
  }
  const Expr ux{tape, u.x}, uy{tape, u.y};
  const Expr vx{tape, v.x}, vy{tape, v.y};
  return sqrt(square(ux - vx) + square(uy - vy)).handle();
}

VarHandle polygon_area(Tape& tape, std::span<const DiffPoint> vertices) {
  const std::size_t n = vertices.size();
  if (n < 3) {
    throw DegeneracyError("polygon area needs at least 3 vertices");
  }
  Expr twice = Expr::constant(tape, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const DiffPoint& a = vertices[i];
    const DiffPoint& b = vertices[(i + 1) % n];
    const Expr xa{tape, a.x}, ya{tape, a.y};
    const Expr xb{tape, b.x}, yb{tape, b.y};
    twice = twice + (xa * yb - xb * ya);
  }
  return (0.5 * twice).handle();
}

VarHandle cell_area(Tape& tape, const VoronoiCell& cell) {
  return polygon_area(tape, cell.vertices);
}

double default_omega(const SiteSnapshot& snapshot) {
  const double diag = bounding_box(snapshot.coords).diagonal();
  if (!(diag > 0.0)) {
    throw ConfigError("cannot derive omega from degenerate sites");
  }
  return 100.0 * diag;
}

VoronoiDiagram build_diagram(Tape& tape, std::span<const DiffPoint> sites,
                             const Triangulation& tri, double omega) {
  if (sites.size() != tri.site_count) {
    throw ConfigError("triangulation does not match the site list");
  }
  if (!(omega > 0.0)) {
    throw ConfigError("omega must be positive");
  }
  const std::size_t n_tris = tri.triangles.size();

  std::vector<Vec2> coords(sites.size());
  for (std::size_t i = 0; i < sites.size(); ++i) {
    coords[i] = value_of(tape, sites[i]);
  }

  // One circumcenter per triangle. A sign flip of the doubled area means
  // the cached topology no longer matches the coordinates.
  std::vector<DiffPoint> centers;
  centers.reserve(n_tris);
  for (std::size_t t = 0; t < n_tris; ++t) {
    const auto [i, j, k] = tri.triangles[t];
    const double d_num = 2.0 * ((coords[i].x - coords[k].x) *
                                    (coords[j].y - coords[k].y) -
                                (coords[j].x - coords[k].x) *
                                    (coords[i].y - coords[k].y));
    if (d_num < -Tape::kDivEps) {
      throw StaleTopologyError(
          "triangle " + std::to_string(t) + " inverted under current sites",
          static_cast<int>(t));
    }
    centers.push_back(circumcenter(
        tape, sites[i], sites[j], sites[k],
        {static_cast<int>(i), static_cast<int>(j), static_cast<int>(k)}));
  }

  // One ghost vertex per border edge, shared by its two hull sites.
  std::vector<DiffPoint> ghosts;
  ghosts.reserve(tri.border_edges.size());
  std::vector<std::vector<std::uint32_t>> site_ghost_edges(sites.size());
  for (std::size_t k = 0; k < tri.border_edges.size(); ++k) {
    const BorderEdge& e = tri.border_edges[k];
    ghosts.push_back(ghost_point(tape, sites[e.a], sites[e.b],
                                 coords[e.opposite], omega));
    site_ghost_edges[e.a].push_back(static_cast<std::uint32_t>(k));
    site_ghost_edges[e.b].push_back(static_cast<std::uint32_t>(k));
  }

  VoronoiDiagram diagram;
  diagram.point_circumcenters.resize(sites.size());
  diagram.cells.reserve(sites.size());

  for (std::size_t i = 0; i < sites.size(); ++i) {
    auto& pre = diagram.point_circumcenters[i];
    std::vector<std::uint32_t> tags;
    for (std::uint32_t k : site_ghost_edges[i]) {
      pre.push_back(ghosts[k]);
      tags.push_back(kGhostTag | k);
    }
    for (std::uint32_t t :
         triangles_adjacent_to_site(tri, static_cast<std::uint32_t>(i))) {
      pre.push_back(centers[t]);
      tags.push_back(t);
    }

    // CCW by angle around the site's current position. The comparator only
    // reads numeric values; the handles themselves stay differentiable.
    const Vec2 site = coords[i];
    std::vector<std::size_t> order(pre.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<double> angle(pre.size());
    for (std::size_t v = 0; v < pre.size(); ++v) {
      const Vec2 pv = value_of(tape, pre[v]) - site;
      angle[v] = std::atan2(pv.y, pv.x);
    }
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) {
                       return angle[a] < angle[b];
                     });

    VoronoiCell cell;
    cell.site = static_cast<std::uint32_t>(i);
    cell.is_unbounded = tri.on_hull[i];
    for (std::size_t v : order) {
      if (!cell.vertices.empty()) {
        const Vec2 prev = value_of(tape, cell.vertices.back());
        if (distance(prev, value_of(tape, pre[v])) <= Tape::kDivEps) continue;
      }
      cell.vertices.push_back(pre[v]);
      cell.vertex_tags.push_back(tags[v]);
    }
    if (cell.vertices.size() > 1 &&
        distance(value_of(tape, cell.vertices.front()),
                 value_of(tape, cell.vertices.back())) <= Tape::kDivEps) {
      cell.vertices.pop_back();
      cell.vertex_tags.pop_back();
    }
    if (cell.vertices.size() < 3) {
      throw DegeneracyError(
          "cell of site " + std::to_string(i) + " collapsed",
          {static_cast<int>(i)});
    }
    std::vector<Vec2> poly(cell.vertices.size());
    for (std::size_t v = 0; v < poly.size(); ++v) {
      poly[v] = value_of(tape, cell.vertices[v]);
    }
    if (polygon_signed_area(poly) <= 0.0) {
      throw DegeneracyError(
          "cell of site " + std::to_string(i) + " is not positively oriented",
          {static_cast<int>(i)});
    }
    cell.area = polygon_area(tape, cell.vertices);
    diagram.cells.push_back(std::move(cell));
  }

  // Finite edges: one per Delaunay edge. Interior edges connect the two
  // flanking circumcenters; border edges connect the single circumcenter
  // with the border edge's ghost. Zero-length pairs (cocircular quads)
  // carry no edge.
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> ghost_of;
  for (std::size_t k = 0; k < tri.border_edges.size(); ++k) {
    const BorderEdge& e = tri.border_edges[k];
    ghost_of[{std::min(e.a, e.b), std::max(e.a, e.b)}] =
        static_cast<std::uint32_t>(k);
  }
  for (const auto& [key, ref] : tri.edge_adjacency) {
    DiffPoint u, v;
    bool border;
    if (ref.second >= 0) {
      u = centers[ref.first];
      v = centers[ref.second];
      border = false;
    } else {
      u = centers[ref.first];
      v = ghosts[ghost_of.at(key)];
      border = true;
    }
    if (distance(value_of(tape, u), value_of(tape, v)) <= Tape::kDivEps) {
      continue;
    }
    diagram.edges.push_back(VoronoiEdge{
        u, v, edge_length(tape, u, v), border, key.first, key.second});
  }

  for (const VoronoiCell& cell : diagram.cells) {
    diagram.signature.push_back(cell.site);
    diagram.signature.push_back(static_cast<std::uint32_t>(cell.vertices.size()));
    diagram.signature.insert(diagram.signature.end(), cell.vertex_tags.begin(),
                             cell.vertex_tags.end());
  }
  return diagram;
}

VoronoiCell clip_cell(Tape& tape, const VoronoiCell& cell,
                      const Boundary& boundary,
                      std::vector<std::uint32_t>* signature) {
  struct TaggedPoint {
    DiffPoint p;
    std::uint32_t tag;
  };
  std::vector<TaggedPoint> poly;
  poly.reserve(cell.vertices.size());
  for (std::size_t i = 0; i < cell.vertices.size(); ++i) {
    poly.push_back({cell.vertices[i], cell.vertex_tags[i]});
  }

  const auto& window = boundary.vertices();
  for (std::size_t e = 0; e < window.size(); ++e) {
    const Vec2 c1 = window[e];
    const Vec2 c2 = window[(e + 1) % window.size()];
    const Vec2 d = c2 - c1;
    const double offset = cross(d, c1);  // f(v) = cross(d, v) - offset

    std::vector<double> f(poly.size());
    for (std::size_t i = 0; i < poly.size(); ++i) {
      const Vec2 v = value_of(tape, poly[i].p);
      f[i] = cross(d, v) - offset;
    }
    if (signature != nullptr) {
      signature->push_back(kClipTag | cell.site);
      signature->push_back(static_cast<std::uint32_t>(poly.size()));
      std::uint32_t word = 0;
      for (std::size_t i = 0; i < poly.size(); ++i) {
        if (f[i] >= 0.0) word |= 1u << (i % 32u);
        if (i % 32u == 31u || i + 1 == poly.size()) {
          signature->push_back(word);
          word = 0;
        }
      }
    }

    const auto intersect = [&](std::size_t from, std::size_t to,
                               std::uint32_t out_index) -> TaggedPoint {
      // Point on segment from->to where f vanishes; f is affine in the
      // endpoints, so t = f_from / (f_from - f_to) is well-conditioned at
      // a strict inside/outside transition.
      const Expr sx{tape, poly[from].p.x}, sy{tape, poly[from].p.y};
      const Expr ex{tape, poly[to].p.x}, ey{tape, poly[to].p.y};
      const Expr fs = d.x * sy - d.y * sx - offset;
      const Expr fe = d.x * ey - d.y * ex - offset;
      const Expr t = fs / (fs - fe);
      const Expr ix = sx + t * (ex - sx);
      const Expr iy = sy + t * (ey - sy);
      const std::uint32_t tag =
          kClipTag | (static_cast<std::uint32_t>(e) << 16) | out_index;
      return {{ix.handle(), iy.handle()}, tag};
    };

    std::vector<TaggedPoint> out;
    out.reserve(poly.size() + 2);
    for (std::size_t i = 0; i < poly.size(); ++i) {
      const std::size_t prev = (i + poly.size() - 1) % poly.size();
      const bool cur_in = f[i] >= 0.0;    // on the window edge counts inside
      const bool prev_in = f[prev] >= 0.0;
      if (cur_in != prev_in) {
        out.push_back(
            intersect(prev, i, static_cast<std::uint32_t>(out.size())));
      }
      if (cur_in) {
        out.push_back(poly[i]);
      }
    }
    poly = std::move(out);
    if (poly.empty()) {
      throw EmptyCellError("cell of site " + std::to_string(cell.site) +
                           " lies outside the boundary");
    }
  }

  // Collapse coincident consecutive vertices (a vertex exactly on the
  // window produces its own intersection copy).
  std::vector<TaggedPoint> cleaned;
  cleaned.reserve(poly.size());
  for (const TaggedPoint& tp : poly) {
    if (!cleaned.empty() &&
        distance(value_of(tape, cleaned.back().p), value_of(tape, tp.p)) <=
            Tape::kDivEps) {
      continue;
    }
    cleaned.push_back(tp);
  }
  while (cleaned.size() > 1 &&
         distance(value_of(tape, cleaned.front().p),
                  value_of(tape, cleaned.back().p)) <= Tape::kDivEps) {
    cleaned.pop_back();
  }
  if (cleaned.size() < 3) {
    throw EmptyCellError("cell of site " + std::to_string(cell.site) +
                         " degenerated to a sliver while clipping");
  }

  VoronoiCell result;
  result.site = cell.site;
  for (const TaggedPoint& tp : cleaned) {
    result.vertices.push_back(tp.p);
    result.vertex_tags.push_back(tp.tag);
  }
  result.is_unbounded = false;
  for (std::uint32_t tag : result.vertex_tags) {
    if ((tag & kClipTag) == 0 && (tag & kGhostTag) != 0) {
      result.is_unbounded = true;  // a ghost vertex survived the clip
    }
  }
  std::vector<Vec2> values(result.vertices.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    values[i] = value_of(tape, result.vertices[i]);
  }
  if (polygon_signed_area(values) <= 0.0) {
    throw DegeneracyError("clipped cell of site " + std::to_string(cell.site) +
                              " is not positively oriented",
                          {static_cast<int>(cell.site)});
  }
  result.area = polygon_area(tape, result.vertices);
  return result;
}

void clip_diagram(Tape& tape, VoronoiDiagram& diagram,
                  const Boundary& boundary) {
  for (VoronoiCell& cell : diagram.cells) {
    cell = clip_cell(tape, cell, boundary, &diagram.signature);
  }
}

DiagramSnapshot snapshot(const Tape& tape, const VoronoiDiagram& diagram,
                         std::span<const DiffPoint> sites) {
  DiagramSnapshot snap;
  snap.sites.reserve(sites.size());
  for (const DiffPoint& s : sites) {
    snap.sites.push_back(value_of(tape, s));
  }
  snap.cells.reserve(diagram.cells.size());
  for (const VoronoiCell& cell : diagram.cells) {
    DiagramSnapshot::Cell c;
    c.site = cell.site;
    c.vertex_tags = cell.vertex_tags;
    c.area = tape.value(cell.area);
    c.is_unbounded = cell.is_unbounded;
    for (const DiffPoint& v : cell.vertices) {
      c.vertices.push_back(value_of(tape, v));
    }
    snap.cells.push_back(std::move(c));
  }
  snap.edges.reserve(diagram.edges.size());
  for (const VoronoiEdge& e : diagram.edges) {
    snap.edges.push_back(DiagramSnapshot::Edge{value_of(tape, e.a),
                                               value_of(tape, e.b),
                                               tape.value(e.length),
                                               e.is_border_derived});
  }
  return snap;
}

}  // namespace diffvor
