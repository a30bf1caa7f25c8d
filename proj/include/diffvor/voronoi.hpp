#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "diffvor/autodiff.hpp"
#include "diffvor/delaunay.hpp"
#include "diffvor/geometry.hpp"

namespace diffvor {

// A 2D point whose coordinates live on a tape: a site, a circumcenter, a
// far ghost vertex, or a clipping intersection.
struct DiffPoint {
  VarHandle x;
  VarHandle y;
};

// Provenance tags for diagram vertices: plain values name the circumcenter
// of that triangle id, kGhostTag marks ghost vertices (low bits: border
// edge index), kClipTag marks vertices created by clipping. Tags make the
// combinatorial structure of a build comparable across perturbed rebuilds.
inline constexpr std::uint32_t kClipTag = 0x80000000u;
inline constexpr std::uint32_t kGhostTag = 0x40000000u;

struct VoronoiCell {
  std::uint32_t site = 0;
  std::vector<DiffPoint> vertices;          // CCW around the cell
  std::vector<std::uint32_t> vertex_tags;   // parallel provenance tags
  bool is_unbounded = false;                // vertex list includes ghosts
  VarHandle area;
};

struct VoronoiEdge {
  DiffPoint a;
  DiffPoint b;
  VarHandle length;
  bool is_border_derived = false;   // circumcenter-to-ghost edge
  std::uint32_t site_a = 0;         // dual Delaunay edge
  std::uint32_t site_b = 0;
};

struct VoronoiDiagram {
  std::vector<VoronoiCell> cells;             // one per site
  std::vector<VoronoiEdge> edges;
  std::vector<std::vector<DiffPoint>> point_circumcenters;  // pre-ordering
  // Flat record of every combinatorial decision (vertex ordering, clip
  // branches). Two builds with the same signature differ only numerically.
  std::vector<std::uint32_t> signature;
};

// Numeric copy of a diagram for serialization and rendering.
struct DiagramSnapshot {
  std::vector<Vec2> sites;
  struct Cell {
    std::uint32_t site;
    std::vector<Vec2> vertices;
    std::vector<std::uint32_t> vertex_tags;
    double area;
    bool is_unbounded;
  };
  struct Edge {
    Vec2 a, b;
    double length;
    bool is_border_derived;
  };
  std::vector<Cell> cells;
  std::vector<Edge> edges;
};

// Circumcenter of the triangle (a, b, c), recorded on the tape so
// gradients flow to all six input coordinates. Throws DegeneracyError when
// twice the doubled triangle area |D| falls at or below Tape::kDivEps;
// `sites` labels the error.
DiffPoint circumcenter(Tape& tape, const DiffPoint& a, const DiffPoint& b,
                       const DiffPoint& c,
                       std::array<int, 3> sites = {-1, -1, -1});

// Far vertex closing an unbounded cell: midpoint of (p, q) pushed a
// distance omega along the perpendicular of p - q that points away from
// `outward_ref`.
DiffPoint ghost_point(Tape& tape, const DiffPoint& p, const DiffPoint& q,
                      Vec2 outward_ref, double omega);

// Euclidean distance on tape. Throws DegeneracyError when the endpoints
// coincide within Tape::kDivEps (square-root gradient singularity).
VarHandle edge_length(Tape& tape, const DiffPoint& u, const DiffPoint& v);

// Shoelace area of a CCW polygon, on tape; positive because ordering is
// enforced upstream, so no absolute value is ever recorded.
VarHandle polygon_area(Tape& tape, std::span<const DiffPoint> vertices);
VarHandle cell_area(Tape& tape, const VoronoiCell& cell);

// Assembles the diagram dual to `tri`: one circumcenter per triangle,
// ghost vertices for hull sites, cells ordered CCW around their sites,
// finite edge lengths. `tri` must describe the current numeric values of
// `sites`; an inverted triangle raises StaleTopologyError.
VoronoiDiagram build_diagram(Tape& tape, std::span<const DiffPoint> sites,
                             const Triangulation& tri, double omega);

// Sutherland-Hodgman clip of one cell against a convex window. Boundary
// coordinates enter the tape as constants, so intersection vertices stay
// differentiable functions of the cell's vertices. Throws EmptyCellError
// when nothing remains.
VoronoiCell clip_cell(Tape& tape, const VoronoiCell& cell,
                      const Boundary& boundary,
                      std::vector<std::uint32_t>* signature = nullptr);

// Clips every cell in place and refreshes areas and unbounded flags.
void clip_diagram(Tape& tape, VoronoiDiagram& diagram, const Boundary& boundary);

// 100 x the bounding-box diagonal of the sites.
double default_omega(const SiteSnapshot& snapshot);

DiagramSnapshot snapshot(const Tape& tape, const VoronoiDiagram& diagram,
                         std::span<const DiffPoint> sites);

}  // namespace diffvor
