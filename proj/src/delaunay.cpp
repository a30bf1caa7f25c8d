#include "diffvor/delaunay.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <unordered_map>

namespace diffvor {

namespace {

constexpr double kPredEpsBase = 1e-12;
constexpr double kDupEpsBase = 1e-12;
// Distance of the enclosing triangle's vertices from the bbox center, in
// units of the bbox diagonal. Far enough that direction-based predicates
// are accurate, close enough that determinants keep plenty of precision.
constexpr double kSuperScale = 16384.0;

double orient2d(Vec2 a, Vec2 b, Vec2 c) { return cross(b - a, c - a); }

// d against the circumcircle of CCW (a, b, c): positive inside.
double incircle_det(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
  const double adx = a.x - d.x, ady = a.y - d.y;
  const double bdx = b.x - d.x, bdy = b.y - d.y;
  const double cdx = c.x - d.x, cdy = c.y - d.y;
  const double ad = adx * adx + ady * ady;
  const double bd = bdx * bdx + bdy * bdy;
  const double cd = cdx * cdx + cdy * cdy;
  return adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) +
         ad * (bdx * cdy - bdy * cdx);
}

struct BwTri {
  std::array<std::uint32_t, 3> v;
  std::array<int, 3> nbr;  // across the edge opposite v[k]; -1 outside
  bool alive = true;
};

using EdgeKey = std::pair<std::uint32_t, std::uint32_t>;

EdgeKey edge_key(std::uint32_t a, std::uint32_t b) {
  return a < b ? EdgeKey{a, b} : EdgeKey{b, a};
}

class Builder {
 public:
  explicit Builder(const SiteSnapshot& snapshot) : n_(snapshot.size()) {
    if (n_ < 3) {
      throw ConfigError("triangulation needs at least 3 sites, got " +
                        std::to_string(n_));
    }
    points_.reserve(n_ + 3);
    for (Vec2 p : snapshot.coords) {
      if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
        throw ConfigError("site coordinates must be finite");
      }
      points_.push_back(p);
    }
    const Bbox box = bounding_box(points_);
    scale_ = std::max(box.diagonal(), 1e-100);
    orient_band_ = kPredEpsBase * scale_ * scale_;
    incircle_band_ = kPredEpsBase * scale_ * scale_ * scale_ * scale_;
    dup_eps_ = kDupEpsBase * scale_;
    super_center_ = box.center();
    const double r = kSuperScale * scale_;
    for (int k = 0; k < 3; ++k) {
      const double angle = (0.25 + k / 3.0) * 2.0 * 3.14159265358979323846;
      super_dir_[k] = {std::cos(angle), std::sin(angle)};
      points_.push_back(super_center_ + r * super_dir_[k]);
    }
  }

  Triangulation run() {
    reject_duplicates();
    insert_all();
    collect_real_triangles();
    if (raw_.empty()) {
      throw DegeneracyError("sites are collinear; no triangulation exists");
    }
    canonicalize_cocircular();
    renumber();
    Triangulation out;
    out.site_count = n_;
    out.triangles = raw_;
    build_adjacency(out);
    build_border_and_hull(out);
    build_incidence(out);
    return out;
  }

 private:
  Vec2 pt(std::uint32_t i) const { return points_[i]; }
  bool is_super(std::uint32_t i) const { return i >= n_; }

  void reject_duplicates() const {
    std::vector<std::uint32_t> order(n_);
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
      const Vec2 pa = points_[a], pb = points_[b];
      if (pa.x != pb.x) return pa.x < pb.x;
      if (pa.y != pb.y) return pa.y < pb.y;
      return a < b;
    });
    for (std::size_t i = 0; i < order.size(); ++i) {
      for (std::size_t j = i + 1; j < order.size(); ++j) {
        const Vec2 a = points_[order[i]], b = points_[order[j]];
        if (b.x - a.x > dup_eps_) break;
        if (distance(a, b) <= dup_eps_) {
          throw DegeneracyError(
              "duplicate sites " + std::to_string(order[i]) + " and " +
                  std::to_string(order[j]),
              {static_cast<int>(order[i]), static_cast<int>(order[j])});
        }
      }
    }
  }

  // Circumcircle membership with the enclosing triangle's vertices treated
  // as points at infinity: their circles degenerate to half-planes.
  bool circum_contains(const BwTri& t, Vec2 p) const {
    std::array<std::uint32_t, 3> v = t.v;
    int supers = 0;
    for (std::uint32_t vi : v) supers += is_super(vi) ? 1 : 0;
    if (supers == 0) {
      return incircle_det(pt(v[0]), pt(v[1]), pt(v[2]), p) > incircle_band_;
    }
    if (supers == 3) return true;
    if (supers == 1) {
      while (!is_super(v[2])) v = {v[1], v[2], v[0]};
      const Vec2 a = pt(v[0]), b = pt(v[1]);
      const double o = orient2d(a, b, p);
      if (o > orient_band_) return true;
      if (o < -orient_band_) return false;
      // On the supporting line: inside iff strictly between a and b.
      const double along = dot(p - a, b - a);
      return along > orient_band_ && along < squared_norm(b - a) - orient_band_;
    }
    // supers == 2: half-plane through the real vertex, outward normal along
    // the bisector of the two infinite directions.
    while (is_super(v[0])) v = {v[1], v[2], v[0]};
    const Vec2 w = super_dir_[v[1] - n_] + super_dir_[v[2] - n_];
    return dot(p - pt(v[0]), w) > 0.0;
  }

  int locate_scan(Vec2 p) const {
    for (std::size_t t = 0; t < tris_.size(); ++t) {
      if (!tris_[t].alive) continue;
      bool inside = true;
      for (int k = 0; k < 3 && inside; ++k) {
        const Vec2 u = pt(tris_[t].v[(k + 1) % 3]);
        const Vec2 w = pt(tris_[t].v[(k + 2) % 3]);
        inside = orient2d(u, w, p) >= -orient_band_;
      }
      if (inside) return static_cast<int>(t);
    }
    throw DegeneracyError("point location failed");
  }

  int locate(Vec2 p, int hint) const {
    int t = (hint >= 0 && tris_[hint].alive) ? hint : -1;
    if (t < 0) return locate_scan(p);
    const int limit = 4 * static_cast<int>(tris_.size()) + 64;
    for (int guard = 0; guard < limit; ++guard) {
      const BwTri& tr = tris_[t];
      int next = -1;
      for (int k = 0; k < 3; ++k) {
        const Vec2 u = pt(tr.v[(k + 1) % 3]);
        const Vec2 w = pt(tr.v[(k + 2) % 3]);
        if (orient2d(u, w, p) < -orient_band_) {
          next = tr.nbr[k];
          break;
        }
      }
      if (next == -1) return t;
      t = next;
    }
    return locate_scan(p);
  }

  void insert_all() {
    std::vector<std::uint32_t> order(n_);
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
      const Vec2 pa = points_[a], pb = points_[b];
      if (pa.x != pb.x) return pa.x < pb.x;
      if (pa.y != pb.y) return pa.y < pb.y;
      return a < b;
    });
    tris_.clear();
    tris_.push_back(BwTri{{static_cast<std::uint32_t>(n_),
                           static_cast<std::uint32_t>(n_ + 1),
                           static_cast<std::uint32_t>(n_ + 2)},
                          {-1, -1, -1},
                          true});
    bad_mark_.assign(1, false);
    int hint = 0;
    for (std::uint32_t idx : order) {
      hint = insert_point(idx, hint);
    }
  }

  int insert_point(std::uint32_t idx, int hint) {
    const Vec2 p = pt(idx);
    const int seed = locate(p, hint);

    // Grow the cavity: connected set of triangles whose circumcircle
    // contains p.
    std::vector<int> bad;
    bad_mark_.assign(tris_.size(), false);
    bad.push_back(seed);
    bad_mark_[seed] = true;
    for (std::size_t head = 0; head < bad.size(); ++head) {
      const BwTri& t = tris_[bad[head]];
      for (int k = 0; k < 3; ++k) {
        const int nb = t.nbr[k];
        if (nb < 0 || bad_mark_[nb] || !tris_[nb].alive) continue;
        if (circum_contains(tris_[nb], p)) {
          bad_mark_[nb] = true;
          bad.push_back(nb);
        }
      }
    }

    struct CavityEdge {
      std::uint32_t u, w;
      int outside;
    };
    std::vector<CavityEdge> boundary;
    const auto collect_boundary = [&] {
      boundary.clear();
      for (int bt : bad) {
        const BwTri& t = tris_[bt];
        for (int k = 0; k < 3; ++k) {
          const int nb = t.nbr[k];
          if (nb >= 0 && bad_mark_[nb]) continue;
          boundary.push_back({t.v[(k + 1) % 3], t.v[(k + 2) % 3], nb});
        }
      }
    };
    collect_boundary();

    // The cavity must be star-shaped around p; if a rim edge faces the
    // wrong way, absorb the triangle behind it and retry.
    for (std::size_t guard = 0; guard <= tris_.size(); ++guard) {
      bool bad_rim = false;
      for (const CavityEdge& e : boundary) {
        if (orient2d(pt(e.u), pt(e.w), p) > orient_band_) continue;
        bad_rim = true;
        if (e.outside < 0 || bad_mark_[e.outside]) {
          throw DegeneracyError("cavity repair failed at site " +
                                    std::to_string(idx),
                                {static_cast<int>(idx)});
        }
        bad_mark_[e.outside] = true;
        bad.push_back(e.outside);
        break;
      }
      if (!bad_rim) break;
      collect_boundary();
    }

    for (int bt : bad) tris_[bt].alive = false;

    std::unordered_map<std::uint32_t, int> by_first, by_second;
    by_first.reserve(boundary.size());
    by_second.reserve(boundary.size());
    std::vector<int> created;
    created.reserve(boundary.size());
    for (const CavityEdge& e : boundary) {
      const int id = static_cast<int>(tris_.size());
      tris_.push_back(BwTri{{idx, e.u, e.w}, {e.outside, -1, -1}, true});
      bad_mark_.push_back(false);
      if (e.outside >= 0) {
        BwTri& out = tris_[e.outside];
        for (int k = 0; k < 3; ++k) {
          const std::uint32_t a = out.v[(k + 1) % 3];
          const std::uint32_t b = out.v[(k + 2) % 3];
          if ((a == e.u && b == e.w) || (a == e.w && b == e.u)) {
            out.nbr[k] = id;
            break;
          }
        }
      }
      by_first[e.u] = id;
      by_second[e.w] = id;
      created.push_back(id);
    }
    for (int id : created) {
      BwTri& t = tris_[id];
      // v = (p, u, w): edge (w, p) opposite u; edge (p, u) opposite w.
      const auto f = by_first.find(t.v[2]);
      const auto s = by_second.find(t.v[1]);
      if (f == by_first.end() || s == by_second.end()) {
        throw DegeneracyError("cavity rim is not a single loop at site " +
                                  std::to_string(idx),
                              {static_cast<int>(idx)});
      }
      t.nbr[1] = f->second;
      t.nbr[2] = s->second;
    }
    return created.empty() ? locate_scan(p) : created.back();
  }

  void collect_real_triangles() {
    raw_.clear();
    for (const BwTri& t : tris_) {
      if (!t.alive) continue;
      if (is_super(t.v[0]) || is_super(t.v[1]) || is_super(t.v[2])) continue;
      raw_.push_back(t.v);
    }
  }

  struct EdgeRef {
    int t0 = -1, t1 = -1;
  };

  std::map<EdgeKey, EdgeRef> edge_map() const {
    std::map<EdgeKey, EdgeRef> emap;
    for (std::size_t t = 0; t < raw_.size(); ++t) {
      for (int k = 0; k < 3; ++k) {
        EdgeRef& ref = emap[edge_key(raw_[t][k], raw_[t][(k + 1) % 3])];
        (ref.t0 < 0 ? ref.t0 : ref.t1) = static_cast<int>(t);
      }
    }
    return emap;
  }

  // Lawson sweeps: repair any circumcircle violation left near the hull
  // and settle exact cocircular quads on the diagonal incident to the
  // lowest site index.
  void canonicalize_cocircular() {
    auto emap = edge_map();
    const auto replace_ref = [&](EdgeKey key, int from, int to) {
      EdgeRef& ref = emap.at(key);
      if (ref.t0 == from) {
        ref.t0 = to;
      } else {
        ref.t1 = to;
      }
    };
    for (int sweep = 0; sweep < 64; ++sweep) {
      int flips = 0;
      std::vector<EdgeKey> keys;
      keys.reserve(emap.size());
      for (const auto& [key, ref] : emap) {
        if (ref.t1 >= 0) keys.push_back(key);
      }
      for (const EdgeKey& key : keys) {
        const auto it = emap.find(key);
        if (it == emap.end() || it->second.t1 < 0) continue;
        const int t0 = it->second.t0, t1 = it->second.t1;
        std::uint32_t a = key.first, b = key.second;
        // Direct (a, b) as it appears in t0.
        int ka = 0;
        while (raw_[t0][ka] != a) ++ka;
        if (raw_[t0][(ka + 1) % 3] != b) std::swap(a, b);
        const std::uint32_t c = third_vertex(t0, a, b);
        const std::uint32_t d = third_vertex(t1, a, b);
        const double det = incircle_det(pt(a), pt(b), pt(c), pt(d));
        bool flip = false;
        if (det > incircle_band_) {
          flip = true;
        } else if (det >= -incircle_band_) {
          const std::uint32_t lowest = std::min({a, b, c, d});
          flip = (lowest == c || lowest == d);
        }
        if (!flip) continue;
        if (orient2d(pt(a), pt(d), pt(c)) <= orient_band_ ||
            orient2d(pt(d), pt(b), pt(c)) <= orient_band_) {
          continue;  // non-convex quad: edge not flippable
        }
        raw_[t0] = {a, d, c};
        raw_[t1] = {d, b, c};
        emap.erase(it);
        emap[edge_key(c, d)] = EdgeRef{t0, t1};
        replace_ref(edge_key(a, d), t1, t0);
        replace_ref(edge_key(b, c), t0, t1);
        ++flips;
      }
      if (flips == 0) break;
    }
  }

  std::uint32_t third_vertex(int t, std::uint32_t a, std::uint32_t b) const {
    for (std::uint32_t v : raw_[t]) {
      if (v != a && v != b) return v;
    }
    throw DegeneracyError("malformed triangle");
  }

  void renumber() {
    for (auto& t : raw_) {
      while (!(t[0] < t[1] && t[0] < t[2])) t = {t[1], t[2], t[0]};
    }
    std::sort(raw_.begin(), raw_.end());
    for (const auto& t : raw_) {
      if (orient2d(pt(t[0]), pt(t[1]), pt(t[2])) <= 0.0) {
        throw DegeneracyError(
            "degenerate triangle in result",
            {static_cast<int>(t[0]), static_cast<int>(t[1]),
             static_cast<int>(t[2])});
      }
    }
  }

  void build_adjacency(Triangulation& out) const {
    for (std::size_t t = 0; t < out.triangles.size(); ++t) {
      for (int k = 0; k < 3; ++k) {
        const EdgeKey key =
            edge_key(out.triangles[t][k], out.triangles[t][(k + 1) % 3]);
        auto [it, inserted] = out.edge_adjacency.try_emplace(key, -1, -1);
        auto& ref = it->second;
        if (ref.first < 0) {
          ref.first = static_cast<int>(t);
        } else if (ref.second < 0) {
          ref.second = static_cast<int>(t);
        } else {
          throw DegeneracyError("edge shared by more than two triangles");
        }
      }
    }
  }

  void build_border_and_hull(Triangulation& out) const {
    for (const auto& [key, ref] : out.edge_adjacency) {
      if (ref.second >= 0) continue;
      const auto& t = out.triangles[ref.first];
      for (int k = 0; k < 3; ++k) {
        const std::uint32_t u = t[(k + 1) % 3];
        const std::uint32_t w = t[(k + 2) % 3];
        if (edge_key(u, w) == key) {
          out.border_edges.push_back(
              BorderEdge{u, w, t[k], static_cast<std::uint32_t>(ref.first)});
          break;
        }
      }
    }
    std::sort(out.border_edges.begin(), out.border_edges.end(),
              [](const BorderEdge& x, const BorderEdge& y) { return x.a < y.a; });
    std::unordered_map<std::uint32_t, std::size_t> next;
    for (std::size_t i = 0; i < out.border_edges.size(); ++i) {
      if (!next.emplace(out.border_edges[i].a, i).second) {
        throw DegeneracyError("pinched hull: border vertex repeats");
      }
    }
    if (out.border_edges.empty()) {
      throw DegeneracyError("triangulation has no border");
    }
    std::uint32_t start = out.border_edges.front().a;
    std::uint32_t cur = start;
    std::vector<BorderEdge> ordered;
    do {
      const auto it = next.find(cur);
      if (it == next.end()) {
        throw DegeneracyError("open hull chain");
      }
      const BorderEdge& e = out.border_edges[it->second];
      ordered.push_back(e);
      out.hull.push_back(e.a);
      cur = e.b;
    } while (cur != start && ordered.size() <= out.border_edges.size());
    if (ordered.size() != out.border_edges.size()) {
      throw DegeneracyError("hull boundary is not a single loop");
    }
    out.border_edges = std::move(ordered);
  }

  void build_incidence(Triangulation& out) const {
    out.site_triangles.assign(n_, {});
    for (std::size_t t = 0; t < out.triangles.size(); ++t) {
      for (std::uint32_t v : out.triangles[t]) {
        out.site_triangles[v].push_back(static_cast<std::uint32_t>(t));
      }
    }
    out.on_hull.assign(n_, false);
    for (std::uint32_t h : out.hull) out.on_hull[h] = true;
  }

  std::size_t n_;
  std::vector<Vec2> points_;  // sites then 3 enclosing vertices
  double scale_ = 1.0;
  double orient_band_ = 0.0;
  double incircle_band_ = 0.0;
  double dup_eps_ = 0.0;
  Vec2 super_center_;
  std::array<Vec2, 3> super_dir_;
  std::vector<BwTri> tris_;
  std::vector<bool> bad_mark_;
  std::vector<std::array<std::uint32_t, 3>> raw_;
};

}  // namespace

Triangulation triangulate(const SiteSnapshot& snapshot) {
  return Builder(snapshot).run();
}

const std::vector<BorderEdge>& border_edges(const Triangulation& tri) {
  return tri.border_edges;
}

std::vector<std::uint32_t> triangles_adjacent_to_site(const Triangulation& tri,
                                                      std::uint32_t site) {
  if (site >= tri.site_count) {
    throw Error("site index out of range");
  }
  const auto& incident = tri.site_triangles[site];
  if (incident.empty()) return {};

  const auto rotated = [&](std::uint32_t t) {
    std::array<std::uint32_t, 3> v = tri.triangles[t];
    while (v[0] != site) v = {v[1], v[2], v[0]};
    return v;
  };
  const auto across = [&](std::uint32_t t, std::uint32_t other) -> int {
    const auto it = tri.edge_adjacency.find(edge_key(site, other));
    if (it == tri.edge_adjacency.end()) return -1;
    const auto [t0, t1] = it->second;
    return t0 == static_cast<int>(t) ? t1 : t0;
  };

  // Walk clockwise to the fan start (or all the way around a closed fan).
  std::uint32_t start = incident.front();
  for (std::size_t i = 0; i < incident.size(); ++i) {
    const int prev = across(start, rotated(start)[1]);
    if (prev < 0) break;  // open fan: start at the border triangle
    if (static_cast<std::uint32_t>(prev) == incident.front()) {
      start = incident.front();  // closed fan
      break;
    }
    start = static_cast<std::uint32_t>(prev);
  }
  // Then counterclockwise across each (site, v2) edge.
  std::vector<std::uint32_t> fan;
  fan.reserve(incident.size());
  std::uint32_t cur = start;
  for (std::size_t i = 0; i < incident.size(); ++i) {
    fan.push_back(cur);
    const int nxt = across(cur, rotated(cur)[2]);
    if (nxt < 0 || static_cast<std::uint32_t>(nxt) == start) break;
    cur = static_cast<std::uint32_t>(nxt);
  }
  if (fan.size() != incident.size()) {
    throw DegeneracyError("triangle fan around site " + std::to_string(site) +
                              " is not a single chain",
                          {static_cast<int>(site)});
  }
  return fan;
}

}  // namespace diffvor
