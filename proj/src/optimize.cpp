#include "diffvor/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace diffvor {

AdamState::AdamState(std::size_t dim, AdamParams params)
    : m_(dim, 0.0), v_(dim, 0.0), params_(params) {
  if (!(params_.alpha > 0.0)) {
    throw ConfigError("Adam learning rate must be positive");
  }
}

std::vector<double> adam_step(AdamState& state, std::span<const double> coords,
                              std::span<const double> grads) {
  if (coords.size() != state.dim() || grads.size() != state.dim()) {
    throw Error("adam_step: dimension mismatch");
  }
  const AdamParams& p = state.params_;
  state.t_ += 1;
  const double corr1 = 1.0 - std::pow(p.beta1, state.t_);
  const double corr2 = 1.0 - std::pow(p.beta2, state.t_);
  std::vector<double> next(coords.begin(), coords.end());
  for (std::size_t i = 0; i < next.size(); ++i) {
    const double g = grads[i];
    state.m_[i] = p.beta1 * state.m_[i] + (1.0 - p.beta1) * g;
    state.v_[i] = p.beta2 * state.v_[i] + (1.0 - p.beta2) * g * g;
    const double m_hat = state.m_[i] / corr1;
    const double v_hat = state.v_[i] / corr2;
    next[i] -= p.alpha * m_hat / (std::sqrt(v_hat) + p.eps);
  }
  return next;
}

VarHandle loss_area_variance(Tape& tape, const VoronoiDiagram& diagram,
                             bool mask_unbounded) {
  std::vector<VarHandle> areas;
  areas.reserve(diagram.cells.size());
  for (const VoronoiCell& cell : diagram.cells) {
    if (mask_unbounded && cell.is_unbounded) continue;
    areas.push_back(cell.area);
  }
  if (areas.size() < 2) {
    throw ConfigError("area variance needs at least 2 unmasked cells");
  }
  Expr sum{tape, areas[0]};
  for (std::size_t i = 1; i < areas.size(); ++i) {
    sum = sum + Expr{tape, areas[i]};
  }
  const double count = static_cast<double>(areas.size());
  const Expr mean = sum / count;
  Expr acc = Expr::constant(tape, 0.0);
  for (const VarHandle& a : areas) {
    acc = acc + square(Expr{tape, a} - mean);
  }
  return (acc / count).handle();
}

VarHandle cell_population(Tape& tape, const VoronoiCell& cell,
                          const DiffPoint& site_point,
                          const DensityField& density) {
  if (cell.is_unbounded) {
    throw ConfigError("cell population needs a finite (clipped) cell");
  }
  Expr acc{tape, density.emit(tape, site_point)};
  for (const DiffPoint& v : cell.vertices) {
    acc = acc + Expr{tape, density.emit(tape, v)};
  }
  const double samples = static_cast<double>(cell.vertices.size() + 1);
  return (Expr{tape, cell.area} * (acc / samples)).handle();
}

VarHandle loss_hospital(Tape& tape, const VoronoiDiagram& diagram,
                        std::span<const DiffPoint> sites,
                        std::span<const double> capacities,
                        const DensityField& density) {
  if (capacities.size() != diagram.cells.size()) {
    throw ConfigError("one capacity per cell is required");
  }
  for (double c : capacities) {
    if (!(c > 0.0)) {
      throw ConfigError("capacities must be positive");
    }
  }
  Expr acc = Expr::constant(tape, 0.0);
  for (const VoronoiCell& cell : diagram.cells) {
    const VarHandle pop =
        cell_population(tape, cell, sites[cell.site], density);
    if (tape.value(pop) <= Tape::kDivEps) {
      throw DegeneracyError(
          "empty catchment: cell population vanished for site " +
              std::to_string(cell.site),
          {static_cast<int>(cell.site)});
    }
    const Expr w_eff = capacities[cell.site] / Expr{tape, pop};
    acc = acc + square(w_eff - 1.0);
  }
  return (acc / static_cast<double>(diagram.cells.size())).handle();
}

bool topology_stale(const Triangulation& tri, std::span<const Vec2> coords) {
  for (const auto& t : tri.triangles) {
    const Vec2 a = coords[t[0]], b = coords[t[1]], c = coords[t[2]];
    const double doubled =
        2.0 * ((a.x - c.x) * (b.y - c.y) - (b.x - c.x) * (a.y - c.y));
    if (doubled <= Tape::kDivEps) return true;
  }
  return false;
}

namespace {

std::vector<double> flatten(const SiteSnapshot& sites) {
  std::vector<double> coords;
  coords.reserve(2 * sites.size());
  for (Vec2 p : sites.coords) {
    coords.push_back(p.x);
    coords.push_back(p.y);
  }
  return coords;
}

SiteSnapshot unflatten(std::span<const double> coords) {
  SiteSnapshot snap;
  snap.coords.reserve(coords.size() / 2);
  for (std::size_t i = 0; i + 1 < coords.size(); i += 2) {
    snap.coords.push_back({coords[i], coords[i + 1]});
  }
  return snap;
}

void require_hull_inside(const Triangulation& tri,
                         std::span<const Vec2> coords,
                         const Boundary& boundary, int step) {
  for (std::uint32_t h : tri.hull) {
    if (!boundary.contains_strict(coords[h])) {
      throw Error("site " + std::to_string(h) +
                  " left the boundary at step " + std::to_string(step) +
                  "; enable clamping or lower the learning rate");
    }
  }
}

}  // namespace

VarHandle evaluate_loss(Tape& tape, const VoronoiDiagram& diagram,
                        std::span<const DiffPoint> sites,
                        const LossSpec& loss) {
  switch (loss.kind) {
    case LossKind::kAreaVariance:
      return loss_area_variance(tape, diagram, loss.mask_unbounded);
    case LossKind::kHospitalMse:
      if (!loss.density) {
        throw ConfigError("hospital loss needs a density field");
      }
      return loss_hospital(tape, diagram, sites, loss.capacities,
                           *loss.density);
  }
  throw ConfigError("unknown loss kind");
}

RunResult run_optimization(const SiteSnapshot& initial,
                           const RunConfig& config) {
  if (initial.size() < 3) {
    throw ConfigError("optimization needs at least 3 sites");
  }
  if (config.schedule.steps < 0) {
    throw ConfigError("step count must be non-negative");
  }
  if (config.schedule.retriangulation_period < 1) {
    throw ConfigError("retriangulation period must be at least 1");
  }
  if (config.loss.kind == LossKind::kHospitalMse && !config.boundary) {
    throw ConfigError("hospital loss requires a boundary");
  }
  if (config.boundary) {
    for (std::size_t i = 0; i < initial.size(); ++i) {
      if (!config.boundary->contains_strict(initial.coords[i])) {
        throw ConfigError("site " + std::to_string(i) +
                          " does not start strictly inside the boundary");
      }
    }
  }
  const double omega =
      config.omega > 0.0 ? config.omega : default_omega(initial);
  const double clamp_margin =
      config.boundary ? 1e-9 * config.boundary->bbox().diagonal() : 0.0;

  std::vector<double> coords = flatten(initial);
  const std::size_t n = initial.size();
  Tape tape;
  for (double c : coords) tape.leaf(c);
  AdamState adam(coords.size(), config.adam);

  std::optional<Triangulation> tri;
  RunResult result;

  const auto rebuild_sites = [&](std::vector<DiffPoint>& sites) {
    tape.reset(coords);
    sites.clear();
    sites.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      sites.push_back({tape.leaf_handle(2 * i), tape.leaf_handle(2 * i + 1)});
    }
  };

  std::vector<DiffPoint> sites;
  std::vector<Vec2> current(n);
  const auto refresh_current = [&] {
    for (std::size_t i = 0; i < n; ++i) {
      current[i] = {coords[2 * i], coords[2 * i + 1]};
    }
  };

  for (int step = 0; step < config.schedule.steps; ++step) {
    refresh_current();
    bool scheduled =
        !tri || (step % config.schedule.retriangulation_period == 0);
    bool stale = false;
    if (!scheduled && topology_stale(*tri, current)) {
      stale = true;
    }
    if (scheduled || stale) {
      tri = triangulate(unflatten(coords));
      ++result.retriangulations;
      if (stale) ++result.staleness_retriangulations;
      if (config.boundary) {
        require_hull_inside(*tri, current, *config.boundary, step);
      }
    }

    rebuild_sites(sites);
    VoronoiDiagram diagram = build_diagram(tape, sites, *tri, omega);
    if (config.boundary) {
      clip_diagram(tape, diagram, *config.boundary);
    }
    const VarHandle loss = evaluate_loss(tape, diagram, sites, config.loss);
    result.loss_trace.push_back(tape.value(loss));
    if (config.observer) {
      config.observer(step, snapshot(tape, diagram, sites));
    }
    const GradientVector grads = tape.backward(loss);
    coords = adam_step(adam, coords, grads);
    if (config.clamp_to_boundary && config.boundary) {
      for (std::size_t i = 0; i < n; ++i) {
        const Vec2 clamped = config.boundary->clamp_inside(
            {coords[2 * i], coords[2 * i + 1]}, clamp_margin);
        coords[2 * i] = clamped.x;
        coords[2 * i + 1] = clamped.y;
      }
    }
  }

  // Final state: fresh topology and diagram under the final coordinates.
  refresh_current();
  result.final_sites = unflatten(coords);
  tri = triangulate(result.final_sites);
  if (config.boundary) {
    require_hull_inside(*tri, current, *config.boundary,
                        config.schedule.steps);
  }
  rebuild_sites(sites);
  VoronoiDiagram diagram = build_diagram(tape, sites, *tri, omega);
  if (config.boundary) {
    clip_diagram(tape, diagram, *config.boundary);
  }
  result.final_diagram = snapshot(tape, diagram, sites);
  return result;
}

}  // namespace diffvor
