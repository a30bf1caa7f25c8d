#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "diffvor/autodiff.hpp"
#include "diffvor/delaunay.hpp"
#include "diffvor/density.hpp"
#include "diffvor/voronoi.hpp"

namespace diffvor {

enum class LossKind {
  kAreaVariance,
  kHospitalMse,
};

struct LossSpec {
  LossKind kind = LossKind::kAreaVariance;
  // Skip cells whose vertex list includes ghost vertices. Irrelevant after
  // clipping, where every cell is finite.
  bool mask_unbounded = true;
  std::vector<double> capacities;                 // hospital only
  std::shared_ptr<const DensityField> density;    // hospital only
};

struct AdamParams {
  double alpha = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// First/second moment accumulators for one flat coordinate vector.
class AdamState {
 public:
  AdamState(std::size_t dim, AdamParams params = {});
  std::size_t dim() const noexcept { return m_.size(); }
  int step_count() const noexcept { return t_; }
  const AdamParams& params() const noexcept { return params_; }

  friend std::vector<double> adam_step(AdamState& state,
                                       std::span<const double> coords,
                                       std::span<const double> grads);

 private:
  std::vector<double> m_;
  std::vector<double> v_;
  int t_ = 0;
  AdamParams params_;
};

// One bias-corrected Adam update; returns the new coordinates.
std::vector<double> adam_step(AdamState& state, std::span<const double> coords,
                              std::span<const double> grads);

// Mean squared deviation of the (unmasked) cell areas from their mean,
// 1/N convention, recorded on the tape.
VarHandle loss_area_variance(Tape& tape, const VoronoiDiagram& diagram,
                             bool mask_unbounded);

// Integral of the density over one finite cell, estimated as
// area x mean(rho at the cell's vertices and its site).
VarHandle cell_population(Tape& tape, const VoronoiCell& cell,
                          const DiffPoint& site_point,
                          const DensityField& density);

// Mean squared deviation of the efficiencies capacity / population from 1.
VarHandle loss_hospital(Tape& tape, const VoronoiDiagram& diagram,
                        std::span<const DiffPoint> sites,
                        std::span<const double> capacities,
                        const DensityField& density);

// Dispatch on LossSpec::kind.
VarHandle evaluate_loss(Tape& tape, const VoronoiDiagram& diagram,
                        std::span<const DiffPoint> sites, const LossSpec& loss);

struct RunSchedule {
  int steps = 0;                   // m
  int retriangulation_period = 1;  // r
};

struct RunConfig {
  LossSpec loss;
  RunSchedule schedule;
  std::optional<Boundary> boundary;
  double omega = 0.0;  // <= 0: 100 x bbox diagonal of the starting sites
  AdamParams adam;
  // Opt-in: pull updated sites back inside the boundary instead of
  // aborting when one escapes.
  bool clamp_to_boundary = false;
  // Called once per completed step with the freshly built diagram.
  std::function<void(int step, const DiagramSnapshot&)> observer;
};

struct RunResult {
  std::vector<double> loss_trace;  // one value per completed step
  SiteSnapshot final_sites;
  DiagramSnapshot final_diagram;
  int retriangulations = 0;
  int staleness_retriangulations = 0;
};

// True when any cached triangle has flipped orientation (doubled area at
// or below Tape::kDivEps) under the given coordinates.
bool topology_stale(const Triangulation& tri, std::span<const Vec2> coords);

// Gradient descent on the site coordinates: retriangulate on schedule (or
// on staleness), rebuild tape and diagram, evaluate the loss, backpropagate,
// apply one Adam update.
RunResult run_optimization(const SiteSnapshot& initial, const RunConfig& config);

}  // namespace diffvor
