#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "diffvor/geometry.hpp"
#include "diffvor/optimize.hpp"
#include "diffvor/pcg32.hpp"
#include "diffvor/voronoi.hpp"

namespace diffvor {

// Total of the hospital density sin(10x) + sin(10y) + 2 over the unit
// square: (1 - cos 10) / 5 + 2. Capacities are normalized to this.
inline constexpr double kHospitalTotalPopulation = 2.3678;

// Declarative description of one CLI run.
struct ExperimentConfig {
  std::string experiment;  // optional; must match the subcommand if set
  int n_points = 0;
  std::uint64_t seed = 0;
  int steps = 0;
  int retriangulation_period = 1;
  double learning_rate = 1e-3;
  double omega = 0.0;  // <= 0: derived from the sites
  std::optional<Boundary> boundary;
  std::optional<std::vector<Vec2>> points;
  std::optional<std::vector<double>> capacities;
  bool mask_unbounded = true;
  bool clamp_to_boundary = false;
  std::string out_dir = "out";
  std::string gradcheck_loss = "variance_bounded";
};

ExperimentConfig load_config(const std::filesystem::path& path);

// Points file: {"points": [[x, y], ...]}. Results files written by the
// commands embed the same key and can be fed back in.
std::vector<Vec2> load_points(const std::filesystem::path& path);

std::vector<Vec2> generate_sites(int n, std::uint64_t seed,
                                 const std::optional<Boundary>& boundary);
std::vector<double> generate_capacities(int n, Pcg32& rng, double total);

struct RunArtifact {
  std::vector<std::string> files;
  std::vector<double> loss_trace;
  double initial_variance = 0.0;
  double final_variance = 0.0;
  std::vector<double> final_areas;
  std::vector<double> w_eff_initial;
  std::vector<double> w_eff_final;
  DiagramSnapshot final_diagram;
  int retriangulations = 0;
  int staleness_retriangulations = 0;
  double total_area = 0.0;
};

// One-shot diagram dump: results.json (sites, cells, areas, edges) and an
// SVG rendering. No optimization.
RunArtifact cmd_tessellate(const ExperimentConfig& config);

// Area-variance descent; writes loss.csv, before/after SVG, loss curve and
// results.json with the final-area histogram.
RunArtifact cmd_variance(const ExperimentConfig& config, bool bounded);

// Capacity-matched placement under the sinusoidal density; adds the
// per-site efficiency trajectory and capacity markers.
RunArtifact cmd_hospital(const ExperimentConfig& config);

struct GradcheckInput {
  SiteSnapshot sites;
  LossSpec loss;
  std::optional<Boundary> boundary;
  double omega = 0.0;  // <= 0: derived
  double step = 1e-6;  // central difference half-width
};

struct GradcheckReport {
  int checked = 0;
  double max_rel_error = 0.0;
  int worst_coordinate = -1;
  // Coordinates whose perturbation changed the diagram's combinatorial
  // structure; excluded rather than counted as failures.
  std::vector<int> excluded;
  std::vector<double> analytic;
  std::vector<double> fd;
  bool passed = false;
  std::vector<std::string> files;
};

// Central finite differences against the tape gradient, with the
// triangulation frozen across each perturbation. Relative error uses a
// 1e-3 denominator floor so the 1e-8 absolute band applies to vanishing
// entries.
GradcheckReport gradient_check(const GradcheckInput& input);

GradcheckReport cmd_gradcheck(const ExperimentConfig& config);

// Parses argv and dispatches. Exit codes: 0 success, 2 configuration
// error, 3 geometry degeneracy.
int run_cli(int argc, char** argv);

}  // namespace diffvor
