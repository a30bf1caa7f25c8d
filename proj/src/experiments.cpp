#include "diffvor/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "diffvor/density.hpp"
#include "diffvor/json_writer.hpp"
#include "diffvor/render_svg.hpp"

namespace diffvor {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

double variance_of(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double acc = 0.0;
  for (double x : xs) acc += (x - mean) * (x - mean);
  return acc / static_cast<double>(xs.size());
}

void write_file(const fs::path& path, const std::string& content,
                std::vector<std::string>& files) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error("cannot write " + path.string());
  }
  out << content;
  if (!out) {
    throw Error("write failed for " + path.string());
  }
  files.push_back(path.string());
}

std::string loss_csv(std::span<const double> losses) {
  std::string out = "step,loss\n";
  for (std::size_t i = 0; i < losses.size(); ++i) {
    out += std::to_string(i);
    out += ',';
    out += format_double(losses[i]);
    out += '\n';
  }
  return out;
}

std::vector<double> areas_of(const DiagramSnapshot& snap, bool mask_unbounded) {
  std::vector<double> areas;
  for (const auto& cell : snap.cells) {
    if (mask_unbounded && cell.is_unbounded) continue;
    areas.push_back(cell.area);
  }
  return areas;
}

double population_estimate(const DiagramSnapshot::Cell& cell, Vec2 site,
                           const DensityField& density) {
  double acc = density.value(site);
  for (Vec2 v : cell.vertices) acc += density.value(v);
  return cell.area * acc / static_cast<double>(cell.vertices.size() + 1);
}

std::vector<double> efficiency_row(const DiagramSnapshot& snap,
                                   std::span<const double> capacities,
                                   const DensityField& density) {
  std::vector<double> row(snap.cells.size(), 0.0);
  for (const auto& cell : snap.cells) {
    row[cell.site] = capacities[cell.site] /
                     population_estimate(cell, snap.sites[cell.site], density);
  }
  return row;
}

std::vector<Vec2> parse_point_array(const json& arr, const char* what) {
  if (!arr.is_array()) {
    throw ConfigError(std::string(what) + " must be an array of [x, y] pairs");
  }
  std::vector<Vec2> points;
  points.reserve(arr.size());
  for (const auto& item : arr) {
    if (!item.is_array() || item.size() != 2 || !item[0].is_number() ||
        !item[1].is_number()) {
      throw ConfigError(std::string(what) + " entries must be [x, y] pairs");
    }
    points.push_back({item[0].get<double>(), item[1].get<double>()});
  }
  return points;
}

std::vector<Vec2> resolve_sites(const ExperimentConfig& config) {
  if (config.points) {
    if (config.n_points > 0 &&
        static_cast<std::size_t>(config.n_points) != config.points->size()) {
      throw ConfigError("n_points disagrees with the provided points");
    }
    return *config.points;
  }
  if (config.n_points < 3) {
    throw ConfigError("n_points must be at least 3");
  }
  return generate_sites(config.n_points, config.seed, config.boundary);
}

double resolve_omega(const ExperimentConfig& config,
                     const std::vector<Vec2>& sites) {
  return config.omega > 0.0 ? config.omega
                            : default_omega(SiteSnapshot{sites});
}

void emit_points(JsonWriter& w, std::span<const Vec2> points) {
  w.begin_array();
  for (Vec2 p : points) w.value(p);
  w.end_array();
}

void emit_snapshot_cells(JsonWriter& w, const DiagramSnapshot& snap) {
  w.begin_array();
  for (const auto& cell : snap.cells) {
    w.begin_object();
    w.key("site").value(static_cast<std::int64_t>(cell.site));
    w.key("unbounded").value(cell.is_unbounded);
    w.key("area").value(cell.area);
    w.key("vertices");
    emit_points(w, cell.vertices);
    w.end_object();
  }
  w.end_array();
}

void emit_snapshot_edges(JsonWriter& w, const DiagramSnapshot& snap) {
  w.begin_array();
  for (const auto& edge : snap.edges) {
    w.begin_object();
    w.key("a").value(edge.a);
    w.key("b").value(edge.b);
    w.key("length").value(edge.length);
    w.key("border").value(edge.is_border_derived);
    w.end_object();
  }
  w.end_array();
}

void emit_common_config(JsonWriter& w, const ExperimentConfig& config,
                        std::size_t n, double omega) {
  w.key("seed").value(static_cast<std::uint64_t>(config.seed));
  w.key("n_points").value(static_cast<std::int64_t>(n));
  w.key("omega").value(omega);
  if (config.boundary) {
    w.key("boundary");
    emit_points(w, config.boundary->vertices());
  }
}

struct Histogram {
  std::vector<double> edges;
  std::vector<int> counts;
};

Histogram histogram_of(std::span<const double> values, int bins) {
  Histogram h;
  if (values.empty()) return h;
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  const double hi = std::max(2.0 * mean, 1e-300);
  h.counts.assign(bins, 0);
  for (int i = 0; i <= bins; ++i) {
    h.edges.push_back(hi * static_cast<double>(i) / bins);
  }
  for (double v : values) {
    int bin = static_cast<int>(v / hi * bins);
    bin = std::clamp(bin, 0, bins - 1);
    ++h.counts[bin];
  }
  return h;
}

// Assemble one diagram on a scratch tape and return its numeric snapshot.
DiagramSnapshot build_snapshot(const std::vector<Vec2>& points,
                               const std::optional<Boundary>& boundary,
                               double omega) {
  Tape tape;
  std::vector<DiffPoint> sites;
  sites.reserve(points.size());
  for (Vec2 p : points) {
    const VarHandle x = tape.leaf(p.x);
    const VarHandle y = tape.leaf(p.y);
    sites.push_back({x, y});
  }
  const Triangulation tri = triangulate(SiteSnapshot{points});
  VoronoiDiagram diagram = build_diagram(tape, sites, tri, omega);
  if (boundary) {
    clip_diagram(tape, diagram, *boundary);
  }
  return snapshot(tape, diagram, sites);
}

}  // namespace

std::vector<Vec2> generate_sites(int n, std::uint64_t seed,
                                 const std::optional<Boundary>& boundary) {
  if (n < 3) {
    throw ConfigError("site generation needs n >= 3");
  }
  Pcg32 rng(seed);
  std::vector<Vec2> points;
  points.reserve(n);
  if (!boundary) {
    for (int i = 0; i < n; ++i) {
      const double x = rng.next_double();
      const double y = rng.next_double();
      points.push_back({x, y});
    }
    return points;
  }
  const Bbox box = boundary->bbox();
  const Vec2 span = box.hi - box.lo;
  for (int i = 0; i < n; ++i) {
    bool placed = false;
    for (int attempt = 0; attempt < 10000; ++attempt) {
      const double x = rng.next_double();
      const double y = rng.next_double();
      const Vec2 p = box.lo + Vec2{x * span.x, y * span.y};
      if (boundary->contains_strict(p)) {
        points.push_back(p);
        placed = true;
        break;
      }
    }
    if (!placed) {
      throw ConfigError("could not sample a point inside the boundary");
    }
  }
  return points;
}

std::vector<double> generate_capacities(int n, Pcg32& rng, double total) {
  std::vector<double> caps(n);
  double sum = 0.0;
  for (double& c : caps) {
    c = 0.5 + rng.next_double();
    sum += c;
  }
  for (double& c : caps) c *= total / sum;
  return caps;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config file: " + path.string());
  }
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config parse error: " + std::string(e.what()));
  }
  if (!j.is_object()) {
    throw ConfigError("config root must be a JSON object");
  }
  static const std::set<std::string> known = {
      "experiment",     "n_points",      "seed",
      "steps",          "retriangulation_period",
      "learning_rate",  "omega",         "boundary",
      "points",         "points_file",   "capacities",
      "mask_unbounded", "clamp_to_boundary",
      "out_dir",        "gradcheck_loss"};
  for (const auto& [key, unused] : j.items()) {
    if (!known.contains(key)) {
      throw ConfigError("unknown config key: " + key);
    }
  }

  ExperimentConfig config;
  try {
    config.experiment = j.value("experiment", std::string{});
    config.n_points = j.value("n_points", 0);
    config.seed = j.value("seed", std::uint64_t{0});
    config.steps = j.value("steps", 0);
    config.retriangulation_period = j.value("retriangulation_period", 1);
    config.learning_rate = j.value("learning_rate", 1e-3);
    config.omega = j.value("omega", 0.0);
    config.mask_unbounded = j.value("mask_unbounded", true);
    config.clamp_to_boundary = j.value("clamp_to_boundary", false);
    config.out_dir = j.value("out_dir", std::string{"out"});
    config.gradcheck_loss =
        j.value("gradcheck_loss", std::string{"variance_bounded"});
    if (j.contains("boundary")) {
      config.boundary.emplace(parse_point_array(j["boundary"], "boundary"));
    }
    if (j.contains("points") && j.contains("points_file")) {
      throw ConfigError("give either points or points_file, not both");
    }
    if (j.contains("points")) {
      config.points = parse_point_array(j["points"], "points");
    }
    if (j.contains("points_file")) {
      const fs::path file =
          path.parent_path() / j["points_file"].get<std::string>();
      config.points = load_points(file);
    }
    if (j.contains("capacities")) {
      config.capacities = j["capacities"].get<std::vector<double>>();
    }
  } catch (const json::exception& e) {
    throw ConfigError("config field error: " + std::string(e.what()));
  }

  if (config.steps < 0) throw ConfigError("steps must be non-negative");
  if (config.retriangulation_period < 1) {
    throw ConfigError("retriangulation_period must be at least 1");
  }
  if (!(config.learning_rate > 0.0)) {
    throw ConfigError("learning_rate must be positive");
  }
  if (config.omega < 0.0) throw ConfigError("omega must be positive when set");
  for (Vec2 p : config.points.value_or(std::vector<Vec2>{})) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw ConfigError("points must be finite");
    }
  }
  return config;
}

std::vector<Vec2> load_points(const fs::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open points file: " + path.string());
  }
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("points parse error: " + std::string(e.what()));
  }
  if (!j.is_object() || !j.contains("points")) {
    throw ConfigError("points file needs a top-level \"points\" array");
  }
  return parse_point_array(j["points"], "points");
}

RunArtifact cmd_tessellate(const ExperimentConfig& config) {
  const std::vector<Vec2> points = resolve_sites(config);
  const double omega = resolve_omega(config, points);
  const DiagramSnapshot snap = build_snapshot(points, config.boundary, omega);

  RunArtifact artifact;
  artifact.final_diagram = snap;
  for (const auto& cell : snap.cells) {
    artifact.final_areas.push_back(cell.area);
    artifact.total_area += cell.area;
  }

  fs::create_directories(config.out_dir);
  const fs::path dir(config.out_dir);

  JsonWriter w;
  w.begin_object();
  w.key("command").value("tessellate");
  emit_common_config(w, config, points.size(), omega);
  w.key("bounded").value(config.boundary.has_value());
  w.key("points");
  emit_points(w, snap.sites);
  w.key("cells");
  emit_snapshot_cells(w, snap);
  w.key("edges");
  emit_snapshot_edges(w, snap);
  w.key("total_area").value(artifact.total_area);
  w.end_object();
  write_file(dir / "results.json", w.str() + "\n", artifact.files);

  write_file(dir / "diagram.svg",
             render_diagram_svg(snap, config.boundary, RenderStyle{}),
             artifact.files);
  return artifact;
}

namespace {

RunArtifact run_descent(const ExperimentConfig& config, const RunConfig& rc,
                        const std::vector<Vec2>& points,
                        const std::string& command,
                        std::span<const double> capacities,
                        const DensityField* density) {
  std::optional<DiagramSnapshot> initial;
  std::vector<std::vector<double>> efficiency_trace;
  RunConfig run = rc;
  run.observer = [&](int step, const DiagramSnapshot& s) {
    if (step == 0) initial = s;
    if (density != nullptr) {
      efficiency_trace.push_back(efficiency_row(s, capacities, *density));
    }
  };
  const RunResult result = run_optimization(SiteSnapshot{points}, run);
  const DiagramSnapshot& before = initial ? *initial : result.final_diagram;
  const bool mask = rc.loss.mask_unbounded && !rc.boundary.has_value();

  RunArtifact artifact;
  artifact.loss_trace = result.loss_trace;
  artifact.final_diagram = result.final_diagram;
  artifact.retriangulations = result.retriangulations;
  artifact.staleness_retriangulations = result.staleness_retriangulations;
  const std::vector<double> initial_areas = areas_of(before, mask);
  artifact.final_areas = areas_of(result.final_diagram, mask);
  artifact.initial_variance = variance_of(initial_areas);
  artifact.final_variance = variance_of(artifact.final_areas);
  if (density != nullptr) {
    artifact.w_eff_initial = efficiency_trace.empty()
                                 ? efficiency_row(before, capacities, *density)
                                 : efficiency_trace.front();
    artifact.w_eff_final =
        efficiency_row(result.final_diagram, capacities, *density);
  }

  fs::create_directories(config.out_dir);
  const fs::path dir(config.out_dir);
  write_file(dir / "loss.csv", loss_csv(artifact.loss_trace), artifact.files);
  write_file(dir / "loss_curve.svg",
             render_loss_curve_svg(artifact.loss_trace), artifact.files);

  RenderStyle style;
  std::vector<double> markers(capacities.begin(), capacities.end());
  if (density != nullptr) style.markers = markers;
  write_file(dir / "before.svg",
             render_diagram_svg(before, rc.boundary, style), artifact.files);
  write_file(dir / "after.svg",
             render_diagram_svg(result.final_diagram, rc.boundary, style),
             artifact.files);

  if (density != nullptr) {
    std::string csv = "step";
    for (std::size_t i = 0; i < capacities.size(); ++i) {
      csv += ",w_eff_" + std::to_string(i);
    }
    csv += '\n';
    for (std::size_t s = 0; s < efficiency_trace.size(); ++s) {
      csv += std::to_string(s);
      for (double w : efficiency_trace[s]) {
        csv += ',';
        csv += format_double(w);
      }
      csv += '\n';
    }
    write_file(dir / "weff_trace.csv", csv, artifact.files);
  }

  JsonWriter w;
  w.begin_object();
  w.key("command").value(command);
  emit_common_config(w, config, points.size(), run.omega > 0.0
                                                   ? run.omega
                                                   : default_omega(SiteSnapshot{points}));
  w.key("steps").value(config.steps);
  w.key("retriangulation_period").value(config.retriangulation_period);
  w.key("learning_rate").value(config.learning_rate);
  w.key("mask_unbounded").value(rc.loss.mask_unbounded);
  w.key("retriangulations").value(artifact.retriangulations);
  w.key("staleness_retriangulations")
      .value(artifact.staleness_retriangulations);
  w.key("steps_completed")
      .value(static_cast<std::int64_t>(artifact.loss_trace.size()));
  if (density != nullptr) {
    w.key("capacities").value_list(markers);
    w.key("w_eff_initial").value_list(artifact.w_eff_initial);
    w.key("w_eff_final").value_list(artifact.w_eff_final);
  }
  w.key("initial");
  w.begin_object();
  w.key("points");
  emit_points(w, before.sites);
  w.key("areas").value_list(initial_areas);
  w.key("variance").value(artifact.initial_variance);
  w.end_object();
  w.key("final");
  w.begin_object();
  w.key("points");
  emit_points(w, result.final_diagram.sites);
  w.key("areas").value_list(artifact.final_areas);
  w.key("variance").value(artifact.final_variance);
  w.end_object();
  const Histogram hist = histogram_of(artifact.final_areas, 20);
  w.key("histogram");
  w.begin_object();
  w.key("bin_edges").value_list(hist.edges);
  w.key("counts");
  w.begin_array();
  for (int c : hist.counts) w.value(static_cast<std::int64_t>(c));
  w.end_array();
  w.end_object();
  w.end_object();
  write_file(dir / "results.json", w.str() + "\n", artifact.files);
  return artifact;
}

}  // namespace

RunArtifact cmd_variance(const ExperimentConfig& config, bool bounded) {
  if (bounded && !config.boundary) {
    throw ConfigError("variance_bounded requires a boundary");
  }
  if (!bounded && config.boundary) {
    throw ConfigError("variance_unbounded does not take a boundary");
  }
  const std::vector<Vec2> points = resolve_sites(config);

  RunConfig rc;
  rc.loss.kind = LossKind::kAreaVariance;
  rc.loss.mask_unbounded = config.mask_unbounded;
  rc.schedule = {config.steps, config.retriangulation_period};
  rc.boundary = config.boundary;
  rc.omega = config.omega;
  rc.adam.alpha = config.learning_rate;
  rc.clamp_to_boundary = config.clamp_to_boundary;
  return run_descent(config, rc, points,
                     bounded ? "variance_bounded" : "variance_unbounded", {},
                     nullptr);
}

RunArtifact cmd_hospital(const ExperimentConfig& config) {
  if (!config.boundary) {
    throw ConfigError("hospital requires a boundary");
  }
  const std::vector<Vec2> points = resolve_sites(config);
  if (points.size() < 3) {
    throw ConfigError("hospital placement needs at least 3 sites");
  }
  std::vector<double> capacities;
  if (config.capacities) {
    capacities = *config.capacities;
    if (capacities.size() != points.size()) {
      throw ConfigError("one capacity per site is required");
    }
  } else {
    // Separate stream so capacities do not depend on how many points were
    // drawn.
    Pcg32 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
    capacities = generate_capacities(static_cast<int>(points.size()), rng,
                                     kHospitalTotalPopulation);
  }
  for (double c : capacities) {
    if (!(c > 0.0)) throw ConfigError("capacities must be positive");
  }

  auto density = std::make_shared<SinusoidDensity>();
  RunConfig rc;
  rc.loss.kind = LossKind::kHospitalMse;
  rc.loss.capacities = capacities;
  rc.loss.density = density;
  rc.schedule = {config.steps, config.retriangulation_period};
  rc.boundary = config.boundary;
  rc.omega = config.omega;
  rc.adam.alpha = config.learning_rate;
  rc.clamp_to_boundary = config.clamp_to_boundary;
  return run_descent(config, rc, points, "hospital", capacities,
                     density.get());
}

GradcheckReport gradient_check(const GradcheckInput& input) {
  const std::size_t n = input.sites.size();
  if (n < 3) {
    throw ConfigError("gradient check needs at least 3 sites");
  }
  const double omega = input.omega > 0.0 ? input.omega
                                         : default_omega(input.sites);
  const Triangulation tri = triangulate(input.sites);

  std::vector<double> coords;
  coords.reserve(2 * n);
  for (Vec2 p : input.sites.coords) {
    coords.push_back(p.x);
    coords.push_back(p.y);
  }

  const auto evaluate = [&](std::span<const double> c,
                            std::vector<std::uint32_t>* sig,
                            GradientVector* grads) -> double {
    Tape tape;
    std::vector<DiffPoint> sites;
    sites.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      const VarHandle x = tape.leaf(c[2 * i]);
      const VarHandle y = tape.leaf(c[2 * i + 1]);
      sites.push_back({x, y});
    }
    VoronoiDiagram diagram = build_diagram(tape, sites, tri, omega);
    if (input.boundary) {
      clip_diagram(tape, diagram, *input.boundary);
    }
    const VarHandle loss = evaluate_loss(tape, diagram, sites, input.loss);
    if (sig != nullptr) *sig = diagram.signature;
    if (grads != nullptr) *grads = tape.backward(loss);
    return tape.value(loss);
  };

  std::vector<std::uint32_t> base_sig;
  GradientVector analytic;
  evaluate(coords, &base_sig, &analytic);

  GradcheckReport report;
  report.analytic = analytic;
  report.fd.assign(2 * n, 0.0);
  const double h = input.step;
  for (std::size_t i = 0; i < 2 * n; ++i) {
    std::vector<double> plus = coords, minus = coords;
    plus[i] += h;
    minus[i] -= h;
    double f_plus, f_minus;
    std::vector<std::uint32_t> sig_plus, sig_minus;
    try {
      f_plus = evaluate(plus, &sig_plus, nullptr);
      f_minus = evaluate(minus, &sig_minus, nullptr);
    } catch (const Error&) {
      report.excluded.push_back(static_cast<int>(i));
      continue;
    }
    if (sig_plus != base_sig || sig_minus != base_sig) {
      report.excluded.push_back(static_cast<int>(i));
      continue;
    }
    const double fd = (f_plus - f_minus) / (2.0 * h);
    report.fd[i] = fd;
    // 1e-3 floor: below it the 1e-8 absolute band is the binding check.
    const double rel = std::abs(fd - analytic[i]) /
                       std::max({std::abs(fd), std::abs(analytic[i]), 1e-3});
    if (rel > report.max_rel_error) {
      report.max_rel_error = rel;
      report.worst_coordinate = static_cast<int>(i);
    }
    ++report.checked;
  }
  report.passed = report.max_rel_error < 1e-5;
  return report;
}

GradcheckReport cmd_gradcheck(const ExperimentConfig& config) {
  if (config.n_points > 100 ||
      (config.points && config.points->size() > 100)) {
    throw ConfigError("gradcheck is limited to 100 sites");
  }
  GradcheckInput input;
  input.omega = config.omega;

  if (config.gradcheck_loss == "variance_bounded") {
    if (!config.boundary) {
      throw ConfigError("gradcheck_loss variance_bounded needs a boundary");
    }
    input.boundary = config.boundary;
    input.loss.kind = LossKind::kAreaVariance;
  } else if (config.gradcheck_loss == "variance_unbounded") {
    input.loss.kind = LossKind::kAreaVariance;
    input.loss.mask_unbounded = true;
  } else if (config.gradcheck_loss == "hospital") {
    if (!config.boundary) {
      throw ConfigError("gradcheck_loss hospital needs a boundary");
    }
    input.boundary = config.boundary;
    input.loss.kind = LossKind::kHospitalMse;
    input.loss.density = std::make_shared<SinusoidDensity>();
  } else {
    throw ConfigError("unknown gradcheck_loss: " + config.gradcheck_loss);
  }

  const std::vector<Vec2> points = resolve_sites(config);
  input.sites = SiteSnapshot{points};
  if (input.loss.kind == LossKind::kHospitalMse) {
    if (config.capacities) {
      input.loss.capacities = *config.capacities;
    } else {
      Pcg32 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
      input.loss.capacities = generate_capacities(
          static_cast<int>(points.size()), rng, kHospitalTotalPopulation);
    }
  }

  GradcheckReport report = gradient_check(input);

  fs::create_directories(config.out_dir);
  JsonWriter w;
  w.begin_object();
  w.key("command").value("gradcheck");
  w.key("loss").value(config.gradcheck_loss);
  emit_common_config(w, config, points.size(),
                     input.omega > 0.0 ? input.omega
                                       : default_omega(input.sites));
  w.key("step").value(1e-6);
  w.key("checked").value(report.checked);
  w.key("max_rel_error").value(report.max_rel_error);
  w.key("worst_coordinate").value(report.worst_coordinate);
  w.key("passed").value(report.passed);
  w.key("excluded");
  w.begin_array();
  for (int i : report.excluded) w.value(static_cast<std::int64_t>(i));
  w.end_array();
  w.key("coordinates");
  w.begin_array();
  for (std::size_t i = 0; i < report.analytic.size(); ++i) {
    w.begin_object();
    w.key("index").value(static_cast<std::int64_t>(i));
    w.key("analytic").value(report.analytic[i]);
    w.key("fd").value(report.fd[i]);
    w.end_object();
  }
  w.end_array();
  w.end_object();
  write_file(fs::path(config.out_dir) / "gradcheck.json", w.str() + "\n",
             report.files);
  return report;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"diffvor: gradient-ready Voronoi tessellations"};
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed_override = 0;
  std::string out_override;
  const char* names[] = {"tessellate", "variance_unbounded",
                         "variance_bounded", "hospital", "gradcheck"};
  const char* descriptions[] = {
      "Build one diagram and dump geometry as JSON and SVG",
      "Equalize cell areas without a boundary (hull cells masked)",
      "Equalize cell areas inside a convex boundary",
      "Match cell populations to site capacities",
      "Compare tape gradients against central finite differences"};
  for (std::size_t i = 0; i < std::size(names); ++i) {
    CLI::App* sub = app.add_subcommand(names[i], descriptions[i]);
    sub->add_option("--config", config_path, "Path to a JSON config")
        ->required();
    sub->add_option("--seed", seed_override, "Override the config seed");
    sub->add_option("--out", out_override, "Override the output directory");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    ExperimentConfig config = load_config(config_path);
    CLI::App* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();
    if (!config.experiment.empty() && config.experiment != name) {
      throw ConfigError("config experiment \"" + config.experiment +
                        "\" does not match subcommand \"" + name + "\"");
    }
    if (sub->count("--seed") > 0) config.seed = seed_override;
    if (sub->count("--out") > 0) config.out_dir = out_override;

    if (name == "tessellate") {
      const RunArtifact a = cmd_tessellate(config);
      std::cout << "tessellated " << a.final_diagram.cells.size()
                << " cells, total area " << a.total_area << "\n";
    } else if (name == "variance_unbounded" || name == "variance_bounded") {
      const RunArtifact a = cmd_variance(config, name == "variance_bounded");
      std::cout << "variance " << a.initial_variance << " -> "
                << a.final_variance << " over " << a.loss_trace.size()
                << " steps (" << a.staleness_retriangulations
                << " staleness retriangulations)\n";
    } else if (name == "hospital") {
      const RunArtifact a = cmd_hospital(config);
      std::cout << "hospital loss "
                << (a.loss_trace.empty() ? 0.0 : a.loss_trace.front())
                << " -> "
                << (a.loss_trace.empty() ? 0.0 : a.loss_trace.back())
                << " over " << a.loss_trace.size() << " steps\n";
    } else if (name == "gradcheck") {
      const GradcheckReport r = cmd_gradcheck(config);
      std::cout << "gradcheck max relative error " << r.max_rel_error
                << " over " << r.checked << " coordinates ("
                << r.excluded.size() << " excluded): "
                << (r.passed ? "ok" : "FAILED") << "\n";
    }
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "geometry error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace diffvor
