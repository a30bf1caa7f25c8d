// Acceptance suite: one line per criterion, [PASS]/[FAIL], nonzero exit on
// any failure. Run with --desk for the reduced-scale variant of criterion 4
// and --only N to run a single criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "diffvor/density.hpp"
#include "diffvor/experiments.hpp"
#include "diffvor/optimize.hpp"
#include "diffvor/voronoi.hpp"
#include "oracles.hpp"

using namespace diffvor;
namespace fs = std::filesystem;

namespace {

Boundary unit_square() {
  return Boundary({{0, 0}, {1, 0}, {1, 1}, {0, 1}});
}

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), pattern, v);
  return buf;
}

// --- criterion 1: gradient fidelity ---------------------------------------

bool criterion_gradients(std::string& detail) {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  int excluded = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const std::vector<Vec2> pts = generate_sites(20, seed, unit_square());

    GradcheckInput variance;
    variance.sites = SiteSnapshot{pts};
    variance.boundary = unit_square();
    variance.loss.kind = LossKind::kAreaVariance;
    const GradcheckReport rv = gradient_check(variance);

    GradcheckInput hospital;
    hospital.sites = SiteSnapshot{pts};
    hospital.boundary = unit_square();
    hospital.loss.kind = LossKind::kHospitalMse;
    hospital.loss.density = std::make_shared<SinusoidDensity>();
    Pcg32 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    hospital.loss.capacities =
        generate_capacities(20, rng, kHospitalTotalPopulation);
    const GradcheckReport rh = gradient_check(hospital);

    worst = std::max({worst, rv.max_rel_error, rh.max_rel_error});
    excluded += static_cast<int>(rv.excluded.size() + rh.excluded.size());
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  detail = "max rel error " + fmt("%.3g", worst) + ", " +
           std::to_string(excluded) + " excluded, " + fmt("%.1f", seconds) +
           "s";
  return worst < 1e-5 && seconds < 60.0;
}

// --- criterion 2: partition of area ----------------------------------------

bool criterion_partition(std::string& detail) {
  detail.clear();
  bool ok = true;
  for (int n : {10, 100, 1000}) {
    const std::vector<Vec2> pts = generate_sites(n, 7, unit_square());
    Tape tape;
    std::vector<DiffPoint> sites;
    for (Vec2 p : pts) {
      const VarHandle x = tape.leaf(p.x);
      const VarHandle y = tape.leaf(p.y);
      sites.push_back({x, y});
    }
    const Triangulation tri = triangulate(SiteSnapshot{pts});
    VoronoiDiagram diagram =
        build_diagram(tape, sites, tri, default_omega(SiteSnapshot{pts}));
    clip_diagram(tape, diagram, unit_square());
    double total = 0.0;
    for (const auto& cell : diagram.cells) total += tape.value(cell.area);
    const double err = std::abs(total - 1.0);
    ok = ok && err <= 1e-9;
    if (!detail.empty()) detail += ", ";
    detail += "N=" + std::to_string(n) + " err " + fmt("%.2g", err);
  }
  return ok;
}

// --- criterion 3: half-plane oracle equivalence -----------------------------

bool criterion_oracle(std::string& detail) {
  const Boundary window = unit_square();
  const std::vector<Vec2> box = window.vertices();
  double worst = 0.0;
  for (int n = 5; n <= 12; ++n) {
    const std::vector<Vec2> pts =
        generate_sites(n, 100 + static_cast<std::uint64_t>(n), window);
    Tape tape;
    std::vector<DiffPoint> sites;
    for (Vec2 p : pts) {
      const VarHandle x = tape.leaf(p.x);
      const VarHandle y = tape.leaf(p.y);
      sites.push_back({x, y});
    }
    const Triangulation tri = triangulate(SiteSnapshot{pts});
    VoronoiDiagram diagram =
        build_diagram(tape, sites, tri, default_omega(SiteSnapshot{pts}));
    clip_diagram(tape, diagram, window);
    for (const auto& cell : diagram.cells) {
      const std::vector<Vec2> oracle_cell =
          oracles::halfplane_cell(cell.site, pts, box);
      const double expect = oracles::polygon_area(oracle_cell);
      worst = std::max(worst,
                       std::abs(tape.value(cell.area) - expect) / expect);
    }
  }
  detail = "max relative area error " + fmt("%.2g", worst);
  return worst <= 1e-9;
}

// --- criterion 4: bounded variance experiment -------------------------------

bool criterion_variance_experiment(std::string& detail, bool desk) {
  const int n = desk ? 200 : 1000;
  const int steps = desk ? 500 : 1400;
  const std::vector<Vec2> pts = generate_sites(n, 42, unit_square());
  RunConfig rc;
  rc.boundary = unit_square();
  rc.schedule = {steps, 1};
  rc.adam.alpha = 1e-3;
  rc.clamp_to_boundary = true;  // keep wall-adjacent sites inside
  const auto t0 = std::chrono::steady_clock::now();
  const RunResult res = run_optimization(SiteSnapshot{pts}, rc);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();

  double mean_area = 0.0;
  for (const auto& cell : res.final_diagram.cells) mean_area += cell.area;
  mean_area /= static_cast<double>(res.final_diagram.cells.size());
  const double mean_err = std::abs(mean_area - 1.0 / n);

  const double ratio = res.loss_trace.back() / res.loss_trace.front();

  bool ma_ok = true;
  double prev = 0.0;
  for (std::size_t k = 0; k + 50 <= res.loss_trace.size(); ++k) {
    double ma = 0.0;
    for (std::size_t i = k; i < k + 50; ++i) ma += res.loss_trace[i];
    ma /= 50.0;
    if (k > 0 && ma > prev * (1.0 + 1e-12)) {
      ma_ok = false;
      break;
    }
    prev = ma;
  }

  detail = std::string(desk ? "desk scale, " : "full scale, ") + "mean area " +
           fmt("%.7f", mean_area) + " (err " + fmt("%.2g", mean_err) +
           "), variance ratio " + fmt("%.3g", ratio) + ", MA " +
           (ma_ok ? "non-increasing" : "INCREASED") + ", " +
           fmt("%.1f", seconds) + "s";
  return mean_err <= 1e-6 && ratio <= 0.01 && ma_ok && seconds < 600.0;
}

// --- criterion 5: retriangulation robustness --------------------------------

bool criterion_retriangulation(std::string& detail) {
  // Period comparison in the smooth-motion regime: with Adam's
  // sign-normalized steps, alpha sets the site speed directly, so the
  // claim is tested where steps are small against the cell pitch.
  const double alpha = 3e-5;
  const auto run_with = [&](int period) {
    const std::vector<Vec2> pts = generate_sites(200, 3, unit_square());
    RunConfig rc;
    rc.boundary = unit_square();
    rc.schedule = {300, period};
    rc.adam.alpha = alpha;
    rc.clamp_to_boundary = true;
    return run_optimization(SiteSnapshot{pts}, rc);
  };
  const RunResult r1 = run_with(1);
  const RunResult r5 = run_with(5);
  const double l1 = r1.loss_trace.back();
  const double l5 = r5.loss_trace.back();
  const double rel = std::abs(l1 - l5) / std::max(l1, l5);
  detail = "alpha " + fmt("%.0e", alpha) + ", final " + fmt("%.4g", l1) +
           " (r=1) vs " + fmt("%.4g", l5) + " (r=5), rel " + fmt("%.3g", rel) +
           ", staleness retriangulations " +
           std::to_string(r1.staleness_retriangulations) + "/" +
           std::to_string(r5.staleness_retriangulations);
  return rel <= 0.10;
}

// --- criterion 6: hospital experiment ---------------------------------------

bool criterion_hospital(std::string& detail) {
  const SinusoidDensity rho;
  const std::vector<Vec2> square = unit_square().vertices();
  const double mc = oracles::mc_integral(
      square, [&](Vec2 p) { return rho.value(p); }, 1000000, 40);
  const double mc_err = std::abs(mc - 2.3678);
  const bool mc_ok = mc_err <= 0.003;

  double mean_initial = 0.0, mean_final = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const std::vector<Vec2> pts = generate_sites(10, seed, unit_square());
    RunConfig rc;
    rc.boundary = unit_square();
    rc.schedule = {400, 1};
    rc.adam.alpha = 1e-3;
    rc.clamp_to_boundary = true;
    rc.loss.kind = LossKind::kHospitalMse;
    rc.loss.density = std::make_shared<SinusoidDensity>();
    Pcg32 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    rc.loss.capacities =
        generate_capacities(10, rng, kHospitalTotalPopulation);
    const RunResult res = run_optimization(SiteSnapshot{pts}, rc);
    mean_initial += res.loss_trace.front() / 5.0;
    mean_final += res.loss_trace.back() / 5.0;
  }
  const double reduction = mean_initial / mean_final;
  detail = "MC total " + fmt("%.5f", mc) + " (err " + fmt("%.4f", mc_err) +
           "), loss reduction x" + fmt("%.1f", reduction) + " over 5 seeds";
  return mc_ok && reduction >= 10.0;
}

// --- criterion 7: Delaunay audit --------------------------------------------

bool criterion_delaunay(std::string& detail) {
  double worst = -1.0;
  bool hull_ok = true;
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    const int n = seed == 1 ? 50 : (seed == 2 ? 120 : 200);
    const std::vector<Vec2> pts = oracles::random_points(n, seed);
    const Triangulation tri = triangulate(SiteSnapshot{pts});
    worst = std::max(worst, oracles::max_incircle_violation(tri, pts));

    const std::vector<std::uint32_t> expected = oracles::gift_wrap_hull(pts);
    bool match = tri.hull.size() == expected.size();
    if (match) {
      const auto pivot =
          std::find(tri.hull.begin(), tri.hull.end(), expected.front());
      match = pivot != tri.hull.end();
      if (match) {
        std::vector<std::uint32_t> rotated(pivot, tri.hull.end());
        rotated.insert(rotated.end(), tri.hull.begin(), pivot);
        match = rotated == expected;
      }
    }
    hull_ok = hull_ok && match;
  }
  detail = "max incircle violation " + fmt("%.2g", worst) + ", hulls " +
           (hull_ok ? "match gift wrapping" : "MISMATCH");
  return worst <= 1e-9 && hull_ok;
}

// --- criterion 8: determinism ------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool criterion_determinism(std::string& detail) {
  const fs::path dir = fs::temp_directory_path() / "diffvor_acceptance_det";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const auto config = [&](const std::string& out) {
    return std::string("{\"n_points\": 30, \"seed\": 5, \"steps\": 40, "
                       "\"learning_rate\": 0.001, \"clamp_to_boundary\": true, "
                       "\"boundary\": [[0,0],[1,0],[1,1],[0,1]], "
                       "\"out_dir\": \"") +
           out + "\"}";
  };
  {
    std::ofstream a(dir / "a.json");
    a << config((dir / "a").string());
    std::ofstream b(dir / "b.json");
    b << config((dir / "b").string());
  }
  const auto run = [&](const std::string& cfg) {
    const std::string cmd = std::string(DIFFVOR_BIN) +
                            " variance_bounded --config " + cfg +
                            " >/dev/null 2>&1";
    return WEXITSTATUS(std::system(cmd.c_str()));
  };
  if (run((dir / "a.json").string()) != 0 ||
      run((dir / "b.json").string()) != 0) {
    detail = "CLI run failed";
    return false;
  }
  int compared = 0;
  for (const char* name :
       {"results.json", "loss.csv", "before.svg", "after.svg",
        "loss_curve.svg"}) {
    if (slurp(dir / "a" / name) != slurp(dir / "b" / name)) {
      detail = std::string(name) + " differs between runs";
      return false;
    }
    ++compared;
  }
  detail = std::to_string(compared) + " artifacts byte-identical";
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  bool desk = false;
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--desk") == 0) desk = true;
    if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) {
      only = std::atoi(argv[i + 1]);
    }
  }

  struct Criterion {
    int id;
    const char* name;
    std::function<bool(std::string&)> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "gradient fidelity (bounded variance + hospital, 10 seeds)",
       criterion_gradients},
      {2, "partition of area (N = 10, 100, 1000)", criterion_partition},
      {3, "half-plane oracle equivalence (N = 5..12)", criterion_oracle},
      {4, "bounded variance experiment (mean area, variance ratio, MA)",
       [&](std::string& d) { return criterion_variance_experiment(d, desk); }},
      {5, "retriangulation robustness (r = 1 vs r = 5)",
       criterion_retriangulation},
      {6, "hospital experiment (MC total + 10x loss reduction)",
       criterion_hospital},
      {7, "Delaunay audit (incircle + gift-wrap hulls)", criterion_delaunay},
      {8, "artifact determinism (byte-identical reruns)",
       criterion_determinism},
  };

  int failures = 0;
  for (const Criterion& c : criteria) {
    if (only != 0 && c.id != only) continue;
    std::string detail;
    bool ok = false;
    try {
      ok = c.run(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    std::printf("[%s] criterion %d: %s (%s)\n", ok ? "PASS" : "FAIL", c.id,
                c.name, detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
  }
  return failures;
}
