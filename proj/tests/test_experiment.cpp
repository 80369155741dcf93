#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "homog/experiment.hpp"

using namespace homog;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kTinyConfig = R"(
# tiny smoke experiment
name = tiny
d = 2
geometry = square
rho = 10.0
methods = ga, gani, gani-bound, fem-p1
ffth_grids = 5, 15
fem_meshes = 10
rtol = 1e-10
seed = 7
)";

}  // namespace

TEST_CASE("config parsing round-trips through the canonical text") {
  auto c = parse_config(kTinyConfig);
  CHECK(c.name == "tiny");
  CHECK(c.d == 2);
  CHECK(c.geometry == Geometry::Square);
  CHECK(c.methods.size() == 4);
  CHECK(c.ffth_grids == std::vector<int>{5, 15});
  CHECK(c.seed == 7);
  // Reparsing the canonical text yields the same canonical text.
  auto c2 = parse_config(canonical_text(c));
  CHECK(canonical_text(c2) == canonical_text(c));
}

TEST_CASE("unknown keys and malformed values are rejected") {
  CHECK_THROWS_AS(parse_config("name = x\nwhatever = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("d = two\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("methods = ga\nffth_grids = 6\nd = 2\n"), ConfigError);
  // Even spectral grids are rejected.
  CHECK_THROWS_AS(parse_config("methods = ga\nffth_grids = 4, 5\n"), ConfigError);
  // Square FEM meshes must align with the interfaces.
  CHECK_THROWS_AS(parse_config("methods = fem-p1\nfem_meshes = 12\ngeometry = square\n"),
                  ConfigError);
}

TEST_CASE("preflight reports every scheduled system") {
  auto c = parse_config(kTinyConfig);
  auto est = preflight(c);
  // ga x2, gani/bound x2 (shared accounting rows), fem x1
  CHECK(est.size() == 7);
  for (const auto& e : est) CHECK(e.bytes > 0);
}

TEST_CASE("infeasible schedules abort with the offending systems listed") {
  auto c = parse_config(kTinyConfig);
  c.memory_limit_gb = 1e-6;
  CHECK_THROWS_AS(run_experiment(c, 1), InfeasibleError);
  try {
    run_experiment(c, 1);
  } catch (const InfeasibleError& e) {
    CHECK(!e.offending.empty());
  }
}

TEST_CASE("experiment runs produce finalized reports with the bound chain") {
  auto c = parse_config(kTinyConfig);
  auto outcome = run_experiment(c, 2);
  CHECK(outcome.reference_source == "pinned");
  CHECK(outcome.reports.size() == 7);  // ga x2 + gani x2 + bound x2 + fem x1
  for (const auto& r : outcome.reports) {
    if (r.method == Method::FfthGaNi) continue;
    CHECK(r.sq_error >= 0.0);
    CHECK_FALSE(r.bound_violation);
  }
  // Rows arrive in canonical order: methods grouped, N ascending.
  CHECK(outcome.reports[0].method == Method::FfthGa);
  CHECK(outcome.reports[0].n == 5);
  CHECK(outcome.reports[1].n == 15);
}

TEST_CASE("same config and seed give byte-identical outputs") {
  namespace fs = std::filesystem;
  auto c = parse_config(kTinyConfig);
  c.ffth_grids = {5};
  c.methods = {Method::FfthGa, Method::FfthGaNi};
  c.traces = true;

  const auto dir1 = fs::temp_directory_path() / "homog_exp_a";
  const auto dir2 = fs::temp_directory_path() / "homog_exp_b";
  fs::remove_all(dir1);
  fs::remove_all(dir2);
  for (const auto& dir : {dir1, dir2}) {
    auto outcome = run_experiment(c, 2);
    emit_reports(outcome.reports, outcome.trace_series, dir.string(),
                 config_hash(canonical_text(c)));
  }
  for (const char* name : {"report.csv", "error_vs_iteration.csv", "summary.json"})
    CHECK(slurp(dir1 / name) == slurp(dir2 / name));
  fs::remove_all(dir1);
  fs::remove_all(dir2);
}

TEST_CASE("zero contrast runs report the base coefficient for every method") {
  ExperimentConfig c;
  c.name = "flat";
  c.d = 2;
  c.geometry = Geometry::Pyramid;
  c.rho = 0.0;
  c.methods = {Method::FfthGa, Method::FfthGaNi, Method::FfthGaNiBound, Method::FemP1,
               Method::FemP2};
  c.ffth_grids = {5};
  c.fem_meshes = {4};  // multiples of 10 are only needed when there is an interface
  c.reference = "1.75";
  auto outcome = run_experiment(c, 1);
  for (const auto& r : outcome.reports) {
    CHECK(r.value == doctest::Approx(1.75).epsilon(1e-12));
    CHECK(std::abs(r.sq_error) < 1e-12);
  }
  CHECK(outcome.reference_source == "explicit");
}

TEST_CASE("voxel synthetic config generates its input from the seed") {
  namespace fs = std::filesystem;
  ExperimentConfig c;
  c.name = "vox";
  c.d = 2;
  c.geometry = Geometry::Voxel;
  c.voxel_synthetic = true;
  c.voxel_resolution = 9;
  c.methods = {Method::FfthGa, Method::FfthGaNi, Method::FfthGaNiBound};
  c.ffth_grids = {5, 7, 9};
  c.reference = "fit";
  c.seed = 11;

  const auto dir = fs::temp_directory_path() / "homog_exp_vox";
  fs::remove_all(dir);
  auto outcome = run_experiment(c, 2, dir.string());
  CHECK(fs::exists(dir / "voxel.json"));
  CHECK(fs::exists(dir / "voxel.raw"));
  // ga runs on every grid, collocation only at the image resolution.
  int gani_rows = 0, ga_rows = 0, bound_rows = 0;
  for (const auto& r : outcome.reports) {
    if (r.method == Method::FfthGaNi) {
      ++gani_rows;
      CHECK(r.n == 9);
    }
    if (r.method == Method::FfthGa) ++ga_rows;
    if (r.method == Method::FfthGaNiBound) ++bound_rows;
  }
  CHECK(ga_rows == 3);
  CHECK(gani_rows == 1);
  CHECK(bound_rows == 1);
  fs::remove_all(dir);
}

TEST_CASE("presets are stable, documented and feasible") {
  const auto& all = presets();
  CHECK(all.size() == 8);
  std::vector<std::string> names;
  for (const auto& p : all) {
    names.push_back(p.name);
    CHECK_FALSE(p.description.empty());
    for (const auto& c : p.configs) {
      CHECK_NOTHROW(validate(c));
      // Desk-scale feasibility under the default limit.
      for (const auto& e : preflight(c))
        CHECK(static_cast<double>(e.bytes) < c.memory_limit_gb * 1024.0 * 1024.0 * 1024.0);
    }
  }
  for (const char* expected : {"fig3-2d", "fig3-3d", "fig45-cond", "fig6-cg", "fig7-ops",
                               "circle", "voxel-synthetic", "table-aeff"})
    CHECK(std::find(names.begin(), names.end(), expected) != names.end());
  CHECK(find_preset("fig3-2d") != nullptr);
  CHECK(find_preset("nope") == nullptr);
}
