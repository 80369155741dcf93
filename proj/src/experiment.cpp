#include "homog/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include "homog/common.hpp"
#include "homog/fem.hpp"
#include "homog/ffth.hpp"
#include "homog/voxel_io.hpp"

namespace homog {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument("");
    return v;
  } catch (...) {
    throw ConfigError("config: bad number for '" + key + "': " + value);
  }
}

std::int64_t parse_int(const std::string& key, const std::string& value) {
  std::int64_t v = 0;
  const auto res = std::from_chars(value.data(), value.data() + value.size(), v);
  if (res.ec != std::errc{} || res.ptr != value.data() + value.size())
    throw ConfigError("config: bad integer for '" + key + "': " + value);
  return v;
}

bool parse_switch(const std::string& key, const std::string& value) {
  if (value == "on" || value == "true" || value == "1") return true;
  if (value == "off" || value == "false" || value == "0") return false;
  throw ConfigError("config: bad switch for '" + key + "': " + value + " (use on/off)");
}

Method parse_method(const std::string& value) {
  if (value == "ga" || value == "ffth-ga") return Method::FfthGa;
  if (value == "gani" || value == "ffth-gani") return Method::FfthGaNi;
  if (value == "gani-bound" || value == "ffth-gani-bound") return Method::FfthGaNiBound;
  if (value == "fem-p1") return Method::FemP1;
  if (value == "fem-p2") return Method::FemP2;
  throw ConfigError("config: unknown method '" + value + "'");
}

Geometry parse_geometry(const std::string& value) {
  if (value == "square") return Geometry::Square;
  if (value == "pyramid") return Geometry::Pyramid;
  if (value == "circle") return Geometry::Circle;
  if (value == "voxel") return Geometry::Voxel;
  throw ConfigError("config: unknown geometry '" + value + "'");
}

bool has_method(const ExperimentConfig& c, Method m) {
  return std::find(c.methods.begin(), c.methods.end(), m) != c.methods.end();
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig c;
  c.methods.clear();
  std::stringstream ss(text);
  std::string line;
  int line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));

    if (key == "name") {
      c.name = value;
    } else if (key == "d") {
      c.d = static_cast<int>(parse_int(key, value));
    } else if (key == "geometry") {
      c.geometry = parse_geometry(value);
    } else if (key == "rho") {
      c.rho = parse_double(key, value);
    } else if (key == "radius") {
      c.circle_radius = parse_double(key, value);
    } else if (key == "voxel_header") {
      c.voxel_header = value;
    } else if (key == "voxel_synthetic") {
      c.voxel_synthetic = parse_switch(key, value);
    } else if (key == "voxel_resolution") {
      c.voxel_resolution = static_cast<int>(parse_int(key, value));
    } else if (key == "voxel_conductivities") {
      const auto items = split_list(value);
      if (items.size() != 2) throw ConfigError("config: voxel_conductivities needs two values");
      c.voxel_conductivity0 = parse_double(key, items[0]);
      c.voxel_conductivity1 = parse_double(key, items[1]);
    } else if (key == "methods") {
      for (const auto& item : split_list(value)) c.methods.push_back(parse_method(item));
    } else if (key == "ffth_grids") {
      for (const auto& item : split_list(value))
        c.ffth_grids.push_back(static_cast<int>(parse_int(key, item)));
    } else if (key == "fem_meshes") {
      for (const auto& item : split_list(value))
        c.fem_meshes.push_back(static_cast<int>(parse_int(key, item)));
    } else if (key == "rtol") {
      c.rtol = parse_double(key, value);
    } else if (key == "maxit") {
      c.max_iterations = parse_int(key, value);
    } else if (key == "precond") {
      c.precondition = parse_switch(key, value);
    } else if (key == "kappa") {
      c.estimate_kappa = parse_switch(key, value);
    } else if (key == "kappa_iters") {
      c.kappa_iterations = static_cast<int>(parse_int(key, value));
    } else if (key == "traces") {
      c.traces = parse_switch(key, value);
    } else if (key == "reference") {
      c.reference = value;
    } else if (key == "seed") {
      c.seed = static_cast<std::uint64_t>(parse_int(key, value));
    } else if (key == "mem_limit_gb") {
      c.memory_limit_gb = parse_double(key, value);
    } else {
      throw ConfigError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
  }
  validate(c);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string canonical_text(const ExperimentConfig& c) {
  std::stringstream out;
  out.precision(17);
  out << "name = " << c.name << "\n";
  out << "d = " << c.d << "\n";
  out << "geometry = " << geometry_label(c.geometry) << "\n";
  out << "rho = " << c.rho << "\n";
  if (c.geometry == Geometry::Circle) out << "radius = " << c.circle_radius << "\n";
  if (c.geometry == Geometry::Voxel) {
    if (!c.voxel_header.empty()) out << "voxel_header = " << c.voxel_header << "\n";
    out << "voxel_synthetic = " << (c.voxel_synthetic ? "on" : "off") << "\n";
    out << "voxel_resolution = " << c.voxel_resolution << "\n";
    out << "voxel_conductivities = " << c.voxel_conductivity0 << ", " << c.voxel_conductivity1
        << "\n";
  }
  out << "methods = ";
  for (std::size_t i = 0; i < c.methods.size(); ++i)
    out << (i ? ", " : "") << method_label(c.methods[i]);
  out << "\n";
  out << "ffth_grids = ";
  for (std::size_t i = 0; i < c.ffth_grids.size(); ++i) out << (i ? ", " : "") << c.ffth_grids[i];
  out << "\n";
  out << "fem_meshes = ";
  for (std::size_t i = 0; i < c.fem_meshes.size(); ++i) out << (i ? ", " : "") << c.fem_meshes[i];
  out << "\n";
  out << "rtol = " << c.rtol << "\n";
  out << "maxit = " << c.max_iterations << "\n";
  out << "precond = " << (c.precondition ? "on" : "off") << "\n";
  out << "kappa = " << (c.estimate_kappa ? "on" : "off") << "\n";
  out << "kappa_iters = " << c.kappa_iterations << "\n";
  out << "traces = " << (c.traces ? "on" : "off") << "\n";
  out << "reference = " << c.reference << "\n";
  out << "seed = " << c.seed << "\n";
  return out.str();
}

void validate(const ExperimentConfig& c) {
  if (c.d != 2 && c.d != 3) throw ConfigError("config: d must be 2 or 3");
  if (c.methods.empty()) throw ConfigError("config: no methods selected");
  if (c.rho < 0.0) throw ConfigError("config: rho must be nonnegative");
  if (c.rtol <= 0.0 || c.rtol >= 1.0) throw ConfigError("config: rtol must lie in (0, 1)");

  const bool wants_ffth = has_method(c, Method::FfthGa) || has_method(c, Method::FfthGaNi) ||
                          has_method(c, Method::FfthGaNiBound);
  const bool wants_fem = has_method(c, Method::FemP1) || has_method(c, Method::FemP2);
  if (wants_ffth && c.ffth_grids.empty())
    throw ConfigError("config: spectral methods selected but ffth_grids is empty");
  if (wants_fem && c.fem_meshes.empty())
    throw ConfigError("config: fem methods selected but fem_meshes is empty");

  for (int n : c.ffth_grids) {
    if (n < 3 || n % 2 == 0)
      throw ConfigError("config: ffth grids must be odd and at least 3, got " +
                        std::to_string(n));
  }
  for (int n : c.fem_meshes) {
    if (n < 2) throw ConfigError("config: fem meshes need at least 2 cells per axis");
    if ((c.geometry == Geometry::Square || c.geometry == Geometry::Pyramid) && c.rho != 0.0 &&
        n % 10 != 0)
      throw ConfigError("config: square/pyramid fem meshes must be multiples of 10, got " +
                        std::to_string(n));
  }

  if (c.geometry == Geometry::Circle && !(c.circle_radius > 0.0 && c.circle_radius < 0.5))
    throw ConfigError("config: circle radius must lie in (0, 1/2)");

  if (c.geometry == Geometry::Voxel) {
    if (c.voxel_header.empty() && !c.voxel_synthetic)
      throw ConfigError("config: voxel geometry needs voxel_header or voxel_synthetic = on");
    if (c.voxel_synthetic && (c.voxel_resolution < 3 || c.voxel_resolution % 2 == 0))
      throw ConfigError("config: synthetic voxel resolution must be odd and at least 3");
    const bool wants_gani = has_method(c, Method::FfthGaNi) || has_method(c, Method::FfthGaNiBound);
    if (wants_gani && c.voxel_synthetic &&
        std::find(c.ffth_grids.begin(), c.ffth_grids.end(), c.voxel_resolution) ==
            c.ffth_grids.end())
      throw ConfigError(
          "config: gani samples at the image resolution; add it to ffth_grids");
    for (int n : c.fem_meshes)
      if (c.voxel_synthetic && n % c.voxel_resolution != 0)
        throw ConfigError("config: voxel fem meshes must be multiples of the resolution");
  }
}

namespace {

std::int64_t ipow(std::int64_t base, int exp) {
  std::int64_t r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

std::int64_t fem_nnz_estimate(int d, int p, std::int64_t n_dofs) {
  // Full-pattern nonzeros per row for the regular simplicial meshes.
  const int row = d == 2 ? (p == 1 ? 7 : 19) : (p == 1 ? 15 : 50);
  return n_dofs * row;
}

}  // namespace

std::vector<MemoryEstimate> preflight(const ExperimentConfig& c) {
  std::vector<MemoryEstimate> out;
  for (Method m : {Method::FfthGa, Method::FfthGaNi, Method::FfthGaNiBound, Method::FemP1,
                   Method::FemP2}) {
    if (!has_method(c, m)) continue;
    if (m == Method::FfthGa || m == Method::FfthGaNi || m == Method::FfthGaNiBound) {
      for (int n : c.ffth_grids) {
        const std::int64_t cells =
            m == Method::FfthGa ? ipow(2 * n - 1, c.d) : ipow(n, c.d);
        // Material blocks + solver fields (real) + packed spectra (complex).
        const std::int64_t bytes =
            8 * cells * (c.d * c.d + 6 * c.d) + 16 * cells * (c.d + 1);
        out.push_back({m, n, 0, bytes});
      }
    } else {
      const int p = m == Method::FemP1 ? 1 : 2;
      for (int n : c.fem_meshes) {
        const std::int64_t dofs = ipow(static_cast<std::int64_t>(p) * n, c.d) - 1;
        const std::int64_t nnz = fem_nnz_estimate(c.d, p, dofs);
        // CSR (values + columns + rows), solver vectors, triangular factor,
        // and the triplet buffer that dominates during assembly.
        std::int64_t bytes = nnz * 16 + dofs * 8 * 8 + nnz * 12 + nnz * 24;
        out.push_back({m, n, p, bytes});
      }
    }
  }
  return out;
}

namespace {

struct Task {
  enum Kind { Ga, GaNi, Fem } kind;
  int n = 0;
  int order = 0;
};

struct TaskResult {
  std::vector<ExperimentReport> rows;
  std::vector<TraceSeries> traces;
};

MaterialSpec build_material(const ExperimentConfig& c, const std::string& out_dir) {
  switch (c.geometry) {
    case Geometry::Square: return MaterialSpec::square(c.d, c.rho);
    case Geometry::Pyramid: return MaterialSpec::pyramid(c.d, c.rho);
    case Geometry::Circle: return MaterialSpec::circle(c.d, c.rho, c.circle_radius);
    case Geometry::Voxel: {
      if (!c.voxel_header.empty()) return MaterialSpec::voxel(load_voxel(c.voxel_header));
      if (out_dir.empty())
        return MaterialSpec::voxel(synthetic_voxel(c.d, c.voxel_resolution, c.seed,
                                                   c.voxel_conductivity0, c.voxel_conductivity1));
      // Write the generated input through the external format and read it
      // back, so the run exercises the same path as real data.
      const std::string header =
          write_synthetic_voxel(out_dir, c.d, c.voxel_resolution, c.seed, c.voxel_conductivity0,
                                c.voxel_conductivity1);
      return MaterialSpec::voxel(load_voxel(header));
    }
  }
  throw ConfigError("config: unsupported geometry");
}

GridShape cube_shape(int d, int n) {
  std::array<int, 3> dims{n, n, n};
  return GridShape{std::span<const int>(dims.data(), d)};
}

std::vector<double> macro_vector(int d) {
  std::vector<double> e(d, 0.0);
  e[0] = 1.0;
  return e;
}

TraceSeries make_series(const ExperimentReport& run, const IterationTrace& trace) {
  TraceSeries t;
  t.run = run;
  const double converged = trace.samples.back().energy_value;
  for (const auto& s : trace.samples) {
    t.residuals.push_back(s.residual_norm);
    t.values.push_back(s.energy_value);
  }
  t.algebraic_errors = algebraic_error_trace(trace, converged);
  return t;
}

}  // namespace

RunOutcome run_experiment(const ExperimentConfig& config, int threads,
                          const std::string& out_dir) {
  validate(config);

  // Feasibility gate before any allocation.
  const auto estimates = preflight(config);
  const double limit_bytes = config.memory_limit_gb * 1024.0 * 1024.0 * 1024.0;
  std::vector<MemoryEstimate> offending;
  for (const auto& e : estimates)
    if (static_cast<double>(e.bytes) > limit_bytes) offending.push_back(e);
  if (!offending.empty())
    throw InfeasibleError("experiment: schedule exceeds the memory limit", std::move(offending));

  const MaterialSpec spec = build_material(config, out_dir);
  const std::vector<double> macro = macro_vector(config.d);

  // Task list in canonical order.
  std::vector<Task> tasks;
  if (has_method(config, Method::FfthGa))
    for (int n : config.ffth_grids) tasks.push_back({Task::Ga, n, 0});
  if (has_method(config, Method::FfthGaNi) || has_method(config, Method::FfthGaNiBound)) {
    for (int n : config.ffth_grids) {
      if (config.geometry == Geometry::Voxel &&
          !(spec.voxel_image()->resolution == cube_shape(config.d, n)))
        continue;  // collocation samples exist only at the image resolution
      tasks.push_back({Task::GaNi, n, 0});
    }
  }
  for (int p : {1, 2}) {
    if (!has_method(config, p == 1 ? Method::FemP1 : Method::FemP2)) continue;
    for (int n : config.fem_meshes) tasks.push_back({Task::Fem, n, p});
  }

  CgOptions cg_opt;
  cg_opt.rtol = config.rtol;
  cg_opt.max_iterations = config.max_iterations;

  auto run_task = [&](const Task& task) -> TaskResult {
    TaskResult result;
    ExperimentReport row;
    row.d = config.d;
    row.n = task.n;
    row.rho = config.rho;
    row.geometry = config.geometry;
    row.kappa = std::numeric_limits<double>::quiet_NaN();

    if (task.kind == Task::Ga || task.kind == Task::GaNi) {
      const FfthVariant variant = task.kind == Task::Ga ? FfthVariant::Ga : FfthVariant::GaNi;
      const GridShape n_grid = cube_shape(config.d, task.n);
      auto solve = solve_ffth(spec, n_grid, variant, macro, cg_opt);
      row.size = system_size(config.d, task.n, variant);
      row.iterations = solve.trace.iterations();
      if (config.estimate_kappa) {
        auto op = FfthOperator::make(spec, n_grid, variant);
        row.kappa = ffth_condition_estimate(op, config.kappa_iterations, config.seed)
                        .condition_estimate();
      }
      if (task.kind == Task::Ga) {
        row.method = Method::FfthGa;
        row.value = solve.homogenized;
        row.memory = memory_count_ffth(Method::FfthGa, config.d, task.n);
        row.ops = matvec_ops_ffth(Method::FfthGa, config.d, task.n);
        result.rows.push_back(row);
        if (config.traces) result.traces.push_back(make_series(row, solve.trace));
      } else {
        row.memory = memory_count_ffth(Method::FfthGaNi, config.d, task.n);
        row.ops = matvec_ops_ffth(Method::FfthGaNi, config.d, task.n);
        if (has_method(config, Method::FfthGaNi)) {
          row.method = Method::FfthGaNi;
          row.value = solve.homogenized;
          result.rows.push_back(row);
          if (config.traces) result.traces.push_back(make_series(row, solve.trace));
        }
        if (has_method(config, Method::FfthGaNiBound)) {
          row.method = Method::FfthGaNiBound;
          row.value = gani_posteriori_bound(spec, n_grid, solve.minimiser, macro);
          result.rows.push_back(row);
        }
      }
      return result;
    }

    FemSpace space(build_mesh(config.d, task.n), task.order);
    AssembledSystem sys = assemble(space, spec, macro);
    auto solve = solve_assembled(sys, config.precondition, cg_opt);
    CsrStats stats{sys.matrix.n, sys.matrix.nnz_symmetric()};

    row.method = task.order == 1 ? Method::FemP1 : Method::FemP2;
    row.order = task.order;
    row.value = solve.homogenized;
    row.size = space.dof_count();
    row.memory = memory_count_fem(stats);
    row.ops = matvec_ops_fem(stats, config.precondition);
    row.iterations = solve.trace.iterations();
    if (config.estimate_kappa) {
      if (config.precondition) {
        IcPreconditioner m = ic0_factor_shifted(sys.matrix);
        LinearOperator pop;
        pop.dim = sys.matrix.n;
        pop.apply = [&sys, &m](std::span<const double> x, std::span<double> y) {
          std::vector<double> ax(sys.matrix.n);
          sys.matrix.multiply(x, ax);
          m.solve(ax, y);
        };
        pop.inner = [&sys, &m](std::span<const double> x, std::span<const double> y) {
          std::vector<double> my(sys.matrix.n);
          m.multiply(y, my);
          double s = 0.0;
          for (std::int64_t i = 0; i < sys.matrix.n; ++i) s += x[i] * my[i];
          return s;
        };
        row.kappa =
            lanczos_extremes(pop, config.kappa_iterations, config.seed).condition_estimate();
      } else {
        row.kappa = lanczos_extremes(csr_operator(sys.matrix), config.kappa_iterations,
                                     config.seed)
                        .condition_estimate();
      }
    }
    result.rows.push_back(row);
    if (config.traces) result.traces.push_back(make_series(row, solve.trace));
    return result;
  };

  // Bounded pool; results land in task order no matter who finishes first.
  std::vector<TaskResult> results(tasks.size());
  std::vector<std::exception_ptr> errors(tasks.size());
  {
    std::atomic<std::size_t> next{0};
    const int workers = std::max(1, std::min<int>(threads, static_cast<int>(tasks.size())));
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (;;) {
          const std::size_t i = next.fetch_add(1);
          if (i >= tasks.size()) return;
          try {
            results[i] = run_task(tasks[i]);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  RunOutcome outcome;
  for (auto& r : results) {
    for (auto& row : r.rows) outcome.reports.push_back(std::move(row));
    for (auto& t : r.traces) outcome.trace_series.push_back(std::move(t));
  }

  // Reference resolution: explicit number, pinned table, fit on the best
  // upper-bound series, or the smallest bound value as a last resort.
  double reference = 0.0;
  std::string source;
  const auto pinned = reference_value_for(config.d, config.geometry, config.rho);
  auto fit_series = [&](Method m) -> std::optional<double> {
    std::vector<FitPoint> pts;
    for (const auto& row : outcome.reports)
      if (row.method == m) pts.push_back({static_cast<double>(row.n), row.value});
    if (pts.size() < 3) return std::nullopt;
    return extrapolate_reference(pts).a_eff;
  };
  auto fit_any = [&]() -> std::optional<std::pair<double, std::string>> {
    for (Method m : {Method::FfthGa, Method::FemP2, Method::FemP1}) {
      if (auto v = fit_series(m)) return std::make_pair(*v, std::string("fit"));
    }
    return std::nullopt;
  };

  if (config.reference == "pinned") {
    if (!pinned) throw ConfigError("config: no pinned reference for this parameter set");
    reference = *pinned;
    source = "pinned";
  } else if (config.reference == "fit") {
    auto f = fit_any();
    if (!f) throw ConfigError("config: reference = fit needs a series of at least 3 grids");
    reference = f->first;
    source = f->second;
  } else if (config.reference == "auto") {
    if (pinned) {
      reference = *pinned;
      source = "pinned";
    } else if (auto f = fit_any()) {
      reference = f->first;
      source = f->second;
    } else {
      reference = std::numeric_limits<double>::infinity();
      for (const auto& row : outcome.reports)
        if (row.method != Method::FfthGaNi) reference = std::min(reference, row.value);
      source = "min-upper-bound";
    }
  } else {
    reference = parse_double("reference", config.reference);
    source = "explicit";
  }

  outcome.reference_value = reference;
  outcome.reference_source = source;
  for (auto& row : outcome.reports) {
    row.reference = reference;
    row.reference_source = source;
    finalize_error(row);
  }
  for (auto& t : outcome.trace_series) {
    t.run.reference = reference;
    t.run.reference_source = source;
    finalize_error(t.run);
  }
  return outcome;
}

namespace {

ExperimentConfig base_config(const std::string& name, int d, Geometry g, double rho) {
  ExperimentConfig c;
  c.name = name;
  c.d = d;
  c.geometry = g;
  c.rho = rho;
  return c;
}

std::vector<Preset> make_presets() {
  std::vector<Preset> out;

  {
    Preset p;
    p.name = "fig3-2d";
    p.description = "2-D error vs system size/memory, square and pyramid, rho = 100";
    for (Geometry g : {Geometry::Square, Geometry::Pyramid}) {
      auto c = base_config(std::string("fig3-2d-") + geometry_label(g), 2, g, 100.0);
      c.methods = {Method::FfthGa, Method::FfthGaNi, Method::FfthGaNiBound, Method::FemP1,
                   Method::FemP2};
      c.ffth_grids = {5, 15, 45, 135};
      c.fem_meshes = {10, 20, 40, 80};
      p.configs.push_back(c);
    }
    out.push_back(p);
  }
  {
    Preset p;
    p.name = "fig3-3d";
    p.description = "3-D error vs system size/memory (small schedules), rho = 100";
    for (Geometry g : {Geometry::Square, Geometry::Pyramid}) {
      auto c = base_config(std::string("fig3-3d-") + geometry_label(g), 3, g, 100.0);
      c.methods = {Method::FfthGa, Method::FfthGaNi, Method::FfthGaNiBound, Method::FemP1,
                   Method::FemP2};
      c.ffth_grids = {5, 15, 45};
      c.fem_meshes = {10, 20};
      p.configs.push_back(c);
    }
    out.push_back(p);
  }
  {
    Preset p;
    p.name = "fig45-cond";
    p.description = "condition-number study over N, with and without IC(0)";
    for (Geometry g : {Geometry::Square, Geometry::Pyramid}) {
      for (double rho : {10.0, 100.0}) {
        const std::string stem =
            std::string("fig45-cond-") + geometry_label(g) + (rho == 10.0 ? "-rho10" : "-rho100");
        auto cs = base_config(stem + "-spectral", 2, g, rho);
        cs.methods = {Method::FfthGaNi};
        cs.ffth_grids = {15, 45, 135};
        cs.estimate_kappa = true;
        cs.kappa_iterations = 100;
        p.configs.push_back(cs);

        // The ill-conditioned end of the unpreconditioned stiffness spectrum
        // needs a larger Ritz budget than the spectral operators.
        auto c = base_config(stem + "-plain", 2, g, rho);
        c.methods = {Method::FemP1};
        c.fem_meshes = {10, 20, 40};
        c.estimate_kappa = true;
        c.precondition = false;
        c.kappa_iterations = 400;
        p.configs.push_back(c);

        auto cp = base_config(stem + "-ic0", 2, g, rho);
        cp.methods = {Method::FemP1};
        cp.fem_meshes = {10, 20, 40};
        cp.estimate_kappa = true;
        cp.precondition = true;
        cp.kappa_iterations = 400;
        p.configs.push_back(cp);
      }
    }
    out.push_back(p);
  }
  {
    Preset p;
    p.name = "fig6-cg";
    p.description = "algebraic error along CG iterations at matched accuracy";
    for (double rho : {10.0, 100.0}) {
      const std::string suffix = rho == 10.0 ? "-rho10" : "-rho100";
      auto c2 = base_config("fig6-cg-2d" + suffix, 2, Geometry::Pyramid, rho);
      c2.methods = {Method::FfthGa};
      c2.ffth_grids = {135};
      c2.traces = true;
      c2.rtol = 1e-10;
      p.configs.push_back(c2);
      auto f2 = c2;
      f2.name = "fig6-cg-2d-fem" + suffix;
      f2.methods = {Method::FemP1};
      f2.ffth_grids.clear();
      f2.fem_meshes = {80};
      f2.precondition = false;
      p.configs.push_back(f2);
      auto f2p = f2;
      f2p.name = "fig6-cg-2d-fem-ic0" + suffix;
      f2p.precondition = true;
      p.configs.push_back(f2p);

      auto c3 = base_config("fig6-cg-3d" + suffix, 3, Geometry::Pyramid, rho);
      c3.methods = {Method::FfthGa};
      c3.ffth_grids = {45};
      c3.traces = true;
      p.configs.push_back(c3);
      auto f3 = c3;
      f3.name = "fig6-cg-3d-fem" + suffix;
      f3.methods = {Method::FemP1};
      f3.ffth_grids.clear();
      f3.fem_meshes = {20};
      f3.precondition = false;
      p.configs.push_back(f3);
      auto f3p = f3;
      f3p.name = "fig6-cg-3d-fem-ic0" + suffix;
      f3p.precondition = true;
      p.configs.push_back(f3p);
    }
    out.push_back(p);
  }
  {
    Preset p;
    p.name = "fig7-ops";
    p.description = "error vs matrix-vector operation counts";
    for (Geometry g : {Geometry::Square, Geometry::Pyramid}) {
      auto c = base_config(std::string("fig7-ops-") + geometry_label(g), 2, g, 100.0);
      c.methods = {Method::FfthGa, Method::FfthGaNi, Method::FfthGaNiBound, Method::FemP1,
                   Method::FemP2};
      c.ffth_grids = {5, 15, 45};
      c.fem_meshes = {10, 20, 40};
      p.configs.push_back(c);
    }
    out.push_back(p);
  }
  {
    Preset p;
    p.name = "circle";
    p.description = "circular inclusion with outer FEM assignment";
    auto c = base_config("circle", 2, Geometry::Circle, 10.0);
    c.circle_radius = 0.25;
    c.methods = {Method::FfthGa, Method::FfthGaNi, Method::FfthGaNiBound, Method::FemP1,
                 Method::FemP2};
    c.ffth_grids = {5, 15, 45, 135};
    c.fem_meshes = {10, 20, 40};
    c.reference = "fit";
    p.configs.push_back(c);
    out.push_back(p);
  }
  {
    Preset p;
    p.name = "voxel-synthetic";
    p.description = "seeded synthetic voxel image at resolution 45^3";
    auto c = base_config("voxel-synthetic", 3, Geometry::Voxel, 1.0);
    c.voxel_synthetic = true;
    c.voxel_resolution = 45;
    c.methods = {Method::FfthGa, Method::FfthGaNi, Method::FfthGaNiBound, Method::FemP1};
    c.ffth_grids = {5, 15, 45};
    c.fem_meshes = {45};
    c.reference = "fit";
    c.rtol = 1e-8;
    p.configs.push_back(c);
    out.push_back(p);
  }
  {
    Preset p;
    p.name = "table-aeff";
    p.description = "extrapolated effective coefficients for the reference cases";
    struct Row {
      int d;
      Geometry g;
      double rho;
    };
    for (const Row& r : {Row{2, Geometry::Square, 10.0}, Row{2, Geometry::Pyramid, 10.0},
                         Row{2, Geometry::Square, 100.0}, Row{3, Geometry::Square, 10.0},
                         Row{3, Geometry::Pyramid, 10.0}}) {
      auto c = base_config(std::string("table-aeff-") + std::to_string(r.d) + "d-" +
                               geometry_label(r.g) + "-rho" +
                               std::to_string(static_cast<int>(r.rho)),
                           r.d, r.g, r.rho);
      c.methods = {Method::FfthGa};
      c.ffth_grids = r.d == 2 ? std::vector<int>{5, 15, 45, 135} : std::vector<int>{5, 15, 45};
      if (r.d == 2) {
        c.methods.push_back(Method::FemP2);
        c.fem_meshes = {10, 20, 40, 80};
      }
      c.reference = "fit";
      p.configs.push_back(c);
    }
    out.push_back(p);
  }
  return out;
}

}  // namespace

const std::vector<Preset>& presets() {
  static const std::vector<Preset> all = make_presets();
  return all;
}

const Preset* find_preset(const std::string& name) {
  for (const auto& p : presets())
    if (p.name == name) return &p;
  return nullptr;
}

}  // namespace homog
