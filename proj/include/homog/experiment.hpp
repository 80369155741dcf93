#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "homog/analysis.hpp"
#include "homog/material.hpp"

namespace homog {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/**
 * One experiment: a material, a list of methods and their discretisation
 * schedules, solver settings, and output options. Parsed from a strict
 * key = value text format (unknown keys are errors); see parse_config.
 */
struct ExperimentConfig {
  std::string name = "experiment";
  int d = 2;
  Geometry geometry = Geometry::Square;
  double rho = 10.0;
  double circle_radius = 0.25;

  std::string voxel_header;      // path to a voxel header file
  bool voxel_synthetic = false;  // generate the image from the seed instead
  int voxel_resolution = 45;
  double voxel_conductivity0 = 1.0;
  double voxel_conductivity1 = 0.05;

  std::vector<Method> methods;
  std::vector<int> ffth_grids;  // odd N per the spectral discretisations
  std::vector<int> fem_meshes;  // elements per axis

  double rtol = 1e-10;
  std::int64_t max_iterations = 0;  // 0: solver default (10 dim)
  bool precondition = true;
  bool estimate_kappa = false;
  int kappa_iterations = 80;
  bool traces = false;
  std::string reference = "auto";  // auto | pinned | fit | numeric literal
  std::uint64_t seed = 42;
  double memory_limit_gb = 8.0;
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

// Canonical one-line-per-key rendering; equal configs hash equally
// regardless of input formatting.
std::string canonical_text(const ExperimentConfig& config);

// Schedule validation shared by preflight and run: odd spectral grids,
// interface-aligned meshes, voxel constraints.
void validate(const ExperimentConfig& config);

struct MemoryEstimate {
  Method method;
  std::int64_t n = 0;
  int order = 0;
  std::int64_t bytes = 0;
};

// Working-set estimates per (method, N); used for the pre-run feasibility
// gate and --dry-run.
std::vector<MemoryEstimate> preflight(const ExperimentConfig& config);

class InfeasibleError : public std::runtime_error {
 public:
  InfeasibleError(const std::string& what, std::vector<MemoryEstimate> offending)
      : std::runtime_error(what), offending(std::move(offending)) {}
  std::vector<MemoryEstimate> offending;
};

struct RunOutcome {
  std::vector<ExperimentReport> reports;
  std::vector<TraceSeries> trace_series;
  std::string reference_source;
  double reference_value = 0.0;
};

// Executes the (method x N) matrix with a bounded worker pool; per-run
// solvers stay single-threaded and results aggregate in schedule order.
// `out_dir` is only needed when the config generates its voxel input.
RunOutcome run_experiment(const ExperimentConfig& config, int threads,
                          const std::string& out_dir = "");

struct Preset {
  std::string name;
  std::string description;
  std::vector<ExperimentConfig> configs;
};

// Built-in experiment bundles reproducing the study families end to end.
const std::vector<Preset>& presets();
const Preset* find_preset(const std::string& name);

}  // namespace homog
