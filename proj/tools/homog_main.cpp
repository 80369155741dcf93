// Command-line experiment runner: executes one config file or a built-in
// preset and writes CSV/JSON reports.
//
// Exit codes: 0 ok, 2 config error, 3 solver failure, 4 infeasible schedule.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "homog/analysis.hpp"
#include "homog/common.hpp"
#include "homog/experiment.hpp"
#include "homog/solver.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;
constexpr int kExitInfeasible = 4;

struct CommonFlags {
  std::string out_dir;
  int threads = 2;
  std::optional<std::uint64_t> seed;
  std::optional<double> mem_limit_gb;
  bool dry_run = false;
};

void apply_overrides(homog::ExperimentConfig& config, const CommonFlags& flags) {
  if (flags.seed) config.seed = *flags.seed;
  if (flags.mem_limit_gb) config.memory_limit_gb = *flags.mem_limit_gb;
}

void print_estimates(const homog::ExperimentConfig& config) {
  std::printf("# %s\n", config.name.c_str());
  const auto estimates = homog::preflight(config);
  for (const auto& e : estimates) {
    std::printf("  %-16s N=%-5lld p=%d  est. memory %8.1f MiB\n", homog::method_label(e.method),
                static_cast<long long>(e.n), e.order,
                static_cast<double>(e.bytes) / (1024.0 * 1024.0));
  }
}

int run_configs(std::vector<homog::ExperimentConfig> configs, const CommonFlags& flags,
                const std::string& default_out) {
  const std::string out_dir = flags.out_dir.empty() ? default_out : flags.out_dir;
  try {
    for (auto& config : configs) apply_overrides(config, flags);

    if (flags.dry_run) {
      for (const auto& config : configs) print_estimates(config);
      return kExitOk;
    }

    std::vector<homog::ExperimentReport> reports;
    std::vector<homog::TraceSeries> traces;
    std::string hash_input;
    for (const auto& config : configs) {
      auto outcome = homog::run_experiment(config, flags.threads, out_dir);
      std::printf("%-28s reference %.10g (%s), %zu rows\n", config.name.c_str(),
                  outcome.reference_value, outcome.reference_source.c_str(),
                  outcome.reports.size());
      for (auto& r : outcome.reports) reports.push_back(std::move(r));
      for (auto& t : outcome.trace_series) traces.push_back(std::move(t));
      hash_input += homog::canonical_text(config);
    }
    homog::emit_reports(reports, traces, out_dir, homog::config_hash(hash_input));
    std::printf("wrote %zu rows to %s\n", reports.size(), out_dir.c_str());
    return kExitOk;
  } catch (const homog::InfeasibleError& e) {
    std::fprintf(stderr, "infeasible: %s\n", e.what());
    for (const auto& o : e.offending)
      std::fprintf(stderr, "  %-16s N=%lld p=%d needs %.1f MiB\n", homog::method_label(o.method),
                   static_cast<long long>(o.n), o.order,
                   static_cast<double>(o.bytes) / (1024.0 * 1024.0));
    return kExitInfeasible;
  } catch (const homog::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const homog::SolverError& e) {
    std::fprintf(stderr, "solver failure: %s\n", e.what());
    return kExitSolver;
  } catch (const homog::FactorizationError& e) {
    std::fprintf(stderr, "solver failure: %s\n", e.what());
    return kExitSolver;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"periodic homogenisation experiment runner"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::string config_path;
  std::string preset_name;
  bool list_presets = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--out", flags.out_dir, "output directory for reports");
    cmd->add_option("--threads", flags.threads, "worker threads for the experiment matrix")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--seed", flags.seed, "override the config seed");
    cmd->add_option("--mem-limit-gb", flags.mem_limit_gb, "memory feasibility limit");
    cmd->add_flag("--dry-run", flags.dry_run, "print sizes and memory estimates, run nothing");
  };

  CLI::App* run = app.add_subcommand("run", "run an experiment config file");
  run->add_option("config", config_path, "path to the config file")->required();
  add_common(run);

  CLI::App* preset = app.add_subcommand("preset", "run or list built-in presets");
  preset->add_option("name", preset_name, "preset name");
  preset->add_flag("--list", list_presets, "list available presets");
  add_common(preset);

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) {
    try {
      auto config = homog::load_config(config_path);
      return run_configs({config}, flags, "out/" + config.name);
    } catch (const homog::ConfigError& e) {
      std::fprintf(stderr, "config error: %s\n", e.what());
      return kExitConfig;
    }
  }

  if (list_presets || preset_name.empty()) {
    for (const auto& p : homog::presets())
      std::printf("%-16s %s (%zu configs)\n", p.name.c_str(), p.description.c_str(),
                  p.configs.size());
    return kExitOk;
  }
  const homog::Preset* p = homog::find_preset(preset_name);
  if (!p) {
    std::fprintf(stderr, "config error: unknown preset '%s'\n", preset_name.c_str());
    return kExitConfig;
  }
  return run_configs(p->configs, flags, "out/" + p->name);
}
