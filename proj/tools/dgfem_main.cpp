// Command-line front end: experiment subcommands over the header library.

#include <CLI11.hpp>
#include <iostream>

#include "dgfem/experiment.hpp"

namespace {

void add_common_flags(CLI::App* cmd, dgfem::ExperimentConfig& cfg, std::string& config_path) {
  cmd->add_option("--config", config_path, "configuration file (key = value, [section] headers)");
  cmd->add_option("--mesh", cfg.mesh_path, "mesh file (dgfem-mesh 1)");
  cmd->add_option("--problem", cfg.problem, "problem name");
  cmd->add_option("--ratio", cfg.ratio, "coefficient ratio for the checkerboard problem");
  cmd->add_option("--levels", cfg.levels, "number of refinement levels");
  cmd->add_flag("--adaptive", cfg.adaptive, "use adaptive marking instead of uniform refinement");
  cmd->add_option("--mark-fraction", cfg.mark_fraction, "energy fraction for adaptive marking");
  cmd->add_option("--coef", cfg.coefficient, "coefficient for mesh audits (identity, checkerboard)");
  cmd->add_option("--out", cfg.out_dir, "output directory for reports");
  cmd->add_option("--seed", cfg.seed, "seed for randomized checks");
  cmd->add_flag("--svg", cfg.svg, "emit the log-log oscillation chart");
  cmd->add_option("--trials", cfg.trials, "randomized trial count");
  cmd->add_option("--diagnostics", cfg.diagnostics, "comma-separated record names, or 'all'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"piecewise affine finite elements with level-set regularity diagnostics"};
  app.require_subcommand(1);

  dgfem::ExperimentConfig cfg;
  std::string config_path;
  for (const char* name : {"solve", "audit-mesh", "degiorgi-study", "verify-inequalities",
                           "quasilinear-study"}) {
    auto* cmd = app.add_subcommand(name);
    add_common_flags(cmd, cfg, config_path);
  }

  CLI11_PARSE(app, argc, argv);
  cfg.command = app.get_subcommands().front()->get_name();

  if (!config_path.empty()) {
    try {
      std::ifstream in(config_path);
      if (!in) {
        std::cerr << "error: cannot open config file " << config_path << "\n";
        return dgfem::exit_parse_error;
      }
      // file values provide defaults that explicit flags already overrode;
      // apply file first on a fresh config, then replay the parsed flags
      dgfem::ExperimentConfig file_cfg;
      dgfem::apply_config(dgfem::parse_config_file(in), file_cfg);
      auto* cmd = app.get_subcommands().front();
      auto keep = [&](const std::string& flag) { return cmd->count(flag) > 0; };
      if (!keep("--problem")) cfg.problem = file_cfg.problem;
      if (!keep("--ratio")) cfg.ratio = file_cfg.ratio;
      if (!keep("--levels")) cfg.levels = file_cfg.levels;
      if (!keep("--adaptive")) cfg.adaptive = file_cfg.adaptive;
      if (!keep("--mark-fraction")) cfg.mark_fraction = file_cfg.mark_fraction;
      if (!keep("--mesh")) cfg.mesh_path = file_cfg.mesh_path;
      if (!keep("--coef")) cfg.coefficient = file_cfg.coefficient;
      if (!keep("--out")) cfg.out_dir = file_cfg.out_dir;
      if (!keep("--seed")) cfg.seed = file_cfg.seed;
      if (!keep("--svg")) cfg.svg = file_cfg.svg;
      if (!keep("--trials")) cfg.trials = file_cfg.trials;
      if (!keep("--diagnostics")) cfg.diagnostics = file_cfg.diagnostics;
    } catch (const dgfem::Error& e) {
      std::cerr << "error: " << e.what() << "\n";
      return dgfem::exit_parse_error;
    }
  }

  return dgfem::run_experiment(cfg, std::cout);
}
