// Command line front end for the experiment harness. Subcommands mirror the
// three experiment families; every run is reproducible from (config, seed).

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <string>
#include <thread>

#include "bossamp/bench.hpp"

namespace {

struct CommonOptions {
  std::string config_path;
  std::string out_path;
  int threads = static_cast<int>(std::thread::hardware_concurrency());
  std::uint64_t seed = 0;
  bool seed_given = false;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--config", opts.config_path, "experiment config file (key = value)")
      ->required();
  cmd->add_option("--out", opts.out_path, "output CSV path")->required();
  cmd->add_option("--threads", opts.threads, "worker threads (default: hardware)");
  cmd->add_option("--seed", opts.seed, "master seed override")
      ->each([&](const std::string&) { opts.seed_given = true; });
}

std::string contour_path_for(const std::string& grid_path) {
  const std::string suffix = ".csv";
  if (grid_path.size() > suffix.size() &&
      grid_path.compare(grid_path.size() - suffix.size(), suffix.size(), suffix) == 0)
    return grid_path.substr(0, grid_path.size() - suffix.size()) + ".contour.csv";
  return grid_path + ".contour.csv";
}

int run_family(bossamp::Family family, const CommonOptions& opts) {
  auto cfg = bossamp::parse_config_file(opts.config_path, family);
  if (opts.seed_given) cfg.master_seed = opts.seed;

  bossamp::DivergenceLog divergences;
  if (family == bossamp::Family::PhaseTransition) {
    const auto grid = bossamp::run_phase_transition(cfg, opts.threads, &divergences);
    bossamp::write_csv(bossamp::grid_table(grid), opts.out_path);
    const auto contour = bossamp::contour_half(grid);
    bossamp::write_csv(bossamp::contour_table(contour), contour_path_for(opts.out_path));
    std::cout << "wrote " << opts.out_path << " ("
              << grid.undersampling_axis.size() * grid.sparsity_axis.size() << " cells) and "
              << contour_path_for(opts.out_path) << " (" << contour.size() << " polylines)\n";
  } else {
    const auto table = bossamp::run_experiment(cfg, opts.threads, &divergences);
    bossamp::write_csv(table, opts.out_path);
    std::cout << "wrote " << opts.out_path << " (" << table.rows.size() << " rows)\n";
  }

  if (divergences.count > 0) {
    std::cerr << divergences.count
              << " divergent realization(s) excluded from the reported means:\n";
    for (const auto& note : divergences.notes) std::cerr << "  " << note << "\n";
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Structured sparse recovery benchmarks (AMP / BAMP / BOSSAMP)"};
  app.require_subcommand(1);

  CommonOptions snr_opts, m_opts, pt_opts;
  auto* snr_cmd = app.add_subcommand("variable-snr", "NMSE/FANMSE over an SNR sweep at fixed M");
  add_common(snr_cmd, snr_opts);
  auto* m_cmd = app.add_subcommand("variable-m", "NMSE/FANMSE over an M sweep at fixed SNR");
  add_common(m_cmd, m_opts);
  auto* pt_cmd = app.add_subcommand("phase-transition",
                                    "average-success grid plus its 0.5 contour");
  add_common(pt_cmd, pt_opts);

  CLI11_PARSE(app, argc, argv);

  try {
    if (snr_cmd->parsed()) return run_family(bossamp::Family::VariableSnr, snr_opts);
    if (m_cmd->parsed()) return run_family(bossamp::Family::VariableM, m_opts);
    return run_family(bossamp::Family::PhaseTransition, pt_opts);
  } catch (const bossamp::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
