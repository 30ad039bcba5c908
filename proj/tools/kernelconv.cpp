#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "kernelconv/run.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Rasterized pointed-domain sequences: set limits, convergence diagnosis, and "
               "sublevel-set pipelines"};
  app.footer("Commands: tame kernel prekernel liminf converge select normal-verify psi "
             "psi-kernel cross-check hausdorff render");

  std::string command, config_path;
  kernelconv::RunOptions options;
  int band = -1;
  std::uint64_t seed = 0;

  app.add_option("command", command, "Command to run")->required();
  app.add_option("config", config_path, "JSON config file")->required();
  app.add_option("--out", options.out_dir, "Output directory for reports and masks")
      ->default_val(".");
  auto* band_opt = app.add_option("--band", band, "Override the comparison band (cells)");
  auto* seed_opt = app.add_option("--seed", seed, "Override the RNG seed");

  CLI11_PARSE(app, argc, argv);
  if (*band_opt) options.band = band;
  if (*seed_opt) options.seed = seed;

  kernelconv::RunOutcome outcome = kernelconv::run_command_on_file(command, config_path, options);
  std::cout << outcome.report_json;
  return outcome.exit_code;
}
