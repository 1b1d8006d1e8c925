#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "mcmclab/cli.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::invalid_argument("cannot read config file: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  using namespace mcmclab;

  CLI::App app{
      "mcmclab: unadjusted MCMC kernels, coupled accuracy experiments and "
      "stationary-bias bound calculators"};
  app.require_subcommand(1);

  CliOverrides ov;
  std::string config_path;

  // gaussian-check takes its parameters directly; everything else reads a
  // JSON config file.
  double gc_gamma = 0.1;
  int gc_dim = 1;
  std::string gc_kernel = "ula";
  double gc_p = 2.0;

  auto add_common = [&](CLI::App* sub, bool with_config) {
    sub->add_option("--seed", ov.seed,
                    "base seed; beats MCMCLAB_SEED and the config value");
    sub->add_option("--out", ov.out_path, "write results to this file");
    sub->add_option("--jobs", ov.jobs, "worker threads across sweep cells")
        ->check(CLI::PositiveNumber);
    if (with_config)
      sub->add_option("--config", config_path, "JSON config file")
          ->required()
          ->check(CLI::ExistingFile);
  };

  CLI::App* gc = app.add_subcommand(
      "gaussian-check",
      "measure the stationary variance and bias on the standard Gaussian and "
      "compare with the closed form");
  gc->add_option("--gamma", gc_gamma, "step size")->required();
  gc->add_option("--dim", gc_dim, "dimension")->check(CLI::PositiveNumber);
  gc->add_option("--kernel", gc_kernel, "ula or uhmc");
  gc->add_option("--p", gc_p, "Wasserstein order, in [1,2]");
  add_common(gc, false);

  CLI::App* scan = app.add_subcommand(
      "bias-scan", "stationary bias over a (dimension, step size) grid; CSV "
                   "plus slope fits");
  add_common(scan, true);

  CLI::App* coup = app.add_subcommand(
      "coupling", "finite-time accuracy curve of the Euler chain against a "
                  "coupled reference");
  add_common(coup, true);

  CLI::App* bnd = app.add_subcommand(
      "bounds", "evaluate the accuracy constants and bias bounds from "
                "supplied convergence inputs");
  add_common(bnd, true);

  CLI::App* contr = app.add_subcommand(
      "contraction", "fit the coupled contraction rate of the configured "
                     "kernel");
  add_common(contr, true);

  CLI::App* quant = app.add_subcommand(
      "quantities", "Monte Carlo estimates of the stationary key quantities");
  add_common(quant, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfigError;
  }

  try {
    if (gc->parsed()) {
      const std::uint64_t seed = resolve_seed(ov.seed, 0);
      if (ov.out_path) {
        std::ofstream f(*ov.out_path, std::ios::binary);
        if (!f)
          throw std::invalid_argument("cannot open output: " + *ov.out_path);
        return cmd_gaussian_check(gc_gamma, gc_dim, gc_kernel, gc_p, seed, f);
      }
      return cmd_gaussian_check(gc_gamma, gc_dim, gc_kernel, gc_p, seed,
                                std::cout);
    }
    const std::string config = read_file(config_path);
    if (scan->parsed())
      return cmd_bias_scan(config, ov, std::cout, std::cerr);
    if (coup->parsed()) return cmd_coupling(config, ov, std::cout, std::cerr);
    if (bnd->parsed()) return cmd_bounds(config, ov, std::cout, std::cerr);
    if (contr->parsed())
      return cmd_contraction(config, ov, std::cout, std::cerr);
    if (quant->parsed())
      return cmd_quantities(config, ov, std::cout, std::cerr);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDiverged;
  }
  return kExitConfigError;
}
