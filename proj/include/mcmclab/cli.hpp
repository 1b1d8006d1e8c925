#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "mcmclab/experiment.hpp"

namespace mcmclab {

// Exit codes shared by all subcommands.
inline constexpr int kExitPass = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitDiverged = 2;
inline constexpr int kExitConfigError = 64;

struct CliOverrides {
  std::optional<std::uint64_t> seed;  // --seed beats MCMCLAB_SEED beats config
  std::optional<std::string> out_path;
  int jobs = 1;
};

// Strict JSON config loading: unknown keys anywhere are an error naming the
// offending key. Returns the parsed sweep plus a compact echo string for the
// output header.
struct LoadedConfig {
  SweepSpec sweep;
  std::string echo;
  std::string output_path;  // --out beats the config "output" field; "" = stdout
  // coupling-specific knobs
  long horizon_steps = 100;
  long replicas = 10000;
  int refinement = 64;
  std::string reference = "exact-ou";
  std::optional<bool> coupling_tamed;  // default: follows the kernel kind
  // "closed-form" | "chain-equilibrated"; default picks closed-form when
  // the model has one
  std::optional<std::string> coupling_initial_law;
  // bounds-specific inputs (A, c mandatory for the bounds command)
  bool has_contraction_inputs = false;
  double psi_rate = 0.0;  // exponential profile e^{-rt} when > 0
  double gamma_bar = 0.1;
};

LoadedConfig load_config(const std::string& json_text,
                         const CliOverrides& overrides);

int cmd_gaussian_check(double gamma, int d, const std::string& kernel,
                       double p, std::uint64_t seed, std::ostream& out);

int cmd_bias_scan(const std::string& config_json, const CliOverrides& ov,
                  std::ostream& out, std::ostream& err);

int cmd_coupling(const std::string& config_json, const CliOverrides& ov,
                 std::ostream& out, std::ostream& err);

int cmd_bounds(const std::string& config_json, const CliOverrides& ov,
               std::ostream& out, std::ostream& err);

int cmd_contraction(const std::string& config_json, const CliOverrides& ov,
                    std::ostream& out, std::ostream& err);

int cmd_quantities(const std::string& config_json, const CliOverrides& ov,
                   std::ostream& out, std::ostream& err);

// Resolves the seed: explicit flag > MCMCLAB_SEED env var > config value.
std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag_seed,
                           std::uint64_t config_seed);

}  // namespace mcmclab
