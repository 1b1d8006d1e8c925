#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mcmclab/bounds.hpp"
#include "mcmclab/metrics.hpp"
#include "mcmclab/model.hpp"
#include "mcmclab/sampler.hpp"

namespace mcmclab {

/// Which estimation path produced a bias number. Closed form when the
/// stationary law is known, product aggregation for product targets,
/// sliced projections (a labeled proxy) otherwise.
enum class BiasRoute { ClosedForm, ProductAggregation, SlicedProxy };

const char* bias_route_name(BiasRoute r);

struct ModelSpec {
  std::string family = "gaussian";  // gaussian | product-double-well | ...
  double variance = 1.0;
  double delta = 0.0;  // mean-field interaction strength
  int particles = 0;   // mean-field n (0 = not mean-field)
  int components = 1;  // mean-field k

  TargetModel build(int dimension) const;
};

struct SweepSpec {
  ModelSpec model;
  std::vector<int> dimensions;
  std::vector<double> gammas;
  KernelKind kernel = KernelKind::Ula;
  double duration_T = 1.0;  // uhmc only
  std::vector<MetricSpec> metrics;
  long samples_per_cell = 100000;
  long replicas = 1;
  std::uint64_t seed = 0;
  double gamma_cap = 1.0;
  long max_cell_budget = 4000000000L;  // steps * d per cell
  int jobs = 1;                        // worker threads across cells
  ConvergenceInputs bound_inputs;      // A, c for the theory column; optional

  void validate() const;
};

struct ExperimentRecord {
  std::string experiment_id;
  std::string model;
  int d = 0;
  double gamma = 0.0;
  KernelKind kernel = KernelKind::Ula;
  MetricSpec metric;
  double bias = 0.0;
  double std_err = 0.0;
  double theory_bound = 0.0;  // 0 when inputs were not supplied
  BiasRoute route = BiasRoute::ClosedForm;
  long n_samples = 0;
  long burn_in = 0;
  std::uint64_t seed = 0;
  double wall_time_s = 0.0;
  std::string status = "ok";  // "diverged" rows carry the step index
};

struct SlopeFit {
  std::string axis;  // "gamma" or "dimension"
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  int points = 0;
  bool low_confidence = false;  // r_squared < 0.98
};

std::vector<ExperimentRecord> run_sweep(const SweepSpec& spec);

// Least squares on (log axis, log bias). Rows with nonpositive bias are
// excluded; fewer than 3 surviving points is an error.
SlopeFit fit_slope(const std::vector<ExperimentRecord>& records,
                   const std::string& axis);

// Fixed-gamma scan over a dimension list, one SlopeFit per metric.
std::vector<SlopeFit> dimension_scan(const SweepSpec& spec);

// CSV with the fixed column set; floats at 17 significant digits, LF line
// endings, config echo in a leading comment line.
void write_records_csv(const std::vector<ExperimentRecord>& records,
                       const std::string& config_echo, std::ostream& out);

std::string slope_fits_json(const std::vector<SlopeFit>& fits);

// Per-cell bias estimation, exposed for tests: equilibrates one chain and
// measures the stationary discrepancy along the chosen route.
ExperimentRecord run_cell(const SweepSpec& spec, int d, double gamma,
                          const MetricSpec& metric);

// Per-coordinate stationary second moment of the configured kernel. For the
// unit Gaussian an exact reference chain rides along on the same noise and
// its moment is subtracted, leaving a low-variance measurement.
struct StationaryMomentEstimate {
  Estimate sigma2;
  long retained = 0;
  long burn_in = 0;
  bool coupled_reference = false;
};

StationaryMomentEstimate estimate_stationary_moment(const SweepSpec& spec,
                                                    int d, double gamma);

}  // namespace mcmclab
