#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace mcmclab {

/// Point estimate with a standard error (0 for closed forms).
struct Estimate {
  double value = 0.0;
  double std_err = 0.0;
};

struct divergence_error : std::runtime_error {
  divergence_error()
      : std::runtime_error("state norm exceeded divergence threshold"),
        step_index(-1) {}
  explicit divergence_error(long step)
      : std::runtime_error("state norm exceeded divergence threshold at step " +
                           std::to_string(step)),
        step_index(step) {}
  long step_index = 0;
};

struct numeric_error : std::runtime_error {
  numeric_error(const std::string& what, double achieved)
      : std::runtime_error(what + " (achieved tolerance " +
                           std::to_string(achieved) + ")"),
        achieved_tolerance(achieved) {}
  double achieved_tolerance = 0.0;
};

// Mean with batch-means standard error. 32 batches by default; falls back to
// the iid formula when the series is too short to batch.
Estimate batch_means(const std::vector<double>& series, int n_batches = 32);

// Integrated autocorrelation time by the initial-positive-sequence rule
// (pairwise sums of autocovariances kept while positive).
double integrated_autocorrelation_time(const std::vector<double>& series);

inline double effective_sample_size(const std::vector<double>& series) {
  const double act = integrated_autocorrelation_time(series);
  return act > 0 ? static_cast<double>(series.size()) / act : 0.0;
}

// Runs fn(i) for i in [0, n). jobs <= 1 or tiny n runs inline; otherwise a
// blocked thread split. fn must only touch slot i of any shared output.
void parallel_for(long n, int jobs, const std::function<void(long)>& fn);

}  // namespace mcmclab
