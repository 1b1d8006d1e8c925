#include "mcmclab/util.hpp"

#include <algorithm>
#include <numeric>

namespace mcmclab {

Estimate batch_means(const std::vector<double>& series, int n_batches) {
  const long n = static_cast<long>(series.size());
  if (n == 0) return {0.0, 0.0};
  const double mean = std::accumulate(series.begin(), series.end(), 0.0) / n;
  if (n < 2 * n_batches) {
    // too short to batch: iid standard error
    double ss = 0.0;
    for (double v : series) ss += (v - mean) * (v - mean);
    const double var = n > 1 ? ss / (n - 1) : 0.0;
    return {mean, std::sqrt(var / n)};
  }
  const long len = n / n_batches;
  double bm_ss = 0.0;
  double bm_mean = 0.0;
  std::vector<double> bm(n_batches);
  for (int b = 0; b < n_batches; ++b) {
    double s = 0.0;
    for (long i = b * len; i < (b + 1) * len; ++i) s += series[i];
    bm[b] = s / len;
    bm_mean += bm[b];
  }
  bm_mean /= n_batches;
  for (int b = 0; b < n_batches; ++b)
    bm_ss += (bm[b] - bm_mean) * (bm[b] - bm_mean);
  const double bm_var = bm_ss / (n_batches - 1);
  // mean over the full series, stderr from batch spread
  return {mean, std::sqrt(bm_var / n_batches)};
}

double integrated_autocorrelation_time(const std::vector<double>& series) {
  const long n = static_cast<long>(series.size());
  if (n < 4) return 1.0;
  double mean = std::accumulate(series.begin(), series.end(), 0.0) / n;
  auto acov = [&](long lag) {
    double s = 0.0;
    for (long i = 0; i + lag < n; ++i)
      s += (series[i] - mean) * (series[i + lag] - mean);
    return s / n;
  };
  const double c0 = acov(0);
  if (c0 <= 0.0) return 1.0;
  double tau = 1.0;
  for (long t = 1; t + 1 < n / 2; t += 2) {
    const double pair = acov(t) + acov(t + 1);
    if (pair <= 0.0) break;
    tau += 2.0 * pair / c0;
  }
  return std::max(tau, 1.0);
}

void parallel_for(long n, int jobs, const std::function<void(long)>& fn) {
  if (jobs <= 0) jobs = static_cast<int>(std::thread::hardware_concurrency());
  if (jobs <= 1 || n <= 1) {
    for (long i = 0; i < n; ++i) fn(i);
    return;
  }
  const int workers = static_cast<int>(std::min<long>(jobs, n));
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w]() {
      for (long i = w; i < n; i += workers) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace mcmclab
