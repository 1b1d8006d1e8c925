#pragma once

#include <string>
#include <vector>

#include "mcmclab/model.hpp"
#include "mcmclab/rng.hpp"
#include "mcmclab/util.hpp"

namespace mcmclab {

enum class BaseMetric { Euclidean, Lq, NormalizedLq };

const char* base_metric_name(BaseMetric b);

/// Wasserstein order p over a base distance on R^d. p and q live in [1,2].
/// equivalence_m is the optional lower-equivalence factor m with
/// m|x-y| <= d(x,y).
struct MetricSpec {
  double order_p = 2.0;
  BaseMetric base = BaseMetric::Euclidean;
  double q = 2.0;
  double equivalence_m = 0.0;  // 0 = unset

  static MetricSpec wasserstein2_euclidean();
  static MetricSpec make(double p, BaseMetric base, double q = 2.0);

  // Comparison constant C_d with d(x,y) <= C_d |x-y|: d^{1/q-1/2} for lq,
  // 1 otherwise.
  double comparison_constant(int d) const;
};

struct DistanceEstimate {
  double value = 0.0;
  double std_err = 0.0;  // 0 for closed forms
  std::string method;
  long n_a = 0;
  long n_b = 0;
};

double base_distance(const MetricSpec& metric, const Vec& x, const Vec& y);

// 1D W_p via the comonotone (sorted) coupling; stderr from 200 bootstrap
// resamples on a dedicated internal stream so results stay deterministic.
DistanceEstimate w1d_empirical(std::vector<double> samples_a,
                               std::vector<double> samples_b, double p);

// Centered isotropic Gaussians: W_p = |sigma1 - sigma2| * E[|G|^p]^{1/p}
// with G a standard d-vector. Exact for p in {1, 2}.
DistanceEstimate gaussian_w(double p, int d, double sigma1, double sigma2);

// Product-structure aggregation: W_2 over R^d = sqrt(d) * per-coordinate W_2.
double product_w2(double per_coordinate_w2, int d);

// Average of 1D projected distances over random unit directions. A labeled
// proxy for non-product models, not an estimator of W_p itself.
DistanceEstimate sliced_w(const std::vector<Vec>& samples_a,
                          const std::vector<Vec>& samples_b, double p,
                          int n_directions, RngStream& stream);

// Total variation between N(0, sigma1^2 I_d) and N(0, sigma2^2 I_d) via a
// radial integral of chi densities; adaptive quadrature to abs tol 1e-8.
double tv_isotropic_gaussians(int d, double sigma1, double sigma2);

// E[|G|^p]^{1/p} for a standard Gaussian d-vector, p in [1,2], through the
// chi moment formula 2^{p/2} Gamma((d+p)/2) / Gamma(d/2).
double gaussian_norm_moment(double p, int d);

}  // namespace mcmclab
