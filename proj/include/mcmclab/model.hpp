#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mcmclab/rng.hpp"

namespace mcmclab {

using Vec = Eigen::VectorXd;

/// Regularity data attached to a drift field. K and J bound sup_x |lap b|^2
/// and sup_x |D^2 b|_F^2; for unbounded derivative fields the suprema are
/// taken over the model's box (see TargetModel::box_radius).
struct RegularityConstants {
  double lipschitz_L = 0.0;
  double one_sided_kappa = 0.0;  // <b(x)-b(y), x-y> <= kappa |x-y|^2
  double laplacian_bound_K = 0.0;
  double hessian_bound_J = 0.0;
  std::optional<double> contract_K;  // auxiliary-distance user inputs
  std::optional<double> contract_R;
};

struct ClosedFormLaw {
  enum class Kind { IsotropicGaussian };
  Kind kind = Kind::IsotropicGaussian;
  double variance_scale = 1.0;  // covariance = variance_scale * I, mean zero
};

/// A target distribution presented through its drift b = -grad U and exact
/// derivative oracles. All callables are pure and safe to invoke from any
/// number of threads.
struct TargetModel {
  int dimension = 0;
  std::string name;

  std::function<Vec(const Vec&)> drift;
  std::function<void(const Vec&, Vec&)> drift_inplace;  // optional fast path
  // v -> Db(x) v, rows indexed by drift component
  std::function<Vec(const Vec&, const Vec&)> jacobian_apply;
  std::function<double(const Vec&)> jacobian_frobenius_sq;
  std::function<Vec(const Vec&)> laplacian_of_drift;
  // componentwise <b, grad b_i> + lap b_i
  std::function<Vec(const Vec&)> generator_on_drift;
  std::function<double(const Vec&)> hessian_frobenius_sq;
  // (x, p) -> vector of p^T D^2 b_i(x) p
  std::function<Vec(const Vec&, const Vec&)> hessian_quadratic;

  RegularityConstants constants;
  std::optional<ClosedFormLaw> stationary_law;
  double box_radius = 10.0;

  bool is_unit_gaussian() const {
    return stationary_law &&
           stationary_law->kind == ClosedFormLaw::Kind::IsotropicGaussian &&
           stationary_law->variance_scale == 1.0;
  }
};

void drift_into(const TargetModel& model, const Vec& x, Vec& out);

// Certified taming remainder: |tamed_drift(x; gamma_bar) - b(x)| equals
// gamma_bar * taming_remainder(x) at step gamma_bar.
double taming_remainder(const TargetModel& model, double gamma_bar,
                        const Vec& x);

/// 1D potential with derivative oracles and closed-form box suprema, the
/// building block of product and mean-field targets.
struct ScalarPotential {
  std::string name;
  std::function<double(double)> value;  // V
  std::function<double(double)> d1;     // V'
  std::function<double(double)> d2;     // V''
  std::function<double(double)> d3;     // V'''
  std::function<double(double)> sup_abs_d2;  // sup over [-R, R] of |V''|
  std::function<double(double)> inf_d2;      // inf over [-R, R] of V''
  std::function<double(double)> sup_abs_d3;  // sup over [-R, R] of |V'''|
};

ScalarPotential gaussian_potential();     // V = x^2/2
ScalarPotential double_well_potential();  // V = x^4/4 - x^2/2

TargetModel make_gaussian_model(int d, double variance);
TargetModel make_product_model(int d, const ScalarPotential& potential,
                               double box_radius = 10.0);
// Drift b_i = -grad V(x_i) + delta/n sum_{j != i} grad W(x_j - x_i) for n
// particles in R^k; V and W act componentwise for k > 1.
TargetModel make_mean_field_model(int n, int k,
                                  const ScalarPotential& confinement,
                                  const ScalarPotential& interaction,
                                  double delta, double box_radius = 10.0);

/// O(d) budgets for the structured drift classes.
struct ClassConstants {
  double K = 0.0;
  double J = 0.0;
};

ClassConstants finite_range_constants(int range_n, double sup_diag,
                                      double sup_off, int d);
ClassConstants mean_field_constants(double C, int d);
// Budget for a sum of two structured drifts: (a+b)^2 <= 2a^2 + 2b^2.
ClassConstants combine_constants(const ClassConstants& a,
                                 const ClassConstants& b);

/// Inverse-CDF sampler for the 1D marginal with density proportional to
/// exp(-V) on [-R, R]; tabulated once, O(log grid) per draw.
class ScalarTargetSampler {
 public:
  ScalarTargetSampler(const ScalarPotential& potential, double box_radius,
                      int grid_size = 1 << 14);
  double quantile(double u) const;
  double draw(RngStream& stream) const { return quantile(stream.uniform()); }
  double second_moment() const;  // from the same tabulated density

 private:
  std::vector<double> xs_;
  std::vector<double> cdf_;
};

}  // namespace mcmclab
