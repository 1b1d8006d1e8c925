#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "mcmclab/metrics.hpp"
#include "mcmclab/model.hpp"
#include "mcmclab/rng.hpp"
#include "mcmclab/util.hpp"

namespace mcmclab {

/// Convergence-rate inputs the bound assemblies consume. A and c (and the
/// profile psi) are user inputs, imported from external analyses or from
/// estimate_contraction; they are never derived silently.
struct ConvergenceInputs {
  double A = 0.0;       // prefactor, >= 0
  double c = 0.0;       // rate per unit time, > 0
  double lambda = 0.0;  // growth rate of the perturbation term, > 0
  double B = 0.0;       // perturbation amplitude, >= 0
  double gamma = 0.0;   // step size, > 0
  std::function<double(double)> psi;  // decreasing profile, optional
  double kappa = 0.0;                 // TV-route curvature input
  double A_tv = 0.0;
  double B_tv = 0.0;
  double lambda_tv = 0.0;
};

struct KeyQuantities {
  Estimate M1, M2, M3, M4, M5;
  Estimate Mt1, Mt2, Mt3, Mt4, Mt5, Mt6, Mt7;
};

// min over n in [1, n_max] with phi(n) < 1 of eps(n) / (1 - phi(n));
// +infinity when no n is admissible.
double bias_from_convergence_profile(const std::function<double(long)>& phi,
                                     const std::function<double(long)>& eps,
                                     long n_max);

// Closed form gamma*B*e^{1+lambda*gamma}*A^{lambda/c}*(lambda/c + 1); always
// dominates the profile minimum for the matching phi, eps.
double geometric_profile_bound(const ConvergenceInputs& in);

// Closed form 2*gamma*B*e^{lambda*(t_rel+gamma)} where t_rel is the first
// time psi drops to 1/2 (bisection).
double subgeometric_profile_bound(const ConvergenceInputs& in,
                                  double t_horizon = 1e6);

double relaxation_time(const std::function<double(double)>& psi,
                       double t_horizon = 1e6);

struct EmAccuracyConstants {
  double lambda_L = 0.0;
  double M_L = 0.0;
};

EmAccuracyConstants em_accuracy_constants(double L, double gamma,
                                          double gamma_bar, double M1,
                                          double M2, double M3);

// Assembled Wasserstein bias bound for the Euler chain.
enum class ProfileVariant { Geometric, Subgeometric };
double ula_bias_bound(const MetricSpec& metric, int d,
                      const ConvergenceInputs& in,
                      const EmAccuracyConstants& cs, ProfileVariant variant);

// Finite-time coupling overlay: gamma * sqrt(M_L) * e^{lambda_L * t} bounds
// the rmse curve started from the continuous-time stationary law.
double em_curve_bound(double gamma, const EmAccuracyConstants& cs, double t);

// Variant started from the discrete stationary law: prefactor
// gamma * (1+gamma)^{1/2} * sqrt(Mtilde_L), rate 1 + kappa.
double discrete_em_curve_bound(double gamma, double Mtilde_L, double kappa,
                               double t);

// Mtilde_L = Mt1/6 + sqrt(gamma * Mt2 * Mt3)/2 + sqrt(Mt2 * Mt4 / 2) + Mt5/2.
double discrete_em_accuracy_constant(double gamma, double Mt1, double Mt2,
                                     double Mt3, double Mt4, double Mt5);

struct HmcAccuracyConstants {
  double lambda_H = 0.0;
  double M_H = 0.0;
};

HmcAccuracyConstants hmc_accuracy_constants(double L, double gamma, double M1,
                                            double M2, double M4, double M5);

double hmc_bias_bound(const MetricSpec& metric, int d, double c, double L,
                      double T, const HmcAccuracyConstants& cs, double gamma);

// sqrt(kappa/pi) * sup_{u in [0,2]} u / sqrt(1 - e^{-2 kappa u}), by grid
// maximization with endpoint refinement.
double tv_regularization_constant(double kappa);

double tv_bias_bound(double L, double gamma, int d, double Mtilde6,
                     double C_tv, double B_tv, double Mtilde7);

double tv_perturbation_constant(double C_tv, double A_tv, double lambda_tv);

struct LyapunovBounds {
  double stationary_bound = 0.0;
  double pt_bound = 0.0;
};

LyapunovBounds lyapunov_moment_bounds(double a, double b, double gamma_bar,
                                      double alpha, double beta, double W0,
                                      double t);

// Plain Monte-Carlo means of the model derivative oracles over supplied
// stationary samples; batch-means stderr. M3 uses the taming remainder at
// gamma_bar (0 for untamed kernels). M5 additionally pushes Gaussian
// momenta through the leapfrog flow over a time grid and takes the sup.
struct MQuantityOptions {
  double gamma = 0.1;
  double gamma_bar = 0.1;
  bool tamed = false;
  std::vector<double> flow_times = {0.0, 0.25, 0.5, 1.0};
  // second-order drift defect for the Hamiltonian route; unset means the
  // integrator uses the exact drift and the defect term vanishes
  std::function<double(const Vec&)> second_order_defect;
};

KeyQuantities estimate_m_quantities(const TargetModel& model,
                                    const std::vector<Vec>& pi_samples,
                                    const MQuantityOptions& opts,
                                    RngStream& stream);

// Monte-Carlo estimators of the discrete-stationary quantities: double
// integrals with a Gaussian smoothing draw and a sup over u in (0, gamma_bar]
// on a 16-point geometric grid; the time sup uses chain snapshots at a fixed
// schedule. Requires >= 1000 samples of the discrete stationary law.
struct DiscreteQuantityOptions {
  double gamma = 0.1;
  double gamma_bar = 0.1;
  bool tamed = false;
  int u_grid_size = 16;
  std::vector<double> snapshot_times = {0.0, 0.5, 1.0, 2.0, 4.0, 8.0};
};

KeyQuantities discrete_stationary_quantities(const TargetModel& model,
                                             const std::vector<Vec>& pi_gamma_samples,
                                             const DiscreteQuantityOptions& opts,
                                             RngStream& stream);

}  // namespace mcmclab
