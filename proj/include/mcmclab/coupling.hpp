#pragma once

#include <string>
#include <vector>

#include "mcmclab/metrics.hpp"
#include "mcmclab/model.hpp"
#include "mcmclab/rng.hpp"
#include "mcmclab/sampler.hpp"

namespace mcmclab {

enum class ReferenceKind { ExactOu, FineGrid };
enum class InitialLaw { ClosedFormPi, ChainEquilibrated };

/// Finite-time mean-square accuracy of the Euler chain against a coupled
/// reference driven by the same Brownian increments.
struct AccuracyCurve {
  std::vector<double> times;    // nonneg, increasing, t = n*gamma
  std::vector<double> rmse;     // E^{1/2}|Y_t - Ybar_t|^2 estimates
  std::vector<double> std_err;  // per point
  long replicas = 0;
  ReferenceKind reference = ReferenceKind::ExactOu;
  int refinement = 0;  // fine-grid substeps per coarse step (FineGrid only)
};

struct ContractionEstimate {
  double rate_per_unit_time = 0.0;  // +inf sentinel when distances hit zero
  MetricSpec metric;
  long pairs = 0;
  double fit_residual = 0.0;  // rms residual of the log-linear fit
};

struct CouplingOptions {
  long horizon_steps = 0;
  long replicas = 0;
  InitialLaw initial_law = InitialLaw::ClosedFormPi;
  ReferenceKind reference = ReferenceKind::ExactOu;
  int refinement = 64;   // fine-grid substeps; >= 8 enforced
  bool tamed = false;    // evolve the tamed Euler chain instead of plain
  long equil_steps = 0;  // 0 = default burn-in (ChainEquilibrated only)
};

// Synchronous coupling of the continuous-time diffusion with its Euler
// chain. For the unit Gaussian the reference is the exact OU transition and
// the joint (stochastic integral, Brownian increment) pair is drawn from its
// exact 2x2 Gaussian law per coordinate; otherwise a fine-grid Euler
// reference consumes the same increments, summed into the coarse step.
AccuracyCurve coupled_em_accuracy(const TargetModel& model, double gamma,
                                  const CouplingOptions& opts,
                                  RngStream& stream);

// Exact Hamiltonian flow vs Verlet sharing initial point and momentum draw;
// rmse recorded after each of the T/gamma internal leapfrog steps of one
// transition. Gaussian model only (the exact flow is the rotation).
AccuracyCurve coupled_hmc_accuracy(const TargetModel& model, double T,
                                   double gamma, long replicas,
                                   RngStream& stream);

// Two chains of the same kernel driven by identical noise; returns
// d(X_n, Y_n) for n = 0..n_steps. The backbone of the contraction fit and of
// the deterministic contraction identities.
std::vector<double> coupled_distance_series(const KernelSpec& kernel,
                                            const MetricSpec& metric,
                                            const Vec& x0, const Vec& y0,
                                            long n_steps, RngStream& stream);

// Log-linear fit of coupled distance decay under shared noise. The first 10%
// of steps is discarded as transient before fitting; rate is per unit time
// (slope / gamma, or / T for Hamiltonian kernels).
ContractionEstimate estimate_contraction(const KernelSpec& kernel,
                                         const MetricSpec& metric,
                                         long n_pairs, long n_steps,
                                         RngStream& stream);

}  // namespace mcmclab
