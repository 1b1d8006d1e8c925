#pragma once

#include <cstdint>
#include <vector>

#include "mcmclab/model.hpp"
#include "mcmclab/rng.hpp"
#include "mcmclab/util.hpp"

namespace mcmclab {

inline constexpr double kDivergenceThreshold = 1e8;

enum class KernelKind { Ula, TamedUla, Uhmc, ExactOu, ExactHmc };

const char* kernel_kind_name(KernelKind k);

/// Fully specified transition kernel. Construction validates the step size
/// against the cap and, for uhmc, that duration_T is an exact multiple of
/// gamma (tolerance 1e-9); silently rounding T would corrupt order
/// measurements downstream.
struct KernelSpec {
  KernelKind kind = KernelKind::Ula;
  const TargetModel* model = nullptr;
  double gamma = 0.0;       // unused for exact-hmc
  double duration_T = 0.0;  // uhmc / exact-hmc only
  double gamma_cap = 1.0;

  static KernelSpec make(KernelKind kind, const TargetModel& model,
                         double gamma, double duration_T = 0.0,
                         double gamma_cap = 1.0);

  int leapfrog_steps() const;  // T/gamma for uhmc
};

struct Trajectory {
  std::vector<Vec> states;  // length n_retained + 1, states[0] = x0
  long step_origin = 0;     // absolute index of states[0] in the raw chain
  std::uint64_t seed = 0;
  KernelSpec kernel;
};

Vec ula_step(const TargetModel& model, double gamma, const Vec& x,
             const Vec& g);
Vec tamed_ula_step(const TargetModel& model, double gamma, const Vec& x,
                   const Vec& g);
Vec tamed_drift(const TargetModel& model, double gamma, const Vec& x);

// One leapfrog step of the second-order dynamics q'' = b(q). For b(q) = -q
// the closed-form map is q' = (1-g^2/2)q + g p, p' = (1-g^2/2)p - g(1-g^2/4)q.
void verlet_step(const TargetModel& model, double gamma, Vec& q, Vec& p);

// Full transition: fresh momentum ~ N(0,I), T/gamma leapfrog steps, return
// the position component.
Vec uhmc_transition(const TargetModel& model, double T, double gamma,
                    const Vec& q, RngStream& stream);

// Exact transition of dY = -Y dt + sqrt(2) dB over time gamma. Restricted to
// the unit-variance case; rescale coordinates before calling for general
// isotropic Gaussians.
Vec exact_ou_step(double variance, double gamma, const Vec& x, const Vec& g);

// Closed-form flow of q'' = -q for duration T: a rotation in (q, p).
void exact_gaussian_hmc_flow(double T, Vec& q, Vec& p);

// Default burn-in: ceil(10 / (|kappa| * gamma)) steps when the model has a
// negative one-sided constant, else the supplied fallback.
long default_burn_in(const TargetModel& model, double gamma,
                     long fallback = 10000);

struct RunOptions {
  long n_steps = 0;
  long burn_in = 0;
  long thin = 1;
};

// Deterministic given (kernel, x0, stream). Retains x0 plus every thin-th
// post-burn-in state. Divergence aborts with the step index attached.
Trajectory run_chain(const KernelSpec& kernel, const Vec& x0,
                     const RunOptions& opts, RngStream& stream);

// Per retained state, the coordinate-averaged square |x|^2 / d; feeds
// batch_means for stationary-variance diagnostics.
std::vector<double> mean_square_series(const Trajectory& traj);

}  // namespace mcmclab
