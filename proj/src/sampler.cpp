#include "mcmclab/sampler.hpp"

#include <cmath>
#include <stdexcept>

namespace mcmclab {

const char* kernel_kind_name(KernelKind k) {
  switch (k) {
    case KernelKind::Ula: return "ula";
    case KernelKind::TamedUla: return "tamed-ula";
    case KernelKind::Uhmc: return "uhmc";
    case KernelKind::ExactOu: return "exact-ou";
    case KernelKind::ExactHmc: return "exact-hmc";
  }
  return "?";
}

KernelSpec KernelSpec::make(KernelKind kind, const TargetModel& model,
                            double gamma, double duration_T,
                            double gamma_cap) {
  KernelSpec k;
  k.kind = kind;
  k.model = &model;
  k.gamma = gamma;
  k.duration_T = duration_T;
  k.gamma_cap = gamma_cap;
  if (kind != KernelKind::ExactHmc) {
    if (!(gamma > 0)) throw std::invalid_argument("step size must be > 0");
    if (gamma > gamma_cap)
      throw std::invalid_argument("step size exceeds the configured cap");
  }
  if (kind == KernelKind::Uhmc || kind == KernelKind::ExactHmc) {
    if (!(duration_T > 0))
      throw std::invalid_argument("duration T must be > 0");
  }
  if (kind == KernelKind::Uhmc) {
    const double ratio = duration_T / gamma;
    if (std::abs(ratio - std::round(ratio)) > 1e-9)
      throw std::invalid_argument(
          "duration T must be an integer multiple of the step size");
  }
  if ((kind == KernelKind::ExactOu || kind == KernelKind::ExactHmc) &&
      !model.is_unit_gaussian())
    throw std::invalid_argument(
        "exact reference kernels require the unit-variance Gaussian model");
  return k;
}

int KernelSpec::leapfrog_steps() const {
  return static_cast<int>(std::llround(duration_T / gamma));
}

namespace {

void check_finite_norm(const Vec& x) {
  if (!(x.norm() <= kDivergenceThreshold)) throw divergence_error();
}

}  // namespace

Vec ula_step(const TargetModel& model, double gamma, const Vec& x,
             const Vec& g) {
  if (!(gamma > 0)) throw std::invalid_argument("step size must be > 0");
  Vec y = x + gamma * model.drift(x) + std::sqrt(2.0 * gamma) * g;
  check_finite_norm(y);
  return y;
}

Vec tamed_drift(const TargetModel& model, double gamma, const Vec& x) {
  if (!(gamma > 0)) throw std::invalid_argument("step size must be > 0");
  Vec b = model.drift(x);
  return b / (1.0 + gamma * b.norm());
}

Vec tamed_ula_step(const TargetModel& model, double gamma, const Vec& x,
                   const Vec& g) {
  Vec y = x + gamma * tamed_drift(model, gamma, x) +
          std::sqrt(2.0 * gamma) * g;
  check_finite_norm(y);
  return y;
}

void verlet_step(const TargetModel& model, double gamma, Vec& q, Vec& p) {
  thread_local Vec b0, b1;
  drift_into(model, q, b0);
  q += (gamma * gamma / 2.0) * b0 + gamma * p;
  drift_into(model, q, b1);
  p += (gamma / 2.0) * (b0 + b1);
  check_finite_norm(q);
}

Vec uhmc_transition(const TargetModel& model, double T, double gamma,
                    const Vec& q, RngStream& stream) {
  const double ratio = T / gamma;
  if (std::abs(ratio - std::round(ratio)) > 1e-9)
    throw std::invalid_argument(
        "duration T must be an integer multiple of the step size");
  const int n = static_cast<int>(std::llround(ratio));
  Vec pos = q;
  Vec mom = stream.gaussian_vector(q.size());
  for (int i = 0; i < n; ++i) verlet_step(model, gamma, pos, mom);
  return pos;
}

Vec exact_ou_step(double variance, double gamma, const Vec& x, const Vec& g) {
  if (variance != 1.0)
    throw std::invalid_argument(
        "exact transition only covers the unit-variance case; rescale first");
  const double decay = std::exp(-gamma);
  const double noise = std::sqrt(1.0 - std::exp(-2.0 * gamma));
  return decay * x + noise * g;
}

void exact_gaussian_hmc_flow(double T, Vec& q, Vec& p) {
  const double c = std::cos(T);
  const double s = std::sin(T);
  Vec q1 = c * q + s * p;
  p = c * p - s * q;
  q = std::move(q1);
}

long default_burn_in(const TargetModel& model, double gamma, long fallback) {
  const double kappa = model.constants.one_sided_kappa;
  if (kappa < 0) return static_cast<long>(std::ceil(10.0 / (-kappa * gamma)));
  return fallback;
}

Trajectory run_chain(const KernelSpec& kernel, const Vec& x0,
                     const RunOptions& opts, RngStream& stream) {
  if (opts.n_steps < 0 || opts.burn_in < 0 || opts.thin < 1)
    throw std::invalid_argument("chain lengths must be nonnegative, thin >= 1");
  const TargetModel& model = *kernel.model;
  const double gamma = kernel.gamma;
  const Eigen::Index d = x0.size();

  Vec x = x0;
  Vec g(d);
  const double root = kernel.kind == KernelKind::Ula ||
                              kernel.kind == KernelKind::TamedUla
                          ? std::sqrt(2.0 * gamma)
                          : 0.0;
  thread_local Vec scratch;

  auto advance = [&](long abs_step) {
    switch (kernel.kind) {
      case KernelKind::Ula: {
        stream.fill_gaussian(g);
        drift_into(model, x, scratch);
        x += gamma * scratch + root * g;
        break;
      }
      case KernelKind::TamedUla: {
        stream.fill_gaussian(g);
        drift_into(model, x, scratch);
        x += gamma / (1.0 + gamma * scratch.norm()) * scratch + root * g;
        break;
      }
      case KernelKind::Uhmc: {
        stream.fill_gaussian(g);
        const int n = kernel.leapfrog_steps();
        for (int i = 0; i < n; ++i) verlet_step(model, gamma, x, g);
        break;
      }
      case KernelKind::ExactOu: {
        stream.fill_gaussian(g);
        x = exact_ou_step(1.0, gamma, x, g);
        break;
      }
      case KernelKind::ExactHmc: {
        stream.fill_gaussian(g);
        exact_gaussian_hmc_flow(kernel.duration_T, x, g);
        break;
      }
    }
    if (!(x.norm() <= kDivergenceThreshold)) throw divergence_error(abs_step);
  };

  for (long k = 0; k < opts.burn_in; ++k) advance(k);

  Trajectory traj;
  traj.kernel = kernel;
  traj.seed = stream.base_key();
  traj.step_origin = opts.burn_in;
  traj.states.reserve(static_cast<size_t>(opts.n_steps / opts.thin) + 1);
  traj.states.push_back(x);
  for (long k = 0; k < opts.n_steps; ++k) {
    advance(opts.burn_in + k);
    if ((k + 1) % opts.thin == 0) traj.states.push_back(x);
  }
  return traj;
}

std::vector<double> mean_square_series(const Trajectory& traj) {
  std::vector<double> out;
  out.reserve(traj.states.size());
  for (const Vec& s : traj.states)
    out.push_back(s.squaredNorm() / static_cast<double>(s.size()));
  return out;
}

}  // namespace mcmclab
