#include "mcmclab/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "mcmclab/sampler.hpp"

namespace mcmclab {

double bias_from_convergence_profile(const std::function<double(long)>& phi,
                                     const std::function<double(long)>& eps,
                                     long n_max) {
  if (n_max < 1) throw std::invalid_argument("need n_max >= 1");
  double best = std::numeric_limits<double>::infinity();
  for (long n = 1; n <= n_max; ++n) {
    const double ph = phi(n);
    if (ph >= 1.0) continue;
    best = std::min(best, eps(n) / (1.0 - ph));
  }
  return best;
}

namespace {

void require_rate_inputs(const ConvergenceInputs& in) {
  if (!(in.c > 0)) throw std::invalid_argument("rate c must be > 0");
  if (!(in.lambda > 0)) throw std::invalid_argument("lambda must be > 0");
  if (!(in.gamma > 0)) throw std::invalid_argument("step size must be > 0");
  if (in.A < 0 || in.B < 0)
    throw std::invalid_argument("A and B must be nonnegative");
}

}  // namespace

double geometric_profile_bound(const ConvergenceInputs& in) {
  require_rate_inputs(in);
  const double ratio = in.lambda / in.c;
  return in.gamma * in.B * std::exp(1.0 + in.lambda * in.gamma) *
         std::pow(in.A, ratio) * (ratio + 1.0);
}

double relaxation_time(const std::function<double(double)>& psi,
                       double t_horizon) {
  if (!psi) throw std::invalid_argument("profile function required");
  if (psi(0.0) <= 0.5) return 0.0;
  if (psi(t_horizon) > 0.5)
    throw std::runtime_error(
        "profile never drops to 1/2 within the configured horizon");
  double lo = 0.0, hi = t_horizon;
  for (int i = 0; i < 200 && (hi - lo) > 1e-13 * std::max(1.0, hi); ++i) {
    const double mid = 0.5 * (lo + hi);
    (psi(mid) <= 0.5 ? hi : lo) = mid;
  }
  return hi;
}

double subgeometric_profile_bound(const ConvergenceInputs& in,
                                  double t_horizon) {
  if (!(in.lambda > 0)) throw std::invalid_argument("lambda must be > 0");
  if (!(in.gamma > 0)) throw std::invalid_argument("step size must be > 0");
  if (in.B < 0) throw std::invalid_argument("B must be nonnegative");
  const double t_rel = relaxation_time(in.psi, t_horizon);
  return 2.0 * in.gamma * in.B * std::exp(in.lambda * (t_rel + in.gamma));
}

EmAccuracyConstants em_accuracy_constants(double L, double gamma,
                                          double gamma_bar, double M1,
                                          double M2, double M3) {
  if (L < 0 || gamma < 0 || gamma_bar < 0 || M1 < 0 || M2 < 0 || M3 < 0)
    throw std::invalid_argument("constants must be nonnegative");
  EmAccuracyConstants cs;
  cs.lambda_L = 1.0 + L * L + 1.5 * L * L * gamma_bar;
  cs.M_L = (1.0 / 6.0 + 0.75 * gamma) * M1 + 1.5 * M2 +
           (1.0 + 1.5 * gamma) * M3;
  return cs;
}

double ula_bias_bound(const MetricSpec& metric, int d,
                      const ConvergenceInputs& in,
                      const EmAccuracyConstants& cs, ProfileVariant variant) {
  const double cd = metric.comparison_constant(d);
  const double root_m = std::sqrt(cs.M_L);
  if (variant == ProfileVariant::Geometric) {
    if (!(in.c > 0)) throw std::invalid_argument("rate c must be > 0");
    if (!(in.gamma > 0)) throw std::invalid_argument("step size must be > 0");
    const double ratio = cs.lambda_L / in.c;
    return in.gamma * cd * root_m * std::exp(1.0 + cs.lambda_L * in.gamma) *
           std::pow(in.A, ratio) * (ratio + 1.0);
  }
  const double t_rel = relaxation_time(in.psi, 1e6);
  return 2.0 * in.gamma * cd * root_m *
         std::exp(cs.lambda_L * (t_rel + in.gamma));
}

double em_curve_bound(double gamma, const EmAccuracyConstants& cs, double t) {
  return gamma * std::sqrt(cs.M_L) * std::exp(cs.lambda_L * t);
}

double discrete_em_curve_bound(double gamma, double Mtilde_L, double kappa,
                               double t) {
  return gamma * std::sqrt((1.0 + gamma) * Mtilde_L) *
         std::exp((1.0 + kappa) * t);
}

double discrete_em_accuracy_constant(double gamma, double Mt1, double Mt2,
                                     double Mt3, double Mt4, double Mt5) {
  return Mt1 / 6.0 + 0.5 * std::sqrt(gamma * Mt2 * Mt3) +
         std::sqrt(0.5 * Mt2 * Mt4) + 0.5 * Mt5;
}

HmcAccuracyConstants hmc_accuracy_constants(double L, double gamma, double M1,
                                            double M2, double M4, double M5) {
  if (L < 0 || gamma < 0 || M1 < 0 || M2 < 0 || M4 < 0 || M5 < 0)
    throw std::invalid_argument("constants must be nonnegative");
  const double root_l = std::sqrt(L);
  HmcAccuracyConstants cs;
  cs.lambda_H =
      root_l * (1.0 + 0.5 * gamma * root_l + 0.25 * gamma * gamma * L);
  const double mom = 2.0 + 0.5 * gamma * L;
  cs.M_H = M1 + (1.0 + gamma * gamma * L) * L * M2 + 2.0 * M4 +
           (mom * mom + L) * M5;
  return cs;
}

double hmc_bias_bound(const MetricSpec& metric, int d, double c, double L,
                      double T, const HmcAccuracyConstants& cs, double gamma) {
  if (!(c > 0.0 && c <= 1.0))
    throw std::invalid_argument("contraction constant c must lie in (0,1]");
  if (!(L > 0)) throw std::invalid_argument("Lipschitz constant must be > 0");
  return gamma * gamma / (c * L) * std::exp(cs.lambda_H * T) *
         metric.comparison_constant(d) * std::sqrt(cs.M_H);
}

double tv_regularization_constant(double kappa) {
  if (!(kappa > 0)) throw std::invalid_argument("kappa must be > 0");
  auto h = [kappa](double u) {
    if (u <= 0.0) return 0.0;
    return u / std::sqrt(1.0 - std::exp(-2.0 * kappa * u));
  };
  constexpr int kGrid = 10000;
  double best_u = 0.0, best = 0.0;
  for (int i = 1; i <= kGrid; ++i) {
    const double u = 2.0 * i / kGrid;
    const double v = h(u);
    if (v > best) {
      best = v;
      best_u = u;
    }
  }
  // golden-section refinement around the grid argmax
  double lo = std::max(0.0, best_u - 2.0 / kGrid);
  double hi = std::min(2.0, best_u + 2.0 / kGrid);
  constexpr double kInvPhi = 0.6180339887498949;
  double a = hi - kInvPhi * (hi - lo), b = lo + kInvPhi * (hi - lo);
  double fa = h(a), fb = h(b);
  for (int i = 0; i < 80; ++i) {
    if (fa < fb) {
      lo = a;
      a = b;
      fa = fb;
      b = lo + kInvPhi * (hi - lo);
      fb = h(b);
    } else {
      hi = b;
      b = a;
      fb = fa;
      a = hi - kInvPhi * (hi - lo);
      fa = h(a);
    }
  }
  best = std::max({best, fa, fb});
  return std::sqrt(kappa / 3.14159265358979323846) * best;
}

double tv_perturbation_constant(double C_tv, double A_tv, double lambda_tv) {
  if (C_tv < 0 || A_tv < 0)
    throw std::invalid_argument("constants must be nonnegative");
  return 4.0 * C_tv * A_tv * std::exp(2.0 * lambda_tv);
}

double tv_bias_bound(double L, double gamma, int d, double Mtilde6,
                     double C_tv, double B_tv, double Mtilde7) {
  if (!(gamma > 0 && gamma < 1))
    throw std::invalid_argument("step size must lie in (0,1) for the TV route");
  if (L < 0 || d < 1 || Mtilde6 < 0 || C_tv < 0 || B_tv < 0 || Mtilde7 < 0)
    throw std::invalid_argument("constants must be nonnegative");
  const double r = std::log(1.0 / gamma) / std::log(2.0);
  const double frac = r - std::floor(r);
  const double n_gamma = frac <= 1e-9 ? std::floor(r) : std::ceil(r);
  return std::pow(2.0, -1.5) * L * gamma * std::sqrt(d + gamma * Mtilde6 / 3.0) +
         gamma * C_tv * B_tv + gamma * n_gamma * Mtilde7;
}

LyapunovBounds lyapunov_moment_bounds(double a, double b, double gamma_bar,
                                      double alpha, double beta, double W0,
                                      double t) {
  if (!(a > 0 && a < 1))
    throw std::invalid_argument("contraction factor a must lie in (0,1)");
  if (b < 0 || beta < 0 || W0 < 0 || t < 0 || gamma_bar < 0)
    throw std::invalid_argument("inputs must be nonnegative");
  if (!(alpha > 0)) throw std::invalid_argument("alpha must be > 0");
  LyapunovBounds out;
  out.stationary_bound =
      b * std::pow(a, -gamma_bar) / ((1.0 - a) * std::log(1.0 / a));
  out.pt_bound = std::exp(-alpha * t) * W0 +
                 (1.0 - std::exp(-alpha * t)) * beta / alpha;
  return out;
}

namespace {

Estimate mc_mean(const std::vector<double>& values) {
  return batch_means(values);
}

}  // namespace

KeyQuantities estimate_m_quantities(const TargetModel& model,
                                    const std::vector<Vec>& pi_samples,
                                    const MQuantityOptions& opts,
                                    RngStream& stream) {
  if (pi_samples.size() < 1000)
    throw std::invalid_argument("need at least 1000 stationary samples");
  const size_t n = pi_samples.size();
  std::vector<double> v1(n), v2(n), v3(n), v4(n);
  for (size_t s = 0; s < n; ++s) {
    const Vec& x = pi_samples[s];
    v1[s] = model.generator_on_drift(x).squaredNorm();
    v2[s] = model.jacobian_frobenius_sq(x);
    v3[s] = opts.tamed ? taming_remainder(model, opts.gamma_bar, x) : 0.0;
    v3[s] *= v3[s];
    v4[s] = model.hessian_frobenius_sq(x);
  }
  KeyQuantities q;
  q.M1 = mc_mean(v1);
  q.M2 = mc_mean(v2);
  q.M3 = opts.tamed ? mc_mean(v3) : Estimate{0.0, 0.0};
  q.M4 = mc_mean(v4);

  if (opts.second_order_defect) {
    // sup over the flow-time grid of E[ defect(q_t)^2 ] with momentum
    // refreshed at t = 0 and positions advanced by the leapfrog map
    double best = 0.0, best_se = 0.0;
    std::vector<double> vals(n);
    for (double t : opts.flow_times) {
      const long steps = std::lround(t / opts.gamma);
      RngStream mom(stream.base_key(),
                    derive_stream_id(stream.base_key(),
                                     static_cast<std::uint64_t>(steps),
                                     purpose::momentum));
      for (size_t s = 0; s < n; ++s) {
        Vec qpos = pi_samples[s];
        Vec p = mom.gaussian_vector(model.dimension);
        for (long i = 0; i < steps; ++i)
          verlet_step(model, opts.gamma, qpos, p);
        const double lam = opts.second_order_defect(qpos);
        vals[s] = lam * lam;
      }
      const Estimate e = mc_mean(vals);
      if (e.value > best) {
        best = e.value;
        best_se = e.std_err;
      }
    }
    q.M5 = Estimate{best, best_se};
  } else {
    q.M5 = Estimate{0.0, 0.0};
  }
  return q;
}

KeyQuantities discrete_stationary_quantities(
    const TargetModel& model, const std::vector<Vec>& pi_gamma_samples,
    const DiscreteQuantityOptions& opts, RngStream& stream) {
  if (pi_gamma_samples.size() < 1000)
    throw std::invalid_argument("need at least 1000 stationary samples");
  if (opts.u_grid_size < 8)
    throw std::invalid_argument("u grid must have at least 8 points");
  const size_t n = pi_gamma_samples.size();
  const int d = model.dimension;
  KeyQuantities q;

  // geometric u-grid on (0, gamma_bar], endpoint-heavy toward gamma_bar
  std::vector<double> ugrid(opts.u_grid_size);
  for (int i = 0; i < opts.u_grid_size; ++i)
    ugrid[i] = opts.gamma_bar *
               std::pow(256.0, -static_cast<double>(opts.u_grid_size - 1 - i) /
                                   (opts.u_grid_size - 1));

  std::vector<double> vals1(n), vals2(n);
  double best1 = -1.0, best2 = -1.0;
  Estimate e1, e2;
  Vec y(d), bt(d), z(d);
  RngStream smooth(stream.base_key(),
                   derive_stream_id(stream.base_key(), 0, purpose::smoothing));
  for (double u : ugrid) {
    for (size_t s = 0; s < n; ++s) {
      const Vec& x = pi_gamma_samples[s];
      drift_into(model, x, bt);
      Vec bx = bt;
      if (opts.tamed) bt /= 1.0 + opts.gamma * bt.norm();
      smooth.fill_gaussian(z);
      y = x + u * bt + std::sqrt(2.0 * u) * z;
      // first-order generator applied to the drift, evaluated across the
      // smoothing point: Db(y) b(x) + lap b(y)
      vals1[s] =
          (model.jacobian_apply(y, bx) + model.laplacian_of_drift(y))
              .squaredNorm();
      vals2[s] = model.jacobian_frobenius_sq(y);
    }
    const Estimate c1 = mc_mean(vals1);
    const Estimate c2 = mc_mean(vals2);
    if (c1.value > best1) {
      best1 = c1.value;
      e1 = c1;
    }
    if (c2.value > best2) {
      best2 = c2.value;
      e2 = c2;
    }
  }
  q.Mt1 = e1;
  q.Mt2 = e2;

  // time sup over snapshots of the diffusion started from the discrete
  // stationary samples; fine Euler steps push the whole sample cloud forward
  {
    std::vector<Vec> cloud = pi_gamma_samples;
    std::vector<double> t_sorted = opts.snapshot_times;
    std::sort(t_sorted.begin(), t_sorted.end());
    const double dt = opts.gamma / 8.0;
    double t_now = 0.0;
    double best3 = -1.0, best4 = -1.0;
    Estimate s3, s4;
    RngStream flow(stream.base_key(),
                   derive_stream_id(stream.base_key(), 1, purpose::reference));
    Vec g(d), b(d);
    std::vector<double> m3(n), m4(n);
    for (double t : t_sorted) {
      while (t_now + dt / 2 < t) {
        for (size_t s = 0; s < n; ++s) {
          Vec& xs = cloud[s];
          drift_into(model, xs, b);
          flow.fill_gaussian(g);
          xs += dt * b + std::sqrt(2.0 * dt) * g;
        }
        t_now += dt;
      }
      for (size_t s = 0; s < n; ++s) {
        m3[s] = model.generator_on_drift(cloud[s]).squaredNorm();
        m4[s] = model.jacobian_frobenius_sq(cloud[s]);
      }
      const Estimate c3 = mc_mean(m3);
      const Estimate c4 = mc_mean(m4);
      if (c3.value > best3) {
        best3 = c3.value;
        s3 = c3;
      }
      if (c4.value > best4) {
        best4 = c4.value;
        s4 = c4;
      }
    }
    q.Mt3 = s3;
    q.Mt4 = s4;
  }

  std::vector<double> v5(n), v6(n);
  for (size_t s = 0; s < n; ++s) {
    const Vec& x = pi_gamma_samples[s];
    const double gam = opts.tamed ? taming_remainder(model, opts.gamma_bar, x)
                                  : 0.0;
    v5[s] = gam * gam;
    v6[s] = model.drift(x).squaredNorm();
  }
  q.Mt5 = opts.tamed ? mc_mean(v5) : Estimate{0.0, 0.0};
  q.Mt6 = mc_mean(v6);
  q.Mt7 = Estimate{0.0, 0.0};  // assembled from the TV inputs, not sampled
  return q;
}

}  // namespace mcmclab
