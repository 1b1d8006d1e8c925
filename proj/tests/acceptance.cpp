// Acceptance gate for the whole library: ten end-to-end criteria, one
// pass/fail line each, exit code 0 only when every line passes. Tolerances
// and wall budgets are pinned; numbers in the lines are the measured values.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mcmclab/bounds.hpp"
#include "mcmclab/coupling.hpp"
#include "mcmclab/experiment.hpp"
#include "mcmclab/metrics.hpp"
#include "mcmclab/model.hpp"
#include "mcmclab/rng.hpp"
#include "mcmclab/sampler.hpp"
#include "mcmclab/util.hpp"

using namespace mcmclab;

namespace {

double elapsed_s(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

std::string strf(const char* fmt, ...) {
  char buf[768];
  va_list args;
  va_start(args, fmt);
  std::vsnprintf(buf, sizeof buf, fmt, args);
  va_end(args);
  return std::string(buf);
}

bool report(int idx, bool ok, const std::string& detail) {
  std::printf("[%s] criterion %d: %s\n", ok ? "PASS" : "FAIL", idx,
              detail.c_str());
  std::fflush(stdout);
  return ok;
}

// 1. Euler chain on the isotropic Gaussian: per-coordinate stationary
// variance matches (1 - gamma/2)^{-1} within 3 stderr on every cell of the
// {gamma} x {d} grid, one million post-burn-in steps per cell.
bool stationary_variance_grid() {
  double worst_z = 0.0, worst_cell_s = 0.0;
  bool ok = true;
  for (double gamma : {0.05, 0.1, 0.2}) {
    for (int d : {1, 10, 100}) {
      const auto t0 = std::chrono::steady_clock::now();
      SweepSpec spec;
      spec.kernel = KernelKind::Ula;
      spec.seed = 20260101;
      const long thin = static_cast<long>(std::ceil(1.0 / gamma));
      spec.samples_per_cell = 1000000L / thin;
      const StationaryMomentEstimate est =
          estimate_stationary_moment(spec, d, gamma);
      const double target = 1.0 / (1.0 - gamma / 2.0);
      const double z = std::abs(est.sigma2.value - target) / est.sigma2.std_err;
      const double cell_s = elapsed_s(t0);
      worst_z = std::max(worst_z, z);
      worst_cell_s = std::max(worst_cell_s, cell_s);
      if (!(z <= 3.0) || !(cell_s < 60.0)) ok = false;
    }
  }
  return report(
      1, ok,
      strf("ula stationary variance, 9 gaussian cells, 1e6 steps each: "
           "max |z| = %.2f (limit 3), slowest cell %.1fs (limit 60)",
           worst_z, worst_cell_s));
}

// 2. Product-aggregated W2 bias of the Euler chain at d = 100, gamma = 0.1:
// pooled per-coordinate quantile coupling against exact unit-normal draws,
// scaled by sqrt(d), within 5% of the closed form 0.259784.
bool product_aggregated_bias() {
  const auto t0 = std::chrono::steady_clock::now();
  const int d = 100;
  const double gamma = 0.1;
  const TargetModel model = make_gaussian_model(d, 1.0);
  const KernelSpec kernel = KernelSpec::make(KernelKind::Ula, model, gamma);

  RunOptions opts;
  opts.thin = 10;
  opts.burn_in = default_burn_in(model, gamma);
  const long retained = 100000;
  opts.n_steps = opts.burn_in + retained * opts.thin;

  const std::uint64_t seed = 20260202;
  RngStream init(seed, derive_stream_id(seed, 0, purpose::init));
  const Vec x0 = init.gaussian_vector(d);
  RngStream noise(seed, derive_stream_id(seed, 0, purpose::chain));
  Trajectory traj = run_chain(kernel, x0, opts, noise);

  std::vector<double> pooled;
  pooled.reserve(static_cast<size_t>(retained) * d);
  for (size_t i = 1; i < traj.states.size(); ++i)
    for (int j = 0; j < d; ++j) pooled.push_back(traj.states[i][j]);
  traj.states.clear();
  traj.states.shrink_to_fit();

  RngStream ref(seed, derive_stream_id(seed, 1, purpose::reference));
  std::vector<double> exact(pooled.size());
  for (double& v : exact) v = ref.gaussian();

  const DistanceEstimate per_coord =
      w1d_empirical(std::move(pooled), std::move(exact), 2.0);
  const double bias = product_w2(per_coord.value, d);
  const double target = 0.259784;
  const double rel = (bias - target) / target;
  const double wall = elapsed_s(t0);
  const bool ok = std::abs(rel) <= 0.05 && wall < 120.0;
  return report(
      2, ok,
      strf("product-aggregated ula bias, d=100 gamma=0.1, 1e5 retained: "
           "%.6f vs %.6f (rel err %+.2f%%, limit 5%%), %.0fs (limit 120)",
           bias, target, 100.0 * rel, wall));
}

// 3. Unadjusted Hamiltonian kernel: (a) the leapfrog map conserves its
// quadratic invariant to 1e-12 relative over 1e4 steps, (b) stationary
// variance matches (1 - gamma^2/4)^{-1} within 3 stderr, (c) measured W2
// bias at d = 100, gamma = 0.2 lands within 5% of 0.050378.
bool hamiltonian_kernel_checks() {
  const TargetModel m10 = make_gaussian_model(10, 1.0);
  RngStream qs(20260303, derive_stream_id(20260303, 0, purpose::init));
  double worst_rel = 0.0;
  for (double gamma : {0.1, 0.3, 0.5}) {
    Vec q = qs.gaussian_vector(10);
    Vec p = qs.gaussian_vector(10);
    const double coef = 1.0 - gamma * gamma / 4.0;
    const double h0 = 0.5 * coef * q.squaredNorm() + 0.5 * p.squaredNorm();
    for (int n = 0; n < 10000; ++n) {
      verlet_step(m10, gamma, q, p);
      const double h = 0.5 * coef * q.squaredNorm() + 0.5 * p.squaredNorm();
      worst_rel = std::max(worst_rel, std::abs(h - h0) / h0);
    }
  }
  const bool energy_ok = worst_rel <= 1e-12;

  double worst_z = 0.0;
  for (double gamma : {0.1, 0.2}) {
    SweepSpec spec;
    spec.kernel = KernelKind::Uhmc;
    spec.duration_T = 1.0;
    spec.seed = 20260304;
    spec.samples_per_cell = 200000;
    const StationaryMomentEstimate est =
        estimate_stationary_moment(spec, 10, gamma);
    const double target = 1.0 / (1.0 - gamma * gamma / 4.0);
    worst_z = std::max(
        worst_z, std::abs(est.sigma2.value - target) / est.sigma2.std_err);
  }
  const bool var_ok = worst_z <= 3.0;

  SweepSpec cell;
  cell.kernel = KernelKind::Uhmc;
  cell.duration_T = 1.0;
  cell.samples_per_cell = 100000;
  cell.seed = 20260305;
  const ExperimentRecord rec =
      run_cell(cell, 100, 0.2, MetricSpec::wasserstein2_euclidean());
  const double target = 0.050378;
  const double rel = (rec.bias - target) / target;
  const bool bias_ok = rec.status == "ok" && std::abs(rel) <= 0.05;

  return report(
      3, energy_ok && var_ok && bias_ok,
      strf("uhmc: leapfrog invariant drift %.1e (limit 1e-12), variance "
           "max |z| = %.2f (limit 3), d=100 gamma=0.2 bias %.6f vs %.6f "
           "(rel err %+.2f%%, limit 5%%)",
           worst_rel, worst_z, rec.bias, target, 100.0 * rel));
}

// 4. Step-size order of the bias: slope 1 for the Euler kernel over
// {0.02, 0.05, 0.1, 0.2} and slope 2 for the Hamiltonian kernel at T = 1
// over {0.05, 0.1, 0.2}.
bool gamma_slope_checks() {
  const auto t0 = std::chrono::steady_clock::now();
  const MetricSpec w2 = MetricSpec::wasserstein2_euclidean();

  SweepSpec ula;
  ula.kernel = KernelKind::Ula;
  ula.samples_per_cell = 100000;
  ula.seed = 20260406;
  std::vector<ExperimentRecord> ula_recs;
  for (double g : {0.02, 0.05, 0.1, 0.2})
    ula_recs.push_back(run_cell(ula, 10, g, w2));
  const SlopeFit f1 = fit_slope(ula_recs, "gamma");

  SweepSpec hmc;
  hmc.kernel = KernelKind::Uhmc;
  hmc.duration_T = 1.0;
  hmc.samples_per_cell = 100000;
  hmc.seed = 20260407;
  std::vector<ExperimentRecord> hmc_recs;
  for (double g : {0.05, 0.1, 0.2})
    hmc_recs.push_back(run_cell(hmc, 10, g, w2));
  const SlopeFit f2 = fit_slope(hmc_recs, "gamma");

  const double wall = elapsed_s(t0);
  const bool ok = std::abs(f1.slope - 1.0) <= 0.1 &&
                  std::abs(f2.slope - 2.0) <= 0.15 && wall < 600.0;
  return report(4, ok,
                strf("step-size slopes: ula %.3f (1 +- 0.1), uhmc %.3f "
                     "(2 +- 0.15), %.0fs (limit 600)",
                     f1.slope, f2.slope, wall));
}

// 5. Dimension dependence at gamma = 0.1 over d in {10, 100, 1000}: W2 bias
// grows like sqrt(d) in the euclidean metric, is flat in the normalized l2
// metric, and grows like d in the l1 metric.
bool dimension_slope_checks() {
  const auto t0 = std::chrono::steady_clock::now();
  SweepSpec spec;
  spec.dimensions = {10, 100, 1000};
  spec.gammas = {0.1};
  spec.kernel = KernelKind::Ula;
  spec.metrics = {MetricSpec::wasserstein2_euclidean(),
                  MetricSpec::make(2.0, BaseMetric::NormalizedLq, 2.0),
                  MetricSpec::make(1.0, BaseMetric::Lq, 1.0)};
  spec.samples_per_cell = 20000;
  spec.seed = 20260508;
  const std::vector<SlopeFit> fits = dimension_scan(spec);
  const double wall = elapsed_s(t0);
  const bool ok = std::abs(fits[0].slope - 0.5) <= 0.05 &&
                  std::abs(fits[1].slope) <= 0.05 &&
                  std::abs(fits[2].slope - 1.0) <= 0.05;
  return report(5, ok,
                strf("dimension slopes at gamma=0.1: euclidean %.3f "
                     "(0.5 +- 0.05), normalized-l2 %.3f (0 +- 0.05), l1 %.3f "
                     "(1 +- 0.05), %.0fs",
                     fits[0].slope, fits[1].slope, fits[2].slope, wall));
}

// 6. Finite-time accuracy of the Euler chain on the unit Gaussian at
// gamma = 0.1, d = 10: the coupled rmse curve stays under the accuracy-
// constant envelope for all 100 steps, and the one-step per-coordinate
// mean-square error matches its closed form within 3 stderr.
bool euler_accuracy_curve() {
  const int d = 10;
  const double gamma = 0.1;
  const TargetModel model = make_gaussian_model(d, 1.0);
  const std::uint64_t seed = 20260609;

  RngStream init(seed, derive_stream_id(seed, 0, purpose::init));
  std::vector<Vec> cloud;
  cloud.reserve(4000);
  for (int i = 0; i < 4000; ++i) cloud.push_back(init.gaussian_vector(d));
  MQuantityOptions mopts;
  mopts.gamma = mopts.gamma_bar = gamma;
  RngStream qstream(seed, derive_stream_id(seed, 0, purpose::quantity));
  const KeyQuantities kq = estimate_m_quantities(model, cloud, mopts, qstream);
  const EmAccuracyConstants cs = em_accuracy_constants(
      1.0, gamma, gamma, kq.M1.value, kq.M2.value, kq.M3.value);

  CouplingOptions copts;
  copts.horizon_steps = 100;
  copts.replicas = 2000;
  RngStream cstream(seed, derive_stream_id(seed, 0, purpose::coupling));
  const AccuracyCurve curve = coupled_em_accuracy(model, gamma, copts, cstream);
  bool under = true;
  double tightest = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < curve.times.size(); ++i) {
    const double envelope = em_curve_bound(gamma, cs, curve.times[i]);
    if (curve.rmse[i] > envelope) under = false;
    if (curve.rmse[i] > 0.0)
      tightest = std::min(tightest, envelope / curve.rmse[i]);
  }

  CouplingOptions one;
  one.horizon_steps = 1;
  one.replicas = 100000;
  RngStream ostream2(seed, derive_stream_id(seed, 1, purpose::coupling));
  const AccuracyCurve first = coupled_em_accuracy(model, gamma, one, ostream2);
  const double e1 = std::exp(-gamma);
  const double per_coord =
      (e1 - 1.0 + gamma) * (e1 - 1.0 + gamma) +
      2.0 * ((1.0 - std::exp(-2.0 * gamma)) / 2.0 - 2.0 * (1.0 - e1) + gamma);
  const double rmse_ref = std::sqrt(d * per_coord);
  const double z = std::abs(first.rmse[1] - rmse_ref) / first.std_err[1];
  const bool one_ok = z <= 3.0;
  const double measured_per_coord = first.rmse[1] * first.rmse[1] / d;

  return report(
      6, under && one_ok,
      strf("coupled accuracy, gaussian d=10 gamma=0.1: curve under the "
           "envelope for 100 steps (min ratio %.2f), one-step per-coordinate "
           "mse %.4e vs %.4e (|z| = %.2f, limit 3)",
           tightest, measured_per_coord, per_coord, z));
}

// 7. Deterministic contraction identities under shared noise: the coupled
// Euler distance on the Gaussian decays by exactly (1 - gamma) per step and
// the exact Hamiltonian flow contracts by exactly |cos T| per transition.
bool coupled_contraction_identities() {
  const TargetModel m = make_gaussian_model(5, 1.0);
  const MetricSpec w2 = MetricSpec::wasserstein2_euclidean();
  const std::uint64_t seed = 20260710;

  RngStream p0(seed, derive_stream_id(seed, 0, purpose::init));
  const Vec x0 = p0.gaussian_vector(5);
  const Vec y0 = p0.gaussian_vector(5);
  const double d0 = (x0 - y0).norm();

  const double gamma = 0.1;
  const KernelSpec ula = KernelSpec::make(KernelKind::Ula, m, gamma);
  RngStream s1(seed, derive_stream_id(seed, 0, purpose::coupling));
  const std::vector<double> dist =
      coupled_distance_series(ula, w2, x0, y0, 50, s1);
  double ula_gap = 0.0;
  for (int n = 0; n <= 50; ++n)
    ula_gap = std::max(
        ula_gap, std::abs(dist[n] - d0 * std::pow(1.0 - gamma, n)));

  const double T = 0.9;
  const KernelSpec eh = KernelSpec::make(KernelKind::ExactHmc, m, 0.0, T);
  RngStream s2(seed, derive_stream_id(seed, 1, purpose::coupling));
  const std::vector<double> hdist =
      coupled_distance_series(eh, w2, x0, y0, 30, s2);
  const double f = std::abs(std::cos(T));
  double hmc_gap = 0.0;
  for (int n = 0; n <= 30; ++n)
    hmc_gap = std::max(hmc_gap, std::abs(hdist[n] - d0 * std::pow(f, n)));

  const double tol = 1e-12 * (1.0 + d0);
  const bool ok = ula_gap <= tol && hmc_gap <= tol;
  return report(
      7, ok,
      strf("coupled contraction identities: ula |gap| %.1e, exact-hmc |gap| "
           "%.1e (limit %.1e)",
           ula_gap, hmc_gap, tol));
}

// 8. Convergence-profile bounds: the geometric closed form reproduces its
// pinned value to 1e-9, dominates the profile minimum on 100 random input
// tuples, and the smoothing constant at curvature 1 equals 1.1389 +- 1e-3.
bool profile_bound_checks() {
  ConvergenceInputs in;
  in.A = 1.0;
  in.c = 1.0;
  in.lambda = 2.0;
  in.B = 1.0;
  in.gamma = 0.01;
  const double v = geometric_profile_bound(in);
  const double pinned = 0.08319584291892893;
  const bool pin_ok = std::abs(v - pinned) <= 1e-9;

  std::mt19937 gen(20260811u);
  std::uniform_real_distribution<double> uA(1.0, 5.0), uc(0.2, 3.0),
      ul(0.5, 4.0), ug(0.005, 0.1), uB(0.1, 10.0);
  int dominated = 0;
  for (int trial = 0; trial < 100; ++trial) {
    ConvergenceInputs t;
    t.A = uA(gen);
    t.c = uc(gen);
    t.lambda = ul(gen);
    t.gamma = ug(gen);
    t.B = uB(gen);
    const double closed = geometric_profile_bound(t);
    const double grid = bias_from_convergence_profile(
        [&](long n) { return t.A * std::exp(-t.c * t.gamma * n); },
        [&](long n) { return t.gamma * t.B * std::exp(t.lambda * t.gamma * n); },
        60000);
    if (closed >= grid * (1.0 - 1e-12)) ++dominated;
  }

  const double ctv = tv_regularization_constant(1.0);
  const bool ctv_ok = std::abs(ctv - 1.1389) <= 1e-3;

  const bool ok = pin_ok && dominated == 100 && ctv_ok;
  return report(
      8, ok,
      strf("profile bounds: closed form %.10f vs %.10f, dominance %d/100, "
           "smoothing constant %.6f vs 1.1389 +- 1e-3",
           v, pinned, dominated, ctv));
}

// 9. Quantity estimators and structured-class budgets: Gaussian M-quantities
// from exact draws, exact class constants, and the two Gaussian-momentum
// moment identities behind the Hamiltonian accuracy constants.
bool quantity_estimator_checks() {
  const int d = 10;
  const TargetModel model = make_gaussian_model(d, 1.0);
  const std::uint64_t seed = 20260912;

  RngStream init(seed, derive_stream_id(seed, 0, purpose::init));
  std::vector<Vec> cloud;
  cloud.reserve(4000);
  for (int i = 0; i < 4000; ++i) cloud.push_back(init.gaussian_vector(d));
  MQuantityOptions opts;
  opts.gamma = opts.gamma_bar = 0.1;
  RngStream qstream(seed, derive_stream_id(seed, 0, purpose::quantity));
  const KeyQuantities kq = estimate_m_quantities(model, cloud, opts, qstream);
  const double z1 = std::abs(kq.M1.value - d) / kq.M1.std_err;
  const bool m1_ok = z1 <= 3.0;
  const bool m2_ok =
      std::abs(kq.M2.value - d) <= 1e-9 && kq.M2.std_err <= 1e-9;
  const bool m4_ok = kq.M4.value == 0.0 && kq.M4.std_err == 0.0;

  const ClassConstants cc = mean_field_constants(2.0, 50);
  const bool class_ok = cc.K == 400.0 && cc.J == 400.0;

  // first identity: E|Db(q)p|^2 = |Db(q)|_F^2 on a nonlinear drift
  const TargetModel dw = make_product_model(8, double_well_potential());
  RngStream ps(seed, derive_stream_id(seed, 1, purpose::momentum));
  const Vec q = 0.7 * ps.gaussian_vector(8);
  std::vector<double> first;
  first.reserve(40000);
  for (int i = 0; i < 40000; ++i) {
    const Vec p = ps.gaussian_vector(8);
    first.push_back(dw.jacobian_apply(q, p).squaredNorm());
  }
  const Estimate id1 = batch_means(first);
  const double id1_target = dw.jacobian_frobenius_sq(q);
  const double z2 = std::abs(id1.value - id1_target) / id1.std_err;
  const bool id1_ok = z2 <= 4.0;

  // second identity: E(p'Ap)^2 = 2|A|_F^2 + Tr(A)^2 for symmetric A
  Eigen::MatrixXd A(6, 6);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j <= i; ++j) {
      const double v = ps.gaussian();
      A(i, j) = v;
      A(j, i) = v;
    }
  const double id2_target =
      2.0 * A.squaredNorm() + A.trace() * A.trace();
  std::vector<double> second;
  second.reserve(40000);
  for (int i = 0; i < 40000; ++i) {
    const Vec p = ps.gaussian_vector(6);
    const double quad = p.dot(A * p);
    second.push_back(quad * quad);
  }
  const Estimate id2 = batch_means(second);
  const double z3 = std::abs(id2.value - id2_target) / id2.std_err;
  const bool id2_ok = z3 <= 4.0;

  const bool ok = m1_ok && m2_ok && m4_ok && class_ok && id1_ok && id2_ok;
  return report(
      9, ok,
      strf("quantity estimators: M1 %.3f (target 10, |z| = %.2f), M2 = %.0f "
           "exactly, M4 = %.0f, class constants (%.0f, %.0f), momentum "
           "identities |z| = %.2f / %.2f (limit 4)",
           kq.M1.value, z1, kq.M2.value, kq.M4.value, cc.K, cc.J, z2, z3));
}

// 10. Total-variation pieces: the radial quadrature reproduces its pinned
// value and the assembled TV bound dominates the exact TV gap between the
// continuous and discrete stationary laws on a grid of Gaussian cells.
bool tv_bound_checks() {
  const double v = tv_isotropic_gaussians(1, 1.0, 2.0);
  const bool pin_ok = std::abs(v - 0.3227) <= 1e-3;

  const double ctv = tv_regularization_constant(1.0);
  bool dom_ok = true;
  double min_ratio = std::numeric_limits<double>::infinity();
  for (double gamma : {0.05, 0.1, 0.2}) {
    for (int d : {1, 10, 100}) {
      const double s2 = 1.0 / (1.0 - gamma / 2.0);
      const double mt6 = d * s2;          // second moment of the drift
      const double btv = std::sqrt(mt6);  // supplied perturbation amplitude
      const double mt7 = tv_perturbation_constant(ctv, 1.0, 0.1);
      const double bound = tv_bias_bound(1.0, gamma, d, mt6, ctv, btv, mt7);
      const double tv = tv_isotropic_gaussians(d, 1.0, std::sqrt(s2));
      if (!(bound >= tv)) dom_ok = false;
      min_ratio = std::min(min_ratio, bound / tv);
    }
  }

  return report(
      10, pin_ok && dom_ok,
      strf("tv route: quadrature %.6f vs 0.3227 +- 1e-3, assembled bound "
           "dominates on 9 gaussian cells (min ratio %.2f)",
           v, min_ratio));
}

}  // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();
  bool all = true;
  all &= stationary_variance_grid();
  all &= product_aggregated_bias();
  all &= hamiltonian_kernel_checks();
  all &= gamma_slope_checks();
  all &= dimension_slope_checks();
  all &= euler_accuracy_curve();
  all &= coupled_contraction_identities();
  all &= profile_bound_checks();
  all &= quantity_estimator_checks();
  all &= tv_bound_checks();
  std::printf("acceptance: %s in %.0fs\n",
              all ? "10/10 criteria passed" : "FAILURES above",
              elapsed_s(t0));
  return all ? 0 : 1;
}
