#include "mcmclab/coupling.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace mcmclab {

namespace {

// Online mean/variance accumulators, one slot per curve point.
struct WelfordRow {
  std::vector<double> mean, m2;
  long count = 0;

  explicit WelfordRow(size_t n) : mean(n, 0.0), m2(n, 0.0) {}

  void add(const std::vector<double>& row) {
    ++count;
    for (size_t i = 0; i < row.size(); ++i) {
      const double delta = row[i] - mean[i];
      mean[i] += delta / count;
      m2[i] += delta * (row[i] - mean[i]);
    }
  }
};

// Converts accumulated squared distances into an rmse curve with
// delta-method standard errors.
void fill_curve(const WelfordRow& acc, double dt, AccuracyCurve& curve) {
  const size_t n = acc.mean.size();
  curve.times.resize(n);
  curve.rmse.resize(n);
  curve.std_err.resize(n);
  for (size_t i = 0; i < n; ++i) {
    curve.times[i] = dt * static_cast<double>(i);
    const double m = std::max(acc.mean[i], 0.0);
    const double rmse = std::sqrt(m);
    double se_m = 0.0;
    if (acc.count > 1) se_m = std::sqrt(acc.m2[i] / (acc.count - 1) / acc.count);
    curve.rmse[i] = rmse;
    curve.std_err[i] = rmse > 0 ? se_m / (2.0 * rmse) : std::sqrt(se_m);
  }
  curve.replicas = acc.count;
}

Vec initial_draw(const TargetModel& model, double gamma, InitialLaw law,
                 long equil_steps, bool tamed, RngStream& init_stream) {
  const int d = model.dimension;
  if (law == InitialLaw::ClosedFormPi) {
    if (!model.stationary_law.has_value())
      throw std::invalid_argument(
          "closed-form initialization needs a model with a known "
          "stationary law");
    const double sigma = std::sqrt(model.stationary_law->variance_scale);
    return sigma * init_stream.gaussian_vector(d);
  }
  KernelSpec k = KernelSpec::make(
      tamed ? KernelKind::TamedUla : KernelKind::Ula, model, gamma, 0.0,
      std::max(gamma, 1.0));
  RunOptions opts;
  opts.burn_in = equil_steps > 0 ? equil_steps : default_burn_in(model, gamma);
  opts.n_steps = 0;
  Vec x0 = Vec::Zero(d);
  return run_chain(k, x0, opts, init_stream).states.front();
}

}  // namespace

AccuracyCurve coupled_em_accuracy(const TargetModel& model, double gamma,
                                  const CouplingOptions& opts,
                                  RngStream& stream) {
  if (!(gamma > 0)) throw std::invalid_argument("step size must be > 0");
  if (opts.replicas < 1) throw std::invalid_argument("need replicas >= 1");
  if (opts.horizon_steps < 0)
    throw std::invalid_argument("horizon must be nonnegative");
  const bool exact_ref = opts.reference == ReferenceKind::ExactOu;
  if (exact_ref && !model.is_unit_gaussian())
    throw std::invalid_argument(
        "exact reference requires the unit-variance Gaussian model");
  if (!exact_ref && opts.refinement < 8)
    throw std::invalid_argument("fine-grid refinement must be >= 8");

  const int d = model.dimension;
  const long n = opts.horizon_steps;
  const std::uint64_t base = stream.base_key();
  WelfordRow acc(static_cast<size_t>(n) + 1);

  // exact reference: joint law of the coarse Brownian increment W = B_gamma
  // and the stochastic integral I = int_0^gamma e^{-(gamma-s)} dB_s
  const double var_w = gamma;
  const double cov_iw = 1.0 - std::exp(-gamma);
  const double var_i = 0.5 * (1.0 - std::exp(-2.0 * gamma));
  const double w_coef = cov_iw / var_w;
  const double i_resid = std::sqrt(std::max(var_i - cov_iw * cov_iw / var_w, 0.0));
  const double decay = std::exp(-gamma);
  const double root2 = std::sqrt(2.0);

  const int refine = exact_ref ? 1 : opts.refinement;
  const double dt_fine = gamma / refine;
  const double root_fine = std::sqrt(dt_fine);

  std::vector<double> sq(static_cast<size_t>(n) + 1);
  Vec x(d), y(d), b0(d), bref(d);

  for (long r = 0; r < opts.replicas; ++r) {
    RngStream init(base, derive_stream_id(base, static_cast<std::uint64_t>(r),
                                          purpose::init));
    RngStream noise(base, derive_stream_id(base, static_cast<std::uint64_t>(r),
                                           purpose::coupling));
    x = initial_draw(model, gamma, opts.initial_law, opts.equil_steps,
                     opts.tamed, init);
    y = x;
    sq[0] = 0.0;
    for (long k = 0; k < n; ++k) {
      drift_into(model, x, b0);
      if (opts.tamed) b0 /= 1.0 + gamma * b0.norm();
      if (exact_ref) {
        for (int i = 0; i < d; ++i) {
          const double xi1 = noise.gaussian();
          const double xi2 = noise.gaussian();
          const double w = std::sqrt(var_w) * xi1;
          const double integral = w_coef * w + i_resid * xi2;
          x[i] += gamma * b0[i] + root2 * w;
          y[i] = decay * y[i] + root2 * integral;
        }
      } else {
        // same fine increments feed both paths; the coarse side applies its
        // frozen drift in matching substeps so zero-drift paths agree bitwise
        for (int j = 0; j < refine; ++j) {
          drift_into(model, y, bref);
          if (opts.tamed) bref /= 1.0 + dt_fine * bref.norm();
          for (int i = 0; i < d; ++i) {
            const double db = root_fine * noise.gaussian();
            x[i] += dt_fine * b0[i] + root2 * db;
            y[i] += dt_fine * bref[i] + root2 * db;
          }
        }
      }
      if (!(x.norm() <= kDivergenceThreshold) ||
          !(y.norm() <= kDivergenceThreshold))
        throw divergence_error(k);
      sq[static_cast<size_t>(k) + 1] = (x - y).squaredNorm();
    }
    acc.add(sq);
  }

  AccuracyCurve curve;
  curve.reference = opts.reference;
  curve.refinement = exact_ref ? 0 : refine;
  fill_curve(acc, gamma, curve);
  return curve;
}

AccuracyCurve coupled_hmc_accuracy(const TargetModel& model, double T,
                                   double gamma, long replicas,
                                   RngStream& stream) {
  if (!model.is_unit_gaussian())
    throw std::invalid_argument(
        "exact flow reference requires the unit-variance Gaussian model");
  const double ratio = T / gamma;
  if (std::abs(ratio - std::round(ratio)) > 1e-9)
    throw std::invalid_argument(
        "duration T must be an integer multiple of the step size");
  if (replicas < 1) throw std::invalid_argument("need replicas >= 1");
  const int n = static_cast<int>(std::llround(ratio));
  const int d = model.dimension;
  const std::uint64_t base = stream.base_key();
  WelfordRow acc(static_cast<size_t>(n) + 1);
  std::vector<double> sq(static_cast<size_t>(n) + 1);

  for (long r = 0; r < replicas; ++r) {
    RngStream init(base, derive_stream_id(base, static_cast<std::uint64_t>(r),
                                          purpose::init));
    RngStream mom(base, derive_stream_id(base, static_cast<std::uint64_t>(r),
                                         purpose::momentum));
    const Vec q0 = init.gaussian_vector(d);
    const Vec p0 = mom.gaussian_vector(d);
    Vec qv = q0, pv = p0;
    sq[0] = 0.0;
    for (int j = 1; j <= n; ++j) {
      verlet_step(model, gamma, qv, pv);
      const double t = gamma * j;
      // exact flow from (q0, p0), evaluated in closed form
      const double c = std::cos(t), s = std::sin(t);
      double dist = 0.0;
      for (int i = 0; i < d; ++i) {
        const double qe = c * q0[i] + s * p0[i];
        const double diff = qv[i] - qe;
        dist += diff * diff;
      }
      sq[static_cast<size_t>(j)] = dist;
    }
    acc.add(sq);
  }

  AccuracyCurve curve;
  curve.reference = ReferenceKind::ExactOu;  // exact closed-form flow
  fill_curve(acc, gamma, curve);
  return curve;
}

std::vector<double> coupled_distance_series(const KernelSpec& kernel,
                                            const MetricSpec& metric,
                                            const Vec& x0, const Vec& y0,
                                            long n_steps, RngStream& stream) {
  const TargetModel& model = *kernel.model;
  const double gamma = kernel.gamma;
  Vec x = x0, y = y0;
  Vec g(x0.size());
  std::vector<double> out;
  out.reserve(static_cast<size_t>(n_steps) + 1);
  out.push_back(base_distance(metric, x, y));
  for (long k = 0; k < n_steps; ++k) {
    stream.fill_gaussian(g);
    switch (kernel.kind) {
      case KernelKind::Ula:
        x = ula_step(model, gamma, x, g);
        y = ula_step(model, gamma, y, g);
        break;
      case KernelKind::TamedUla:
        x = tamed_ula_step(model, gamma, x, g);
        y = tamed_ula_step(model, gamma, y, g);
        break;
      case KernelKind::Uhmc: {
        const int n = kernel.leapfrog_steps();
        Vec px = g, py = g;
        for (int i = 0; i < n; ++i) {
          verlet_step(model, gamma, x, px);
          verlet_step(model, gamma, y, py);
        }
        break;
      }
      case KernelKind::ExactOu:
        x = exact_ou_step(1.0, gamma, x, g);
        y = exact_ou_step(1.0, gamma, y, g);
        break;
      case KernelKind::ExactHmc: {
        Vec px = g, py = g;
        exact_gaussian_hmc_flow(kernel.duration_T, x, px);
        exact_gaussian_hmc_flow(kernel.duration_T, y, py);
        break;
      }
    }
    out.push_back(base_distance(metric, x, y));
  }
  return out;
}

ContractionEstimate estimate_contraction(const KernelSpec& kernel,
                                         const MetricSpec& metric,
                                         long n_pairs, long n_steps,
                                         RngStream& stream) {
  if (n_pairs < 1 || n_steps < 2)
    throw std::invalid_argument("need at least one pair and two steps");
  const int d = kernel.model->dimension;
  const std::uint64_t base = stream.base_key();
  std::vector<double> mean_dist(static_cast<size_t>(n_steps) + 1, 0.0);

  for (long r = 0; r < n_pairs; ++r) {
    RngStream init(base, derive_stream_id(base, static_cast<std::uint64_t>(r),
                                          purpose::init));
    RngStream noise(base, derive_stream_id(base, static_cast<std::uint64_t>(r),
                                           purpose::coupling));
    const Vec x0 = 2.0 * init.gaussian_vector(d);
    const Vec y0 = 2.0 * init.gaussian_vector(d);
    const auto series =
        coupled_distance_series(kernel, metric, x0, y0, n_steps, noise);
    for (size_t i = 0; i < series.size(); ++i) mean_dist[i] += series[i];
  }
  for (double& v : mean_dist) v /= static_cast<double>(n_pairs);

  // discard the leading transient, fit log distance against step index
  const auto skip = static_cast<size_t>((n_steps + 9) / 10);
  ContractionEstimate est;
  est.metric = metric;
  est.pairs = n_pairs;
  const double unit = kernel.kind == KernelKind::Uhmc ||
                              kernel.kind == KernelKind::ExactHmc
                          ? kernel.duration_T
                          : kernel.gamma;
  for (size_t i = skip; i < mean_dist.size(); ++i) {
    if (!(mean_dist[i] > 0.0)) {
      est.rate_per_unit_time = std::numeric_limits<double>::infinity();
      est.fit_residual = 0.0;
      return est;
    }
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const auto m = static_cast<double>(mean_dist.size() - skip);
  for (size_t i = skip; i < mean_dist.size(); ++i) {
    const double xi = static_cast<double>(i);
    const double yi = std::log(mean_dist[i]);
    sx += xi;
    sy += yi;
    sxx += xi * xi;
    sxy += xi * yi;
  }
  const double denom = m * sxx - sx * sx;
  const double slope = (m * sxy - sx * sy) / denom;
  const double intercept = (sy - slope * sx) / m;
  est.rate_per_unit_time = -slope / unit;
  double ss = 0.0;
  for (size_t i = skip; i < mean_dist.size(); ++i) {
    const double resid =
        std::log(mean_dist[i]) - (intercept + slope * static_cast<double>(i));
    ss += resid * resid;
  }
  est.fit_residual = std::sqrt(ss / m);
  return est;
}

}  // namespace mcmclab
