#include "mcmclab/experiment.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "mcmclab/coupling.hpp"

namespace mcmclab {

const char* bias_route_name(BiasRoute r) {
  switch (r) {
    case BiasRoute::ClosedForm: return "closed-form";
    case BiasRoute::ProductAggregation: return "product-aggregation";
    case BiasRoute::SlicedProxy: return "sliced-proxy";
  }
  return "?";
}

TargetModel ModelSpec::build(int dimension) const {
  if (family == "gaussian") return make_gaussian_model(dimension, variance);
  if (family == "product-gaussian")
    return make_product_model(dimension, gaussian_potential());
  if (family == "product-double-well")
    return make_product_model(dimension, double_well_potential());
  if (family == "mean-field-double-well" || family == "mean-field-gaussian") {
    const int k = components > 0 ? components : 1;
    int n = particles;
    if (n <= 0) {
      if (dimension % k != 0)
        throw std::invalid_argument(
            "mean-field dimension must be divisible by the component count");
      n = dimension / k;
    } else if (n * k != dimension) {
      throw std::invalid_argument(
          "mean-field particle count does not match the requested dimension");
    }
    const ScalarPotential conf = family == "mean-field-double-well"
                                     ? double_well_potential()
                                     : gaussian_potential();
    return make_mean_field_model(n, k, conf, gaussian_potential(), delta);
  }
  throw std::invalid_argument("unknown model family: " + family);
}

namespace {

bool has_closed_form(const ModelSpec& ms) {
  return ms.family == "gaussian" || ms.family == "product-gaussian";
}

bool is_product_family(const ModelSpec& ms) {
  return ms.family.rfind("product-", 0) == 0;
}

bool is_transition_kernel(KernelKind k) {
  return k == KernelKind::Uhmc || k == KernelKind::ExactHmc;
}

void validate_metric_for_route(const MetricSpec& m, BiasRoute route) {
  if (route == BiasRoute::SlicedProxy) return;
  if (m.base == BaseMetric::Euclidean) {
    if (route == BiasRoute::ProductAggregation && m.order_p != 2.0)
      throw std::invalid_argument(
          "product aggregation over the Euclidean base needs order p = 2");
    return;
  }
  if (m.order_p != m.q)
    throw std::invalid_argument(
        "lq-based stationary bias estimates need matching orders p = q");
}

std::string format_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string format_full(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string metric_label(const MetricSpec& m) {
  if (m.base == BaseMetric::Euclidean) return "euclidean";
  return std::string(base_metric_name(m.base)) + "(" + format_g(m.q) + ")";
}

std::uint64_t cell_stream(std::uint64_t seed, int d, double gamma,
                          std::uint64_t purpose_tag) {
  std::uint64_t h = hash_absorb(mix64(seed + kGoldenGamma),
                                static_cast<std::uint64_t>(d));
  h = hash_absorb(h, std::bit_cast<std::uint64_t>(gamma));
  return hash_absorb(h, purpose_tag);
}

struct CellSamples {
  Estimate sigma2;              // per-coordinate second moment of the chain
  bool cv_used = false;         // exact coupled reference subtracted
  std::vector<double> pooled;   // strided coordinate samples
  std::vector<Vec> states;      // strided full states, for the M estimators
  long retained = 0;
  long burn_in = 0;
};

// One equilibrated chain per (d, gamma) cell. For the unit Gaussian an exact
// reference chain rides along on the same noise, so the per-coordinate
// second moment is measured as 1 + mean(x^2 - y^2) with the empirical noise
// cancelling between the two.
CellSamples run_cell_chain(const TargetModel& model, const SweepSpec& spec,
                           double gamma, long pooled_cap, long state_cap) {
  const int d = model.dimension;
  const KernelKind kind = spec.kernel;
  CellSamples cs;

  const bool transition = is_transition_kernel(kind);
  const long thin = transition ? 1 : static_cast<long>(std::ceil(1.0 / gamma));
  const long retained = spec.samples_per_cell;
  cs.retained = retained;
  cs.burn_in = transition ? 200 : default_burn_in(model, gamma);
  const long total_steps = cs.burn_in + retained * thin;

  const bool cv = model.is_unit_gaussian() &&
                  (kind == KernelKind::Ula || kind == KernelKind::TamedUla ||
                   kind == KernelKind::Uhmc);
  cs.cv_used = cv;

  const std::uint64_t base = spec.seed;
  RngStream init(base, cell_stream(base, d, gamma, purpose::init));
  RngStream noise(base, cell_stream(base, d, gamma, purpose::chain));

  Vec x(d), y(d), g(d), b(d);
  if (model.stationary_law) {
    const double sigma = std::sqrt(model.stationary_law->variance_scale);
    x = sigma * init.gaussian_vector(d);
  } else {
    x = Vec::Zero(d);
  }
  y = x;

  const double root = std::sqrt(2.0 * gamma);
  const double decay = std::exp(-gamma);
  const double ou_noise = std::sqrt(1.0 - std::exp(-2.0 * gamma));
  int leapfrogs = 0;
  if (kind == KernelKind::Uhmc) {
    const double ratio = spec.duration_T / gamma;
    if (std::abs(ratio - std::round(ratio)) > 1e-9)
      throw std::invalid_argument(
          "duration T must be an integer multiple of the step size");
    leapfrogs = static_cast<int>(std::llround(ratio));
  }
  const double cosT = std::cos(spec.duration_T);
  const double sinT = std::sin(spec.duration_T);

  std::vector<double> series;
  series.reserve(retained);
  const long pool_stride =
      std::max<long>(1, retained * d / std::max<long>(pooled_cap, 1));
  const long state_stride = std::max<long>(1, retained / std::max<long>(state_cap, 1));
  long coord_counter = 0;

  long retained_so_far = 0;
  for (long step = 0; step < total_steps; ++step) {
    switch (kind) {
      case KernelKind::Ula:
      case KernelKind::TamedUla: {
        noise.fill_gaussian(g);
        drift_into(model, x, b);
        if (kind == KernelKind::TamedUla) b /= 1.0 + gamma * b.norm();
        x += gamma * b + root * g;
        if (cv) y = decay * y + ou_noise * g;
        break;
      }
      case KernelKind::Uhmc: {
        noise.fill_gaussian(g);
        Vec p = g;
        for (int i = 0; i < leapfrogs; ++i) verlet_step(model, gamma, x, p);
        if (cv) {
          Vec ynew = cosT * y + sinT * g;
          y = std::move(ynew);
        }
        break;
      }
      case KernelKind::ExactOu: {
        noise.fill_gaussian(g);
        x = exact_ou_step(1.0, gamma, x, g);
        break;
      }
      case KernelKind::ExactHmc: {
        noise.fill_gaussian(g);
        Vec p = g;
        exact_gaussian_hmc_flow(spec.duration_T, x, p);
        break;
      }
    }
    if (!(x.norm() <= kDivergenceThreshold)) throw divergence_error(step);

    const long past_burn = step - cs.burn_in + 1;
    if (past_burn <= 0 || past_burn % thin != 0) continue;

    double acc = 0.0;
    for (int i = 0; i < d; ++i) {
      const double term = cv ? x[i] * x[i] - y[i] * y[i] : x[i] * x[i];
      acc += term;
      if (coord_counter++ % pool_stride == 0 &&
          static_cast<long>(cs.pooled.size()) < pooled_cap)
        cs.pooled.push_back(x[i]);
    }
    series.push_back(acc / d);
    if (retained_so_far % state_stride == 0 &&
        static_cast<long>(cs.states.size()) < state_cap)
      cs.states.push_back(x);
    ++retained_so_far;
  }

  Estimate m = batch_means(series);
  cs.sigma2 = cv ? Estimate{1.0 + m.value, m.std_err} : m;
  return cs;
}

// |sigma_hat - sigma_target| mapped through the metric's closed-form factor.
void closed_form_bias(const MetricSpec& metric, int d, double sigma_hat,
                      double sigma_se, double sigma_target, double& bias,
                      double& se) {
  double factor = 0.0;
  if (metric.base == BaseMetric::Euclidean)
    factor = gaussian_norm_moment(metric.order_p, d);
  else if (metric.base == BaseMetric::Lq)
    factor = std::pow(static_cast<double>(d), 1.0 / metric.q) *
             gaussian_norm_moment(metric.order_p, 1);
  else
    factor = gaussian_norm_moment(metric.order_p, 1);
  bias = std::abs(sigma_hat - sigma_target) * factor;
  se = sigma_se * factor;
}

double theory_column(const SweepSpec& spec, const TargetModel& model,
                     const MetricSpec& metric, double gamma,
                     const std::vector<Vec>& states, RngStream& stream) {
  const ConvergenceInputs& in = spec.bound_inputs;
  if (!(in.A > 0) || !(in.c > 0) || states.size() < 1000) return 0.0;
  MQuantityOptions mo;
  mo.gamma = gamma;
  mo.gamma_bar = spec.gamma_cap;
  mo.tamed = spec.kernel == KernelKind::TamedUla;
  const KeyQuantities kq = estimate_m_quantities(model, states, mo, stream);
  const double L = model.constants.lipschitz_L;
  const int d = model.dimension;
  if (is_transition_kernel(spec.kernel)) {
    const HmcAccuracyConstants cs = hmc_accuracy_constants(
        L, gamma, kq.M1.value, kq.M2.value, kq.M4.value, kq.M5.value);
    return hmc_bias_bound(metric, d, std::min(in.c, 1.0), L, spec.duration_T,
                          cs, gamma);
  }
  ConvergenceInputs local = in;
  local.gamma = gamma;
  const EmAccuracyConstants cs = em_accuracy_constants(
      L, gamma, spec.gamma_cap, kq.M1.value, kq.M2.value, kq.M3.value);
  return ula_bias_bound(metric, d, local, cs, ProfileVariant::Geometric);
}

std::vector<ExperimentRecord> run_cell_group(const SweepSpec& spec, int d,
                                             double gamma) {
  const auto t0 = std::chrono::steady_clock::now();
  TargetModel model = spec.model.build(d);
  BiasRoute route;
  if (has_closed_form(spec.model))
    route = BiasRoute::ClosedForm;
  else if (is_product_family(spec.model))
    route = BiasRoute::ProductAggregation;
  else
    route = BiasRoute::SlicedProxy;
  for (const MetricSpec& m : spec.metrics) validate_metric_for_route(m, route);

  std::vector<ExperimentRecord> records;
  auto base_record = [&](const MetricSpec& metric) {
    ExperimentRecord r;
    r.model = model.name;
    r.d = d;
    r.gamma = gamma;
    r.kernel = spec.kernel;
    r.metric = metric;
    r.route = route;
    r.seed = spec.seed;
    r.experiment_id = model.name + "-" +
                      std::string(kernel_kind_name(spec.kernel)) + "-d" +
                      std::to_string(d) + "-g" + format_g(gamma) + "-p" +
                      format_g(metric.order_p) + "-" + metric_label(metric);
    return r;
  };

  RngStream aux(spec.seed, cell_stream(spec.seed, d, gamma, purpose::quantity));

  try {
    if (route == BiasRoute::SlicedProxy) {
      const long cap = 4000;
      CellSamples main_cs = run_cell_chain(model, spec, gamma, 1, cap);
      SweepSpec ref_spec = spec;
      ref_spec.seed = hash_absorb(spec.seed, purpose::reference);
      CellSamples ref_cs =
          run_cell_chain(model, ref_spec, gamma / 16.0, 1, cap);
      const size_t n = std::min(main_cs.states.size(), ref_cs.states.size());
      main_cs.states.resize(n);
      ref_cs.states.resize(n);
      for (const MetricSpec& metric : spec.metrics) {
        ExperimentRecord r = base_record(metric);
        RngStream dirs(spec.seed,
                       cell_stream(spec.seed, d, gamma, purpose::directions));
        const DistanceEstimate est = sliced_w(
            main_cs.states, ref_cs.states, metric.order_p, 64, dirs);
        r.bias = est.value;
        r.std_err = est.std_err;
        r.n_samples = static_cast<long>(n);
        r.burn_in = main_cs.burn_in;
        r.theory_bound =
            theory_column(spec, model, metric, gamma, main_cs.states, aux);
        records.push_back(std::move(r));
      }
    } else if (route == BiasRoute::ProductAggregation) {
      CellSamples cs = run_cell_chain(model, spec, gamma, 200000, 2000);
      ScalarTargetSampler marginal(
          spec.model.family == "product-double-well" ? double_well_potential()
                                                     : gaussian_potential(),
          model.box_radius);
      RngStream ref(spec.seed,
                    cell_stream(spec.seed, d, gamma, purpose::reference));
      std::vector<double> exact(cs.pooled.size());
      for (double& v : exact) v = marginal.draw(ref);
      for (const MetricSpec& metric : spec.metrics) {
        ExperimentRecord r = base_record(metric);
        const DistanceEstimate w1 =
            w1d_empirical(cs.pooled, exact, metric.order_p);
        double scale = 0.0;
        if (metric.base == BaseMetric::Euclidean)
          scale = std::sqrt(static_cast<double>(d));
        else if (metric.base == BaseMetric::Lq)
          scale = std::pow(static_cast<double>(d), 1.0 / metric.q);
        else
          scale = 1.0;
        r.bias = scale * w1.value;
        r.std_err = scale * w1.std_err;
        r.n_samples = cs.retained;
        r.burn_in = cs.burn_in;
        r.theory_bound =
            theory_column(spec, model, metric, gamma, cs.states, aux);
        records.push_back(std::move(r));
      }
    } else {
      CellSamples cs = run_cell_chain(model, spec, gamma, 1, 2000);
      const double sigma_target =
          std::sqrt(model.stationary_law->variance_scale);
      const double sigma_hat = std::sqrt(cs.sigma2.value);
      const double sigma_se = cs.sigma2.std_err / (2.0 * sigma_hat);
      for (const MetricSpec& metric : spec.metrics) {
        ExperimentRecord r = base_record(metric);
        closed_form_bias(metric, d, sigma_hat, sigma_se, sigma_target, r.bias,
                         r.std_err);
        r.n_samples = cs.retained;
        r.burn_in = cs.burn_in;
        r.theory_bound =
            theory_column(spec, model, metric, gamma, cs.states, aux);
        records.push_back(std::move(r));
      }
    }
  } catch (const divergence_error& e) {
    records.clear();
    for (const MetricSpec& metric : spec.metrics) {
      ExperimentRecord r = base_record(metric);
      r.status = "diverged at step " + std::to_string(e.step_index);
      records.push_back(std::move(r));
    }
  }

  const auto t1 = std::chrono::steady_clock::now();
  const double secs = std::chrono::duration<double>(t1 - t0).count();
  for (auto& r : records) r.wall_time_s = secs;
  return records;
}

}  // namespace

void SweepSpec::validate() const {
  if (dimensions.empty()) throw std::invalid_argument("dimension list empty");
  if (gammas.empty()) throw std::invalid_argument("gamma list empty");
  if (metrics.empty()) throw std::invalid_argument("metric list empty");
  for (int d : dimensions)
    if (d < 1) throw std::invalid_argument("dimensions must be >= 1");
  for (double g : gammas) {
    if (!(g > 0)) throw std::invalid_argument("step sizes must be > 0");
    if (g > gamma_cap)
      throw std::invalid_argument("step size exceeds the configured cap");
  }
  if (samples_per_cell < 10)
    throw std::invalid_argument("need at least 10 samples per cell");
  for (int d : dimensions)
    for (double g : gammas) {
      const double thin = is_transition_kernel(kernel) ? 1.0 : std::ceil(1.0 / g);
      const double steps = static_cast<double>(samples_per_cell) * thin;
      if (steps * d > static_cast<double>(max_cell_budget))
        throw std::invalid_argument(
            "cell exceeds the step*dimension budget; reduce samples or raise "
            "max_cell_budget");
    }
  if (kernel == KernelKind::Uhmc) {
    for (double g : gammas) {
      const double ratio = duration_T / g;
      if (std::abs(ratio - std::round(ratio)) > 1e-9)
        throw std::invalid_argument(
            "duration T must be an integer multiple of every step size");
    }
  }
  BiasRoute route;
  if (has_closed_form(model))
    route = BiasRoute::ClosedForm;
  else if (is_product_family(model))
    route = BiasRoute::ProductAggregation;
  else
    route = BiasRoute::SlicedProxy;
  for (const MetricSpec& m : metrics) validate_metric_for_route(m, route);
}

std::vector<ExperimentRecord> run_sweep(const SweepSpec& spec) {
  spec.validate();
  struct Cell {
    int d;
    double gamma;
  };
  std::vector<Cell> cells;
  for (int d : spec.dimensions)
    for (double g : spec.gammas) cells.push_back({d, g});
  std::vector<std::vector<ExperimentRecord>> groups(cells.size());
  parallel_for(static_cast<long>(cells.size()), spec.jobs, [&](long i) {
    // workers must not throw; anything unexpected becomes an error row
    try {
      groups[i] = run_cell_group(spec, cells[i].d, cells[i].gamma);
    } catch (const std::exception& e) {
      for (const MetricSpec& m : spec.metrics) {
        ExperimentRecord r;
        r.model = spec.model.family;
        r.d = cells[i].d;
        r.gamma = cells[i].gamma;
        r.kernel = spec.kernel;
        r.metric = m;
        r.seed = spec.seed;
        r.status = std::string("error: ") + e.what();
        groups[i].push_back(std::move(r));
      }
    }
  });
  std::vector<ExperimentRecord> out;
  for (auto& group : groups)
    out.insert(out.end(), group.begin(), group.end());
  return out;
}

ExperimentRecord run_cell(const SweepSpec& spec, int d, double gamma,
                          const MetricSpec& metric) {
  SweepSpec single = spec;
  single.metrics = {metric};
  return run_cell_group(single, d, gamma).front();
}

StationaryMomentEstimate estimate_stationary_moment(const SweepSpec& spec,
                                                    int d, double gamma) {
  TargetModel model = spec.model.build(d);
  const CellSamples cs = run_cell_chain(model, spec, gamma, 1, 1);
  StationaryMomentEstimate out;
  out.sigma2 = cs.sigma2;
  out.retained = cs.retained;
  out.burn_in = cs.burn_in;
  out.coupled_reference = cs.cv_used;
  return out;
}

SlopeFit fit_slope(const std::vector<ExperimentRecord>& records,
                   const std::string& axis) {
  if (axis != "gamma" && axis != "dimension")
    throw std::invalid_argument("axis must be gamma or dimension");
  std::vector<std::pair<double, double>> pts;
  for (const auto& r : records) {
    if (r.status != "ok" || !(r.bias > 0)) continue;
    const double x = axis == "gamma" ? r.gamma : static_cast<double>(r.d);
    pts.emplace_back(std::log(x), std::log(r.bias));
  }
  if (pts.size() < 3)
    throw std::invalid_argument("slope fit needs at least 3 usable points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (auto [x, y] : pts) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
  }
  const double n = static_cast<double>(pts.size());
  const double denom = n * sxx - sx * sx;
  if (denom <= 1e-9 * std::max(1.0, n * sxx))
    throw std::invalid_argument("slope fit needs variation along the axis");
  SlopeFit fit;
  fit.axis = axis;
  fit.slope = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;
  fit.points = static_cast<int>(pts.size());
  double ss_res = 0.0;
  const double mean_y = sy / n;
  double ss_tot = 0.0;
  for (auto [x, y] : pts) {
    const double pred = fit.intercept + fit.slope * x;
    ss_res += (y - pred) * (y - pred);
    ss_tot += (y - mean_y) * (y - mean_y);
  }
  fit.r_squared = ss_tot > 0 ? std::clamp(1.0 - ss_res / ss_tot, 0.0, 1.0) : 1.0;
  fit.low_confidence = fit.r_squared < 0.98;
  return fit;
}

std::vector<SlopeFit> dimension_scan(const SweepSpec& spec) {
  spec.validate();
  if (spec.model.family.rfind("mean-field", 0) == 0)
    throw std::invalid_argument(
        "dimension scan needs closed-form marginals (gaussian or product "
        "models)");
  const double gamma = spec.gammas.front();
  std::vector<SlopeFit> fits;
  std::vector<std::vector<ExperimentRecord>> per_metric(spec.metrics.size());
  for (int d : spec.dimensions) {
    auto group = run_cell_group(spec, d, gamma);
    for (size_t i = 0; i < group.size(); ++i)
      per_metric[i].push_back(group[i]);
  }
  for (auto& records : per_metric)
    fits.push_back(fit_slope(records, "dimension"));
  return fits;
}

void write_records_csv(const std::vector<ExperimentRecord>& records,
                       const std::string& config_echo, std::ostream& out) {
  out << "# config: " << config_echo << "\n";
  out << "experiment_id,model,d,gamma,kernel,metric_p,metric_base,bias,"
         "stderr,theory_bound,route,n_samples,burn_in,seed,wall_time_s,"
         "status\n";
  for (const auto& r : records) {
    out << r.experiment_id << ',' << r.model << ',' << r.d << ','
        << format_full(r.gamma) << ',' << kernel_kind_name(r.kernel) << ','
        << format_full(r.metric.order_p) << ',' << metric_label(r.metric)
        << ',' << format_full(r.bias) << ',' << format_full(r.std_err) << ','
        << format_full(r.theory_bound) << ',' << bias_route_name(r.route)
        << ',' << r.n_samples << ',' << r.burn_in << ',' << r.seed << ','
        << format_full(r.wall_time_s) << ',' << r.status << "\n";
  }
}

std::string slope_fits_json(const std::vector<SlopeFit>& fits) {
  std::ostringstream os;
  os << "[";
  for (size_t i = 0; i < fits.size(); ++i) {
    const auto& f = fits[i];
    if (i) os << ",";
    os << "{\"axis\":\"" << f.axis << "\",\"slope\":" << format_full(f.slope)
       << ",\"intercept\":" << format_full(f.intercept)
       << ",\"r_squared\":" << format_full(f.r_squared)
       << ",\"points\":" << f.points << ",\"low_confidence\":"
       << (f.low_confidence ? "true" : "false") << "}";
  }
  os << "]";
  return os.str();
}

}  // namespace mcmclab
