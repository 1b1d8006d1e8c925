#include "mcmclab/cli.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>

#include <json.hpp>

#include "mcmclab/bounds.hpp"
#include "mcmclab/coupling.hpp"

namespace mcmclab {

using nlohmann::json;

namespace {

std::string format_full(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void check_keys(const json& obj, const std::string& where,
                std::initializer_list<const char*> allowed) {
  if (!obj.is_object())
    throw std::invalid_argument(where + " must be a JSON object");
  for (const auto& item : obj.items()) {
    bool ok = false;
    for (const char* key : allowed)
      if (item.key() == key) {
        ok = true;
        break;
      }
    if (!ok)
      throw std::invalid_argument("unknown config key: " + where + "." +
                                  item.key());
  }
}

KernelKind parse_kernel(const std::string& s) {
  if (s == "ula") return KernelKind::Ula;
  if (s == "tamed-ula") return KernelKind::TamedUla;
  if (s == "uhmc") return KernelKind::Uhmc;
  if (s == "exact-ou") return KernelKind::ExactOu;
  if (s == "exact-hmc") return KernelKind::ExactHmc;
  throw std::invalid_argument("unknown kernel kind: " + s);
}

MetricSpec parse_metric(const json& m) {
  check_keys(m, "metric", {"p", "base", "q"});
  const double p = m.value("p", 2.0);
  const double q = m.value("q", 2.0);
  const std::string base = m.value("base", "euclidean");
  BaseMetric b;
  if (base == "euclidean")
    b = BaseMetric::Euclidean;
  else if (base == "lq")
    b = BaseMetric::Lq;
  else if (base == "normalized_lq")
    b = BaseMetric::NormalizedLq;
  else
    throw std::invalid_argument("unknown metric base: " + base);
  return MetricSpec::make(p, b, q);
}

int report_error(const std::exception& e, std::ostream& err, int code) {
  err << "error: " << e.what() << "\n";
  return code;
}

// Draws roughly stationary states for the constant estimators: closed form
// when the model has one, otherwise a thinned equilibrated chain.
std::vector<Vec> stationary_states(const TargetModel& model, double gamma,
                                   bool tamed, long n, RngStream& stream) {
  std::vector<Vec> out;
  out.reserve(n);
  if (model.stationary_law) {
    const double sigma = std::sqrt(model.stationary_law->variance_scale);
    for (long i = 0; i < n; ++i)
      out.push_back(sigma * stream.gaussian_vector(model.dimension));
    return out;
  }
  KernelSpec kernel = KernelSpec::make(
      tamed ? KernelKind::TamedUla : KernelKind::Ula, model, gamma, 0.0,
      std::max(1.0, gamma));
  RunOptions opts;
  opts.burn_in = default_burn_in(model, gamma);
  opts.thin = static_cast<long>(std::ceil(1.0 / gamma));
  opts.n_steps = n * opts.thin;
  Trajectory traj = run_chain(kernel, Vec::Zero(model.dimension), opts, stream);
  for (size_t i = 1; i < traj.states.size(); ++i)
    out.push_back(std::move(traj.states[i]));
  out.resize(n, Vec::Zero(model.dimension));
  return out;
}

// Discrete-kernel stationary samples for the pi_gamma quantities.
std::vector<Vec> chain_states(const TargetModel& model, KernelKind kind,
                              double gamma, double T, long n,
                              RngStream& stream) {
  KernelSpec kernel =
      KernelSpec::make(kind, model, gamma, T, std::max(1.0, gamma));
  RunOptions opts;
  opts.burn_in = kind == KernelKind::Uhmc ? 200 : default_burn_in(model, gamma);
  opts.thin = kind == KernelKind::Uhmc
                  ? 1
                  : static_cast<long>(std::ceil(1.0 / gamma));
  opts.n_steps = n * opts.thin;
  Vec x0 = Vec::Zero(model.dimension);
  if (model.stationary_law)
    x0 = std::sqrt(model.stationary_law->variance_scale) *
         stream.gaussian_vector(model.dimension);
  Trajectory traj = run_chain(kernel, x0, opts, stream);
  std::vector<Vec> out;
  out.reserve(n);
  for (size_t i = 1; i < traj.states.size(); ++i)
    out.push_back(std::move(traj.states[i]));
  return out;
}

json estimate_json(const Estimate& e) {
  return json{{"value", e.value}, {"stderr", e.std_err}};
}

// routes command output to the configured file when one is set
std::ostream* open_sink(const LoadedConfig& lc, std::ostream& out,
                        std::ofstream& file) {
  if (lc.output_path.empty()) return &out;
  file.open(lc.output_path, std::ios::binary);
  if (!file)
    throw std::invalid_argument("cannot open output: " + lc.output_path);
  return &file;
}

}  // namespace

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag_seed,
                           std::uint64_t config_seed) {
  if (flag_seed) return *flag_seed;
  if (const char* env = std::getenv("MCMCLAB_SEED")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    // strtoull wraps a leading minus around instead of failing
    if (end == env || *end != '\0' || env[0] == '-')
      throw std::invalid_argument(
          "MCMCLAB_SEED must be an unsigned integer, got: " +
          std::string(env));
    return static_cast<std::uint64_t>(v);
  }
  return config_seed;
}

LoadedConfig load_config(const std::string& json_text,
                         const CliOverrides& overrides) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config is not valid JSON: ") +
                                e.what());
  }
  if (!doc.is_object())
    throw std::invalid_argument("config root must be a JSON object");
  check_keys(doc, "config",
             {"seed", "output", "model", "kernel", "metric", "sweep",
              "coupling", "bounds_inputs"});

  LoadedConfig lc;
  SweepSpec& sw = lc.sweep;
  try {
    if (doc.contains("model")) {
      const json& m = doc["model"];
      check_keys(m, "model",
                 {"family", "variance", "delta", "particles", "components"});
      sw.model.family = m.value("family", "gaussian");
      sw.model.variance = m.value("variance", 1.0);
      sw.model.delta = m.value("delta", 0.0);
      sw.model.particles = m.value("particles", 0);
      sw.model.components = m.value("components", 1);
    }
    if (doc.contains("kernel")) {
      const json& k = doc["kernel"];
      check_keys(k, "kernel", {"kind", "duration_T", "gamma_cap"});
      sw.kernel = parse_kernel(k.value("kind", "ula"));
      sw.duration_T = k.value("duration_T", 1.0);
      sw.gamma_cap = k.value("gamma_cap", 1.0);
    }
    if (doc.contains("metric")) {
      const json& mj = doc["metric"];
      sw.metrics.clear();
      if (mj.is_array())
        for (const auto& m : mj) sw.metrics.push_back(parse_metric(m));
      else
        sw.metrics.push_back(parse_metric(mj));
    } else {
      sw.metrics = {MetricSpec::wasserstein2_euclidean()};
    }
    if (doc.contains("sweep")) {
      const json& s = doc["sweep"];
      check_keys(s, "sweep",
                 {"dimensions", "gammas", "samples_per_cell", "replicas",
                  "max_cell_budget"});
      sw.dimensions = s.value("dimensions", std::vector<int>{1});
      sw.gammas = s.value("gammas", std::vector<double>{0.1});
      sw.samples_per_cell = s.value("samples_per_cell", 100000L);
      sw.replicas = s.value("replicas", 1L);
      sw.max_cell_budget = s.value("max_cell_budget", 4000000000L);
    } else {
      sw.dimensions = {1};
      sw.gammas = {0.1};
    }
    if (doc.contains("coupling")) {
      const json& c = doc["coupling"];
      check_keys(c, "coupling",
                 {"horizon_steps", "replicas", "refinement", "reference",
                  "tamed", "initial_law"});
      lc.horizon_steps = c.value("horizon_steps", 100L);
      lc.replicas = c.value("replicas", 10000L);
      lc.refinement = c.value("refinement", 64);
      lc.reference = c.value("reference", "exact-ou");
      if (lc.reference != "exact-ou" && lc.reference != "fine-grid")
        throw std::invalid_argument("unknown coupling reference: " +
                                    lc.reference);
      if (c.contains("tamed")) lc.coupling_tamed = c["tamed"].get<bool>();
      if (c.contains("initial_law")) {
        const std::string law = c["initial_law"].get<std::string>();
        if (law != "closed-form" && law != "chain-equilibrated")
          throw std::invalid_argument("unknown coupling initial_law: " + law);
        lc.coupling_initial_law = law;
      }
    }
    if (doc.contains("bounds_inputs")) {
      const json& b = doc["bounds_inputs"];
      check_keys(b, "bounds_inputs",
                 {"A", "c", "lambda", "B", "psi_rate", "kappa", "A_tv", "B_tv",
                  "lambda_tv", "gamma_bar"});
      sw.bound_inputs.A = b.value("A", 0.0);
      sw.bound_inputs.c = b.value("c", 0.0);
      sw.bound_inputs.lambda = b.value("lambda", 0.0);
      sw.bound_inputs.B = b.value("B", 0.0);
      lc.psi_rate = b.value("psi_rate", 0.0);
      sw.bound_inputs.kappa = b.value("kappa", 0.0);
      sw.bound_inputs.A_tv = b.value("A_tv", 0.0);
      sw.bound_inputs.B_tv = b.value("B_tv", 0.0);
      sw.bound_inputs.lambda_tv = b.value("lambda_tv", 0.0);
      lc.gamma_bar = b.value("gamma_bar", 0.1);
      lc.has_contraction_inputs =
          sw.bound_inputs.A > 0 && sw.bound_inputs.c > 0;
      if (lc.psi_rate > 0) {
        const double rate = lc.psi_rate;
        sw.bound_inputs.psi = [rate](double t) { return std::exp(-rate * t); };
      }
    }
    sw.seed = resolve_seed(overrides.seed, doc.value("seed", 0ULL));
    sw.jobs = overrides.jobs > 0 ? overrides.jobs : 1;
    lc.output_path = overrides.out_path ? *overrides.out_path
                                        : doc.value("output", std::string());
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config value has wrong type: ") +
                                e.what());
  }

  // compact single-line echo for output headers
  json echo = doc;
  echo["seed"] = sw.seed;
  lc.echo = echo.dump();
  return lc;
}

int cmd_gaussian_check(double gamma, int d, const std::string& kernel,
                       double p, std::uint64_t seed, std::ostream& out) {
  try {
    if (kernel != "ula" && kernel != "uhmc")
      throw std::invalid_argument(
          "gaussian-check supports the ula and uhmc kernels");
    if (!(gamma > 0)) throw std::invalid_argument("step size must be > 0");
    if (d < 1) throw std::invalid_argument("dimension must be >= 1");

    SweepSpec spec;
    spec.model.family = "gaussian";
    spec.kernel = kernel == "ula" ? KernelKind::Ula : KernelKind::Uhmc;
    spec.duration_T = 1.0;
    spec.seed = seed;
    spec.samples_per_cell = 100000;
    spec.metrics = {MetricSpec::make(p, BaseMetric::Euclidean)};
    if (spec.kernel == KernelKind::Uhmc) {
      const double ratio = spec.duration_T / gamma;
      if (std::abs(ratio - std::round(ratio)) > 1e-9)
        throw std::invalid_argument(
            "step size must divide the transition duration T = 1");
    }

    const StationaryMomentEstimate mom =
        estimate_stationary_moment(spec, d, gamma);
    const double sigma_hat = std::sqrt(mom.sigma2.value);
    const double sigma_se = mom.sigma2.std_err / (2.0 * sigma_hat);
    const double factor = gaussian_norm_moment(p, d);
    const double measured_bias = std::abs(sigma_hat - 1.0) * factor;
    const double bias_se = sigma_se * factor;

    const double sigma_gamma =
        spec.kernel == KernelKind::Uhmc
            ? 1.0 / std::sqrt(1.0 - gamma * gamma / 4.0)
            : 1.0 / std::sqrt(1.0 - gamma / 2.0);
    const double closed_bias = (sigma_gamma - 1.0) * factor;
    const double z = bias_se > 0 ? (measured_bias - closed_bias) / bias_se
                                 : 0.0;

    out << "kernel=" << kernel << " gamma=" << format_full(gamma)
        << " d=" << d << " p=" << format_full(p) << "\n";
    out << "measured_variance=" << format_full(mom.sigma2.value)
        << " stderr=" << format_full(mom.sigma2.std_err) << "\n";
    out << "measured_bias=" << format_full(measured_bias)
        << " stderr=" << format_full(bias_se) << "\n";
    out << "closed_form_bias=" << format_full(closed_bias) << "\n";
    out << "z_score=" << format_full(z) << "\n";
    out << (std::abs(z) <= 3.0 ? "PASS" : "FAIL") << "\n";
    return std::abs(z) <= 3.0 ? kExitPass : kExitCheckFailed;
  } catch (const divergence_error& e) {
    out << "error: " << e.what() << "\n";
    return kExitDiverged;
  } catch (const std::invalid_argument& e) {
    out << "error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    out << "error: " << e.what() << "\n";
    return kExitDiverged;
  }
}

int cmd_bias_scan(const std::string& config_json, const CliOverrides& ov,
                  std::ostream& out, std::ostream& err) {
  LoadedConfig lc;
  try {
    lc = load_config(config_json, ov);
    lc.sweep.validate();
  } catch (const std::invalid_argument& e) {
    return report_error(e, err, kExitConfigError);
  }
  try {
    const auto records = run_sweep(lc.sweep);
    const auto same_metric = [](const MetricSpec& a, const MetricSpec& b) {
      return a.order_p == b.order_p && a.base == b.base && a.q == b.q;
    };
    std::vector<SlopeFit> fits;
    if (lc.sweep.gammas.size() >= 3) {
      for (int d : lc.sweep.dimensions)
        for (const MetricSpec& m : lc.sweep.metrics) {
          std::vector<ExperimentRecord> axis_records;
          for (const auto& r : records)
            if (r.d == d && same_metric(r.metric, m))
              axis_records.push_back(r);
          if (axis_records.size() >= 3) {
            try {
              fits.push_back(fit_slope(axis_records, "gamma"));
            } catch (const std::invalid_argument&) {
              // diverged rows can leave too few points; skip the fit
            }
          }
        }
    }
    if (lc.sweep.dimensions.size() >= 3) {
      for (double g : lc.sweep.gammas)
        for (const MetricSpec& m : lc.sweep.metrics) {
          std::vector<ExperimentRecord> axis_records;
          for (const auto& r : records)
            if (r.gamma == g && same_metric(r.metric, m))
              axis_records.push_back(r);
          if (axis_records.size() >= 3) {
            try {
              fits.push_back(fit_slope(axis_records, "dimension"));
            } catch (const std::invalid_argument&) {
            }
          }
        }
    }

    const std::string sidecar = slope_fits_json(fits);
    if (!lc.output_path.empty()) {
      std::ofstream f(lc.output_path, std::ios::binary);
      if (!f)
        throw std::invalid_argument("cannot open output: " + lc.output_path);
      write_records_csv(records, lc.echo, f);
      std::ofstream sf(lc.output_path + ".slopes.json", std::ios::binary);
      sf << sidecar << "\n";
    } else {
      write_records_csv(records, lc.echo, out);
      out << sidecar << "\n";
    }
    bool any_ok = false;
    for (const auto& r : records) any_ok = any_ok || r.status == "ok";
    return any_ok ? kExitPass : kExitDiverged;
  } catch (const std::invalid_argument& e) {
    return report_error(e, err, kExitConfigError);
  } catch (const std::exception& e) {
    return report_error(e, err, kExitDiverged);
  }
}

int cmd_coupling(const std::string& config_json, const CliOverrides& ov,
                 std::ostream& out, std::ostream& err) {
  LoadedConfig lc;
  try {
    lc = load_config(config_json, ov);
  } catch (const std::invalid_argument& e) {
    return report_error(e, err, kExitConfigError);
  }
  try {
    const SweepSpec& sw = lc.sweep;
    const int d = sw.dimensions.front();
    const double gamma = sw.gammas.front();
    TargetModel model = sw.model.build(d);

    CouplingOptions opts;
    opts.horizon_steps = lc.horizon_steps;
    opts.replicas = lc.replicas;
    opts.refinement = lc.refinement;
    opts.reference = lc.reference == "exact-ou" ? ReferenceKind::ExactOu
                                                : ReferenceKind::FineGrid;
    opts.initial_law = model.stationary_law ? InitialLaw::ClosedFormPi
                                            : InitialLaw::ChainEquilibrated;
    if (lc.coupling_initial_law)
      opts.initial_law = *lc.coupling_initial_law == "closed-form"
                             ? InitialLaw::ClosedFormPi
                             : InitialLaw::ChainEquilibrated;
    opts.tamed = lc.coupling_tamed ? *lc.coupling_tamed
                                   : sw.kernel == KernelKind::TamedUla;

    RngStream stream(sw.seed, derive_stream_id(sw.seed, 0, purpose::coupling));
    const AccuracyCurve curve =
        coupled_em_accuracy(model, gamma, opts, stream);

    RngStream qstream(sw.seed, derive_stream_id(sw.seed, 0, purpose::quantity));
    std::vector<Vec> states =
        stationary_states(model, gamma, opts.tamed, 2000, qstream);
    MQuantityOptions mo;
    mo.gamma = gamma;
    mo.gamma_bar = sw.gamma_cap;
    mo.tamed = opts.tamed;
    const KeyQuantities kq = estimate_m_quantities(model, states, mo, qstream);
    const EmAccuracyConstants cs =
        em_accuracy_constants(model.constants.lipschitz_L, gamma, sw.gamma_cap,
                              kq.M1.value, kq.M2.value, kq.M3.value);

    std::ofstream f;
    std::ostream* sink = open_sink(lc, out, f);
    *sink << "# config: " << lc.echo << "\n";
    *sink << "t,rmse,stderr,theory_bound\n";
    for (size_t i = 0; i < curve.times.size(); ++i)
      *sink << format_full(curve.times[i]) << ',' << format_full(curve.rmse[i])
            << ',' << format_full(curve.std_err[i]) << ','
            << format_full(em_curve_bound(gamma, cs, curve.times[i])) << "\n";
    return kExitPass;
  } catch (const divergence_error& e) {
    return report_error(e, err, kExitDiverged);
  } catch (const std::invalid_argument& e) {
    return report_error(e, err, kExitConfigError);
  } catch (const std::exception& e) {
    return report_error(e, err, kExitDiverged);
  }
}

int cmd_bounds(const std::string& config_json, const CliOverrides& ov,
               std::ostream& out, std::ostream& err) {
  LoadedConfig lc;
  try {
    lc = load_config(config_json, ov);
    if (!lc.has_contraction_inputs && lc.psi_rate <= 0)
      throw std::invalid_argument(
          "bounds need the convergence inputs: supply A and c (or a profile "
          "rate) in bounds_inputs; they come from an external contraction "
          "analysis or from the contraction command");
  } catch (const std::invalid_argument& e) {
    return report_error(e, err, kExitConfigError);
  }
  try {
    const SweepSpec& sw = lc.sweep;
    const int d = sw.dimensions.front();
    const double gamma = sw.gammas.front();
    TargetModel model = sw.model.build(d);

    RngStream stream(sw.seed, derive_stream_id(sw.seed, 0, purpose::quantity));
    std::vector<Vec> pi_states = stationary_states(
        model, gamma, sw.kernel == KernelKind::TamedUla, 2000, stream);
    MQuantityOptions mo;
    mo.gamma = gamma;
    mo.gamma_bar = lc.gamma_bar;
    mo.tamed = sw.kernel == KernelKind::TamedUla;
    const KeyQuantities kq =
        estimate_m_quantities(model, pi_states, mo, stream);

    RngStream dstream(sw.seed, derive_stream_id(sw.seed, 1, purpose::quantity));
    std::vector<Vec> pg_states =
        chain_states(model, sw.kernel == KernelKind::Uhmc ? KernelKind::Uhmc
                                                          : KernelKind::Ula,
                     gamma, sw.duration_T, 2000, dstream);
    DiscreteQuantityOptions dq;
    dq.gamma = gamma;
    dq.gamma_bar = lc.gamma_bar;
    dq.tamed = mo.tamed;
    const KeyQuantities dkq =
        discrete_stationary_quantities(model, pg_states, dq, dstream);

    const double L = model.constants.lipschitz_L;
    const EmAccuracyConstants em = em_accuracy_constants(
        L, gamma, lc.gamma_bar, kq.M1.value, kq.M2.value, kq.M3.value);
    const HmcAccuracyConstants hm = hmc_accuracy_constants(
        L, gamma, kq.M1.value, kq.M2.value, kq.M4.value, kq.M5.value);

    ConvergenceInputs in = sw.bound_inputs;
    in.gamma = gamma;

    json report;
    report["model"] = model.name;
    report["d"] = d;
    report["gamma"] = gamma;
    report["gamma_bar"] = lc.gamma_bar;
    report["M1"] = estimate_json(kq.M1);
    report["M2"] = estimate_json(kq.M2);
    report["M3"] = estimate_json(kq.M3);
    report["M4"] = estimate_json(kq.M4);
    report["M5"] = estimate_json(kq.M5);
    report["Mtilde1"] = estimate_json(dkq.Mt1);
    report["Mtilde2"] = estimate_json(dkq.Mt2);
    report["Mtilde3"] = estimate_json(dkq.Mt3);
    report["Mtilde4"] = estimate_json(dkq.Mt4);
    report["Mtilde5"] = estimate_json(dkq.Mt5);
    report["Mtilde6"] = estimate_json(dkq.Mt6);
    report["lambda_L"] = em.lambda_L;
    report["M_L"] = em.M_L;
    report["lambda_H"] = hm.lambda_H;
    report["M_H"] = hm.M_H;
    report["Mtilde_L"] =
        discrete_em_accuracy_constant(gamma, dkq.Mt1.value, dkq.Mt2.value,
                                      dkq.Mt3.value, dkq.Mt4.value,
                                      dkq.Mt5.value);

    const MetricSpec metric = sw.metrics.front();
    if (lc.has_contraction_inputs) {
      report["wasserstein_bound_geometric"] =
          ula_bias_bound(metric, d, in, em, ProfileVariant::Geometric);
      report["hmc_bound"] = hmc_bias_bound(
          metric, d, std::min(in.c, 1.0), L, sw.duration_T, hm, gamma);
    }
    if (in.psi)
      report["wasserstein_bound_subgeometric"] =
          ula_bias_bound(metric, d, in, em, ProfileVariant::Subgeometric);
    if (in.kappa > 0) {
      const double ctv = tv_regularization_constant(in.kappa);
      const double mt7 =
          tv_perturbation_constant(ctv, in.A_tv, in.lambda_tv);
      report["C_tv"] = ctv;
      report["Mtilde7"] = mt7;
      if (gamma < 1)
        report["tv_bound"] = tv_bias_bound(L, gamma, d, dkq.Mt6.value, ctv,
                                           in.B_tv, mt7);
    }

    std::ofstream f;
    std::ostream* sink = open_sink(lc, out, f);
    *sink << report.dump(2) << "\n";
    return kExitPass;
  } catch (const divergence_error& e) {
    return report_error(e, err, kExitDiverged);
  } catch (const std::invalid_argument& e) {
    return report_error(e, err, kExitConfigError);
  } catch (const std::exception& e) {
    return report_error(e, err, kExitDiverged);
  }
}

int cmd_contraction(const std::string& config_json, const CliOverrides& ov,
                    std::ostream& out, std::ostream& err) {
  LoadedConfig lc;
  try {
    lc = load_config(config_json, ov);
  } catch (const std::invalid_argument& e) {
    return report_error(e, err, kExitConfigError);
  }
  try {
    const SweepSpec& sw = lc.sweep;
    const int d = sw.dimensions.front();
    const double gamma = sw.gammas.front();
    TargetModel model = sw.model.build(d);
    KernelSpec kernel = KernelSpec::make(sw.kernel, model, gamma,
                                         sw.duration_T, sw.gamma_cap);
    RngStream stream(sw.seed, derive_stream_id(sw.seed, 0, purpose::coupling));
    const ContractionEstimate est = estimate_contraction(
        kernel, sw.metrics.front(), lc.replicas, lc.horizon_steps, stream);
    json rep;
    rep["pairs"] = est.pairs;
    rep["fit_residual"] = est.fit_residual;
    rep["metric_p"] = est.metric.order_p;
    rep["metric_base"] = base_metric_name(est.metric.base);
    if (std::isinf(est.rate_per_unit_time)) {
      rep["rate_per_unit_time"] = nullptr;
      rep["degenerate"] = true;
    } else {
      rep["rate_per_unit_time"] = est.rate_per_unit_time;
      rep["degenerate"] = false;
    }
    std::ofstream f;
    *open_sink(lc, out, f) << rep.dump(2) << "\n";
    return kExitPass;
  } catch (const divergence_error& e) {
    return report_error(e, err, kExitDiverged);
  } catch (const std::invalid_argument& e) {
    return report_error(e, err, kExitConfigError);
  } catch (const std::exception& e) {
    return report_error(e, err, kExitDiverged);
  }
}

int cmd_quantities(const std::string& config_json, const CliOverrides& ov,
                   std::ostream& out, std::ostream& err) {
  LoadedConfig lc;
  try {
    lc = load_config(config_json, ov);
  } catch (const std::invalid_argument& e) {
    return report_error(e, err, kExitConfigError);
  }
  try {
    const SweepSpec& sw = lc.sweep;
    const int d = sw.dimensions.front();
    const double gamma = sw.gammas.front();
    TargetModel model = sw.model.build(d);
    const bool tamed = sw.kernel == KernelKind::TamedUla;

    RngStream stream(sw.seed, derive_stream_id(sw.seed, 0, purpose::quantity));
    std::vector<Vec> pi_states =
        stationary_states(model, gamma, tamed, 2000, stream);
    MQuantityOptions mo;
    mo.gamma = gamma;
    mo.gamma_bar = lc.gamma_bar;
    mo.tamed = tamed;
    const KeyQuantities kq =
        estimate_m_quantities(model, pi_states, mo, stream);

    RngStream dstream(sw.seed, derive_stream_id(sw.seed, 1, purpose::quantity));
    std::vector<Vec> pg_states = chain_states(
        model, tamed ? KernelKind::TamedUla : KernelKind::Ula, gamma,
        sw.duration_T, 2000, dstream);
    DiscreteQuantityOptions dq;
    dq.gamma = gamma;
    dq.gamma_bar = lc.gamma_bar;
    dq.tamed = tamed;
    const KeyQuantities dkq =
        discrete_stationary_quantities(model, pg_states, dq, dstream);

    json rep;
    rep["model"] = model.name;
    rep["d"] = d;
    rep["gamma"] = gamma;
    rep["M1"] = estimate_json(kq.M1);
    rep["M2"] = estimate_json(kq.M2);
    rep["M3"] = estimate_json(kq.M3);
    rep["M4"] = estimate_json(kq.M4);
    rep["M5"] = estimate_json(kq.M5);
    rep["Mtilde1"] = estimate_json(dkq.Mt1);
    rep["Mtilde2"] = estimate_json(dkq.Mt2);
    rep["Mtilde3"] = estimate_json(dkq.Mt3);
    rep["Mtilde4"] = estimate_json(dkq.Mt4);
    rep["Mtilde5"] = estimate_json(dkq.Mt5);
    rep["Mtilde6"] = estimate_json(dkq.Mt6);
    std::ofstream f;
    *open_sink(lc, out, f) << rep.dump(2) << "\n";
    return kExitPass;
  } catch (const divergence_error& e) {
    return report_error(e, err, kExitDiverged);
  } catch (const std::invalid_argument& e) {
    return report_error(e, err, kExitConfigError);
  } catch (const std::exception& e) {
    return report_error(e, err, kExitDiverged);
  }
}

}  // namespace mcmclab
