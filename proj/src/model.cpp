#include "mcmclab/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mcmclab {

void drift_into(const TargetModel& model, const Vec& x, Vec& out) {
  if (model.drift_inplace) {
    model.drift_inplace(x, out);
  } else {
    out = model.drift(x);
  }
}

double taming_remainder(const TargetModel& model, double gamma_bar,
                        const Vec& x) {
  if (gamma_bar < 0) throw std::invalid_argument("gamma_bar must be >= 0");
  const double r = model.drift(x).norm();
  return r * r / (1.0 + gamma_bar * r);
}

ScalarPotential gaussian_potential() {
  ScalarPotential p;
  p.name = "gaussian";
  p.value = [](double x) { return 0.5 * x * x; };
  p.d1 = [](double x) { return x; };
  p.d2 = [](double) { return 1.0; };
  p.d3 = [](double) { return 0.0; };
  p.sup_abs_d2 = [](double) { return 1.0; };
  p.inf_d2 = [](double) { return 1.0; };
  p.sup_abs_d3 = [](double) { return 0.0; };
  return p;
}

ScalarPotential double_well_potential() {
  ScalarPotential p;
  p.name = "double-well";
  p.value = [](double x) { return 0.25 * x * x * x * x - 0.5 * x * x; };
  p.d1 = [](double x) { return x * x * x - x; };
  p.d2 = [](double x) { return 3.0 * x * x - 1.0; };
  p.d3 = [](double x) { return 6.0 * x; };
  p.sup_abs_d2 = [](double R) { return std::max(3.0 * R * R - 1.0, 1.0); };
  p.inf_d2 = [](double) { return -1.0; };
  p.sup_abs_d3 = [](double R) { return 6.0 * R; };
  return p;
}

TargetModel make_gaussian_model(int d, double variance) {
  if (d < 1) throw std::invalid_argument("dimension must be >= 1");
  if (!(variance > 0)) throw std::invalid_argument("variance must be > 0");
  TargetModel m;
  m.dimension = d;
  m.name = "gaussian";
  const double iv = 1.0 / variance;
  m.drift = [iv](const Vec& x) -> Vec { return -iv * x; };
  m.drift_inplace = [iv](const Vec& x, Vec& out) { out = -iv * x; };
  m.jacobian_apply = [iv](const Vec&, const Vec& v) -> Vec { return -iv * v; };
  m.jacobian_frobenius_sq = [d, iv](const Vec&) {
    return d * iv * iv;
  };
  m.laplacian_of_drift = [d](const Vec&) -> Vec { return Vec::Zero(d); };
  m.generator_on_drift = [iv](const Vec& x) -> Vec { return iv * iv * x; };
  m.hessian_frobenius_sq = [](const Vec&) { return 0.0; };
  m.hessian_quadratic = [d](const Vec&, const Vec&) -> Vec {
    return Vec::Zero(d);
  };
  m.constants.lipschitz_L = iv;
  m.constants.one_sided_kappa = -iv;
  m.constants.laplacian_bound_K = 0.0;
  m.constants.hessian_bound_J = 0.0;
  m.stationary_law = ClosedFormLaw{ClosedFormLaw::Kind::IsotropicGaussian,
                                   variance};
  return m;
}

TargetModel make_product_model(int d, const ScalarPotential& pot,
                               double box_radius) {
  if (d < 1) throw std::invalid_argument("dimension must be >= 1");
  if (!pot.d1 || !pot.d2 || !pot.d3)
    throw std::invalid_argument("scalar potential must supply V', V'', V'''");
  TargetModel m;
  m.dimension = d;
  m.name = "product-" + pot.name;
  m.box_radius = box_radius;
  const auto d1 = pot.d1;
  const auto d2 = pot.d2;
  const auto d3 = pot.d3;
  m.drift = [d1](const Vec& x) -> Vec {
    return -x.unaryExpr([&](double t) { return d1(t); });
  };
  m.drift_inplace = [d1](const Vec& x, Vec& out) {
    out.resize(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) out[i] = -d1(x[i]);
  };
  m.jacobian_apply = [d2](const Vec& x, const Vec& v) -> Vec {
    Vec out(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) out[i] = -d2(x[i]) * v[i];
    return out;
  };
  m.jacobian_frobenius_sq = [d2](const Vec& x) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double t = d2(x[i]);
      s += t * t;
    }
    return s;
  };
  m.laplacian_of_drift = [d3](const Vec& x) -> Vec {
    Vec out(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) out[i] = -d3(x[i]);
    return out;
  };
  m.generator_on_drift = [d1, d2, d3](const Vec& x) -> Vec {
    Vec out(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i)
      out[i] = d1(x[i]) * d2(x[i]) - d3(x[i]);
    return out;
  };
  m.hessian_frobenius_sq = [d3](const Vec& x) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double t = d3(x[i]);
      s += t * t;
    }
    return s;
  };
  m.hessian_quadratic = [d3](const Vec& x, const Vec& p) -> Vec {
    Vec out(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i)
      out[i] = -d3(x[i]) * p[i] * p[i];
    return out;
  };
  const double R = box_radius;
  m.constants.lipschitz_L = pot.sup_abs_d2(R);
  m.constants.one_sided_kappa = -pot.inf_d2(R);
  const double s3 = pot.sup_abs_d3(R);
  m.constants.laplacian_bound_K = d * s3 * s3;
  m.constants.hessian_bound_J = d * s3 * s3;
  if (pot.name == "gaussian")
    m.stationary_law =
        ClosedFormLaw{ClosedFormLaw::Kind::IsotropicGaussian, 1.0};
  return m;
}

TargetModel make_mean_field_model(int n, int k,
                                  const ScalarPotential& conf,
                                  const ScalarPotential& inter, double delta,
                                  double box_radius) {
  if (n < 1 || k < 1) throw std::invalid_argument("n and k must be >= 1");
  if (!conf.d1 || !conf.d2 || !conf.d3 || !inter.d1 || !inter.d2 || !inter.d3)
    throw std::invalid_argument("potentials must supply V', V'', V'''");
  TargetModel m;
  const int d = n * k;
  m.dimension = d;
  m.name = "mean-field-" + conf.name + "-" + inter.name;
  m.box_radius = box_radius;
  const auto v1 = conf.d1, v2 = conf.d2, v3 = conf.d3;
  const auto w1 = inter.d1, w2 = inter.d2, w3 = inter.d3;
  const double dn = delta / n;

  // flat layout: component c of particle i sits at i*k + c
  m.drift = [n, k, v1, w1, dn](const Vec& x) -> Vec {
    Vec out(x.size());
    for (int i = 0; i < n; ++i)
      for (int c = 0; c < k; ++c) {
        const double xi = x[i * k + c];
        double acc = -v1(xi);
        for (int j = 0; j < n; ++j) {
          if (j == i) continue;
          acc += dn * w1(x[j * k + c] - xi);
        }
        out[i * k + c] = acc;
      }
    return out;
  };
  m.jacobian_apply = [n, k, v2, w2, dn](const Vec& x, const Vec& u) -> Vec {
    Vec out(x.size());
    for (int i = 0; i < n; ++i)
      for (int c = 0; c < k; ++c) {
        const double xi = x[i * k + c];
        double acc = -v2(xi) * u[i * k + c];
        for (int j = 0; j < n; ++j) {
          if (j == i) continue;
          const double wpp = dn * w2(x[j * k + c] - xi);
          acc += wpp * (u[j * k + c] - u[i * k + c]);
        }
        out[i * k + c] = acc;
      }
    return out;
  };
  m.jacobian_frobenius_sq = [n, k, v2, w2, dn](const Vec& x) {
    double s = 0.0;
    for (int i = 0; i < n; ++i)
      for (int c = 0; c < k; ++c) {
        const double xi = x[i * k + c];
        double diag = -v2(xi);
        for (int j = 0; j < n; ++j) {
          if (j == i) continue;
          const double wpp = dn * w2(x[j * k + c] - xi);
          diag -= wpp;
          s += wpp * wpp;  // off-diagonal entry (ic, jc)
        }
        s += diag * diag;
      }
    return s;
  };
  m.laplacian_of_drift = [n, k, v3, w3, dn](const Vec& x) -> Vec {
    Vec out(x.size());
    for (int i = 0; i < n; ++i)
      for (int c = 0; c < k; ++c) {
        const double xi = x[i * k + c];
        double acc = -v3(xi);
        for (int j = 0; j < n; ++j) {
          if (j == i) continue;
          acc += 2.0 * dn * w3(x[j * k + c] - xi);
        }
        out[i * k + c] = acc;
      }
    return out;
  };
  const auto drift_fn = m.drift;
  const auto jac_fn = m.jacobian_apply;
  const auto lap_fn = m.laplacian_of_drift;
  m.generator_on_drift = [drift_fn, jac_fn, lap_fn](const Vec& x) -> Vec {
    return jac_fn(x, drift_fn(x)) + lap_fn(x);
  };
  m.hessian_frobenius_sq = [n, k, v3, w3, dn](const Vec& x) {
    double s = 0.0;
    for (int i = 0; i < n; ++i)
      for (int c = 0; c < k; ++c) {
        const double xi = x[i * k + c];
        double tii = -v3(xi);
        double cross = 0.0;
        for (int j = 0; j < n; ++j) {
          if (j == i) continue;
          const double t = dn * w3(x[j * k + c] - xi);
          tii += t;
          cross += 3.0 * t * t;  // (ic,jc), (jc,ic), (jc,jc) slots
        }
        s += tii * tii + cross;
      }
    return s;
  };
  m.hessian_quadratic = [n, k, v3, w3, dn](const Vec& x, const Vec& p) -> Vec {
    Vec out(x.size());
    for (int i = 0; i < n; ++i)
      for (int c = 0; c < k; ++c) {
        const double xi = x[i * k + c];
        const double pi = p[i * k + c];
        double acc = -v3(xi) * pi * pi;
        for (int j = 0; j < n; ++j) {
          if (j == i) continue;
          const double pj = p[j * k + c];
          acc += dn * w3(x[j * k + c] - xi) * (pj - pi) * (pj - pi);
        }
        out[i * k + c] = acc;
      }
    return out;
  };

  const double R = box_radius;
  const double ad = std::abs(delta);
  m.constants.lipschitz_L = conf.sup_abs_d2(R) + 2.0 * ad * inter.sup_abs_d2(2 * R);
  m.constants.one_sided_kappa =
      -conf.inf_d2(R) + 2.0 * ad * inter.sup_abs_d2(2 * R);
  const double C =
      conf.sup_abs_d3(R) + 2.0 * ad * inter.sup_abs_d3(2 * R);
  const ClassConstants cc = mean_field_constants(C, d);
  m.constants.laplacian_bound_K = cc.K;
  m.constants.hessian_bound_J = cc.J;
  return m;
}

ClassConstants finite_range_constants(int range_n, double sup_diag,
                                      double sup_off, int d) {
  if (range_n < 0 || sup_diag < 0 || sup_off < 0 || d < 1)
    throw std::invalid_argument("class constants need nonnegative inputs");
  const double n2 = static_cast<double>(range_n) * range_n;
  return {d * n2 * sup_diag * sup_diag, d * n2 * sup_off * sup_off};
}

ClassConstants mean_field_constants(double C, int d) {
  if (C < 0 || d < 1)
    throw std::invalid_argument("class constants need nonnegative inputs");
  return {2.0 * C * C * d, 2.0 * C * C * d};
}

ClassConstants combine_constants(const ClassConstants& a,
                                 const ClassConstants& b) {
  return {2.0 * (a.K + b.K), 2.0 * (a.J + b.J)};
}

ScalarTargetSampler::ScalarTargetSampler(const ScalarPotential& pot,
                                         double box_radius, int grid_size) {
  if (!pot.value) throw std::invalid_argument("potential must supply V");
  if (grid_size < 16) throw std::invalid_argument("grid too small");
  const int n = grid_size;
  xs_.resize(n + 1);
  cdf_.resize(n + 1);
  std::vector<double> dens(n + 1);
  double vmin = pot.value(0.0);
  for (int i = 0; i <= n; ++i) {
    xs_[i] = -box_radius + 2.0 * box_radius * i / n;
    vmin = std::min(vmin, pot.value(xs_[i]));
  }
  for (int i = 0; i <= n; ++i) dens[i] = std::exp(-(pot.value(xs_[i]) - vmin));
  cdf_[0] = 0.0;
  for (int i = 1; i <= n; ++i)
    cdf_[i] = cdf_[i - 1] + 0.5 * (dens[i - 1] + dens[i]) * (xs_[i] - xs_[i - 1]);
  const double z = cdf_[n];
  for (int i = 0; i <= n; ++i) cdf_[i] /= z;
}

double ScalarTargetSampler::quantile(double u) const {
  u = std::clamp(u, 0.0, 1.0);
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  if (it == cdf_.begin()) return xs_.front();
  if (it == cdf_.end()) return xs_.back();
  const auto hi = static_cast<size_t>(it - cdf_.begin());
  const size_t lo = hi - 1;
  const double span = cdf_[hi] - cdf_[lo];
  const double w = span > 0 ? (u - cdf_[lo]) / span : 0.5;
  return xs_[lo] + w * (xs_[hi] - xs_[lo]);
}

double ScalarTargetSampler::second_moment() const {
  double s = 0.0;
  for (size_t i = 1; i < xs_.size(); ++i) {
    const double mids =
        0.5 * (xs_[i] * xs_[i] + xs_[i - 1] * xs_[i - 1]);
    s += mids * (cdf_[i] - cdf_[i - 1]);
  }
  return s;
}

}  // namespace mcmclab
