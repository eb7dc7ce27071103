#include "monoloc/simulation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "monoloc/errors.hpp"
#include "monoloc/inference.hpp"
#include "monoloc/parallel.hpp"
#include "monoloc/stats.hpp"

namespace monoloc {

double AttenuationSpec::value(double t) const {
  switch (kind) {
    case AttenuationKind::InversePoly:
      return a + std::pow(1.0 + t / b, -p);
    case AttenuationKind::ExpDecay:
      return a + std::exp(-t / b);
    case AttenuationKind::TruncLinear:
      return a + (t >= 0.0 && t <= c ? 1.0 - t / c : 0.0);
    case AttenuationKind::RationalSimple:
      return 1.0 / (1.0 + 0.1 * t);
    case AttenuationKind::Custom:
      return custom_value(t);
  }
  return 0.0;
}

double AttenuationSpec::deriv(double t) const {
  switch (kind) {
    case AttenuationKind::InversePoly:
      return -(p / b) * std::pow(1.0 + t / b, -p - 1.0);
    case AttenuationKind::ExpDecay:
      return -std::exp(-t / b) / b;
    case AttenuationKind::TruncLinear:
      return t >= 0.0 && t < c ? -1.0 / c : 0.0;
    case AttenuationKind::RationalSimple: {
      double q = 1.0 + 0.1 * t;
      return -0.1 / (q * q);
    }
    case AttenuationKind::Custom:
      return custom_deriv(t);
  }
  return 0.0;
}

std::string AttenuationSpec::name() const {
  switch (kind) {
    case AttenuationKind::InversePoly:
      return "inverse_poly";
    case AttenuationKind::ExpDecay:
      return "exp_decay";
    case AttenuationKind::TruncLinear:
      return "trunc_linear";
    case AttenuationKind::RationalSimple:
      return "rational_simple";
    case AttenuationKind::Custom:
      return "custom";
  }
  return "?";
}

AttenuationSpec AttenuationSpec::inverse_poly(double a, double b, double p) {
  AttenuationSpec s;
  s.kind = AttenuationKind::InversePoly;
  s.a = a;
  s.b = b;
  s.p = p;
  return s;
}

AttenuationSpec AttenuationSpec::exp_decay(double a, double b) {
  AttenuationSpec s;
  s.kind = AttenuationKind::ExpDecay;
  s.a = a;
  s.b = b;
  return s;
}

AttenuationSpec AttenuationSpec::trunc_linear(double a, double c) {
  AttenuationSpec s;
  s.kind = AttenuationKind::TruncLinear;
  s.a = a;
  s.c = c;
  return s;
}

AttenuationSpec AttenuationSpec::rational_simple() {
  AttenuationSpec s;
  s.kind = AttenuationKind::RationalSimple;
  return s;
}

AttenuationSpec AttenuationSpec::custom(std::function<double(double)> value,
                                        std::function<double(double)> deriv) {
  AttenuationSpec s;
  s.kind = AttenuationKind::Custom;
  s.custom_value = std::move(value);
  s.custom_deriv = std::move(deriv);
  return s;
}

Eigen::VectorXd CovariateSpec::sample(Rng& rng) const {
  switch (kind) {
    case CovariateKind::UnifBox: {
      Eigen::VectorXd x(dim);
      for (int j = 0; j < dim; ++j) x[j] = rng.uniform(lo, hi);
      return x;
    }
    case CovariateKind::CorrelatedUnif: {
      Eigen::VectorXd x(2);
      x[0] = rng.uniform(-3.0, 3.0);
      x[1] = 0.2 * x[0] + 0.8 * rng.uniform(-3.0, 3.0);
      return x;
    }
    case CovariateKind::GaussianIso: {
      Eigen::VectorXd x(dim);
      for (int j = 0; j < dim; ++j) x[j] = rng.normal();
      return x;
    }
  }
  return {};
}

std::string CovariateSpec::name() const {
  switch (kind) {
    case CovariateKind::UnifBox:
      return "unif_box";
    case CovariateKind::CorrelatedUnif:
      return "correlated_unif";
    case CovariateKind::GaussianIso:
      return "gaussian_iso";
  }
  return "?";
}

CovariateSpec CovariateSpec::unif_box(double lo, double hi, int d) {
  CovariateSpec s;
  s.kind = CovariateKind::UnifBox;
  s.lo = lo;
  s.hi = hi;
  s.dim = d;
  return s;
}

CovariateSpec CovariateSpec::correlated_unif() {
  CovariateSpec s;
  s.kind = CovariateKind::CorrelatedUnif;
  s.dim = 2;
  return s;
}

CovariateSpec CovariateSpec::gaussian_iso(int d) {
  CovariateSpec s;
  s.kind = CovariateKind::GaussianIso;
  s.dim = d;
  return s;
}

namespace {

// Beta(2,3) as the 2nd smallest of 4 uniforms (order-statistic identity for
// integer shape parameters).
double beta23(Rng& rng) {
  double u[4];
  for (double& v : u) v = rng.uniform01();
  std::sort(u, u + 4);
  return u[1];
}

double student_t_draw(Rng& rng, int nu) {
  double z = rng.normal();
  double chi2 = 0.0;
  for (int k = 0; k < nu; ++k) {
    double g = rng.normal();
    chi2 += g * g;
  }
  return z / std::sqrt(chi2 / static_cast<double>(nu));
}

}  // namespace

double ErrorSpec::draw(Rng& rng, double u) const {
  double eps = 0.0;
  switch (base) {
    case ErrorKind::Normal:
      eps = rng.normal(0.0, sigma);
      break;
    case ErrorKind::SignedBeta: {
      double s = beta_literal_sign ? -1.0 : rng.sign();
      eps = s * beta23(rng);
      break;
    }
    case ErrorKind::StudentT:
      eps = student_t_draw(rng, nu);
      break;
  }
  if (hetero) eps *= std::log(2.0 + u);
  return eps;
}

double ErrorSpec::base_variance() const {
  switch (base) {
    case ErrorKind::Normal:
      return sigma * sigma;
    case ErrorKind::SignedBeta:
      // E[(±B)^2] = E[B^2] for B ~ Beta(2,3): var + mean^2 = 0.04 + 0.16
      return 0.2;
    case ErrorKind::StudentT:
      return nu > 2 ? static_cast<double>(nu) / (nu - 2.0) : std::numeric_limits<double>::infinity();
  }
  return 0.0;
}

double ErrorSpec::conditional_variance(double u) const {
  double v = base_variance();
  if (hetero) {
    double g = std::log(2.0 + u);
    v *= g * g;
  }
  return v;
}

std::string ErrorSpec::name() const {
  std::string s;
  switch (base) {
    case ErrorKind::Normal:
      s = "normal";
      break;
    case ErrorKind::SignedBeta:
      s = "signed_beta";
      break;
    case ErrorKind::StudentT:
      s = "t" + std::to_string(nu);
      break;
  }
  if (hetero) s += "_hetero";
  return s;
}

ErrorSpec ErrorSpec::normal(double sigma) {
  ErrorSpec e;
  e.base = ErrorKind::Normal;
  e.sigma = sigma;
  return e;
}

ErrorSpec ErrorSpec::signed_beta() {
  ErrorSpec e;
  e.base = ErrorKind::SignedBeta;
  return e;
}

ErrorSpec ErrorSpec::student_t(int nu) {
  ErrorSpec e;
  e.base = ErrorKind::StudentT;
  e.nu = nu;
  return e;
}

ErrorSpec ErrorSpec::with_hetero() const {
  ErrorSpec e = *this;
  e.hetero = true;
  return e;
}

std::string ScenarioConfig::name() const {
  if (!label.empty()) return label;
  return attenuation.name() + "/" + covariates.name() + "/" + errors.name();
}

SensorDataset generate_with_seed(const ScenarioConfig& config, std::uint64_t seed) {
  if (config.n < 1) throw EmptyInput("generate: n must be >= 1");
  const int d = config.covariates.d();
  if (config.theta0.size() != d)
    throw ShapeMismatch("generate: theta0 dimension does not match covariates");
  Rng rng(seed);
  Eigen::MatrixXd x(config.n, d);
  Eigen::VectorXd y(config.n);
  for (int i = 0; i < config.n; ++i) {
    Eigen::VectorXd xi = config.covariates.sample(rng);
    double u = (xi - config.theta0).squaredNorm();
    x.row(i) = xi.transpose();
    y[i] = config.attenuation.value(u) + config.errors.draw(rng, u);
  }
  return SensorDataset::with_default_box(std::move(x), std::move(y));
}

SensorDataset generate(const ScenarioConfig& config) {
  return generate_with_seed(config, config.seed);
}

std::vector<VarianceStudyRow> run_variance_study(const std::vector<ScenarioConfig>& scenarios,
                                                 const std::vector<int>& n_list,
                                                 const std::vector<Method>& methods,
                                                 const SearchConfig& search) {
  std::vector<VarianceStudyRow> rows;
  for (const ScenarioConfig& scenario : scenarios) {
    for (int n : n_list) {
      ScenarioConfig cell = scenario;
      cell.n = n;
      const int reps = cell.replications;
      // estimate per replication and method; NaN marks a failure
      Eigen::MatrixXd first_coord(reps, static_cast<Eigen::Index>(methods.size()));
      parallel_for(static_cast<std::size_t>(reps), [&](std::size_t r) {
        SensorDataset data = generate_with_seed(cell, mix64(cell.seed, r));
        for (std::size_t mi = 0; mi < methods.size(); ++mi) {
          double value = std::numeric_limits<double>::quiet_NaN();
          try {
            SearchConfig cfg = search;
            cfg.seed = mix64(cell.seed, r);
            LocationEstimate est = methods[mi] == Method::LSE
                                       ? estimate_lse(data, Direction::NonIncreasing, cfg)
                                       : estimate_ssce(data, Direction::NonIncreasing, cfg);
            value = est.theta[0];
          } catch (const std::exception&) {
          }
          first_coord(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(mi)) = value;
        }
      });
      for (std::size_t mi = 0; mi < methods.size(); ++mi) {
        std::vector<double> theta1;
        std::vector<double> abs_err;
        int failures = 0;
        for (int r = 0; r < reps; ++r) {
          double v = first_coord(r, static_cast<Eigen::Index>(mi));
          if (std::isnan(v)) {
            ++failures;
            continue;
          }
          theta1.push_back(v);
          abs_err.push_back(std::abs(v - cell.theta0[0]));
        }
        VarianceStudyRow row;
        row.scenario = cell.name();
        row.n = n;
        row.method = methods[mi];
        row.replications = reps;
        row.failures = failures;
        row.scaled_variance = theta1.size() > 1 ? n * sample_variance(theta1) : 0.0;
        row.bias = theta1.empty() ? 0.0 : mean(theta1) - cell.theta0[0];
        row.median_abs_error = abs_err.empty() ? 0.0 : median(abs_err);
        row.kink_flag = !cell.attenuation.differentiable();
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

std::vector<CoverageStudyRow> run_coverage_study(const std::vector<ScenarioConfig>& scenarios,
                                                 const std::vector<int>& n_list,
                                                 const BootstrapSpec& bootstrap, double level,
                                                 const SearchConfig& search) {
  if (level <= 0.0 || level >= 1.0)
    throw std::invalid_argument("run_coverage_study: level must be in (0,1)");
  std::vector<CoverageStudyRow> rows;
  for (const ScenarioConfig& scenario : scenarios) {
    for (int n : n_list) {
      ScenarioConfig cell = scenario;
      cell.n = n;
      const int reps = cell.replications;
      const int m = static_cast<int>(std::floor(std::pow(n, bootstrap.m_exponent)));
      // per dataset: {normal CI covers, percentile CI covers, failed}
      std::vector<std::array<char, 3>> hits(static_cast<std::size_t>(reps), {0, 0, 0});
      parallel_for(static_cast<std::size_t>(reps), [&](std::size_t r) {
        SensorDataset data = generate_with_seed(cell, mix64(cell.seed ^ 0xC0FFEEULL, r));
        EstimatorSpec spec;
        spec.config = search;
        spec.config.seed = mix64(cell.seed, r);
        try {
          std::uint64_t boot_seed = mix64(cell.seed, 0x1000000ULL + r);
          BootstrapSummary summary =
              bootstrap.wild
                  ? bootstrap_wild(data, spec, bootstrap.B, boot_seed)
                  : bootstrap_m_of_n(data, spec, m, bootstrap.B, boot_seed);
          auto [nlo, nhi] = summary.normal_interval(0, level);
          auto [plo, phi] = summary.percentile_interval(0, level, data.n());
          double truth = cell.theta0[0];
          hits[r][0] = truth >= nlo && truth <= nhi;
          hits[r][1] = truth >= plo && truth <= phi;
        } catch (const std::exception&) {
          hits[r][2] = 1;
        }
      });
      CoverageStudyRow row;
      row.scenario = cell.name();
      row.n = n;
      row.datasets = reps;
      row.level = level;
      row.wild = bootstrap.wild;
      row.m = bootstrap.wild ? n : m;
      int ok = 0, cover_n = 0, cover_p = 0, failures = 0;
      for (const auto& h : hits) {
        if (h[2]) {
          ++failures;
          continue;
        }
        ++ok;
        cover_n += h[0];
        cover_p += h[1];
      }
      row.failures = failures;
      row.coverage_normal = ok > 0 ? static_cast<double>(cover_n) / ok : 0.0;
      row.coverage_percentile = ok > 0 ? static_cast<double>(cover_p) / ok : 0.0;
      row.kink_flag = !cell.attenuation.differentiable();
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

}  // namespace monoloc
