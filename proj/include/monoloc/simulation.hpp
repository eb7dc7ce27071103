#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "monoloc/estimators.hpp"
#include "monoloc/profile.hpp"
#include "monoloc/rng.hpp"

namespace monoloc {

enum class AttenuationKind { InversePoly, ExpDecay, TruncLinear, RationalSimple, Custom };

/// Nonincreasing signal-attenuation function of squared distance.
struct AttenuationSpec {
  AttenuationKind kind = AttenuationKind::RationalSimple;
  double a = 0.0, b = 1.0, p = 1.0, c = 1.0;
  std::function<double(double)> custom_value;
  std::function<double(double)> custom_deriv;

  double value(double t) const;
  double deriv(double t) const;
  /// False for the truncated-linear family, which has a kink at t = c.
  bool differentiable() const { return kind != AttenuationKind::TruncLinear; }
  std::string name() const;

  static AttenuationSpec inverse_poly(double a, double b, double p);  // a+(1+t/b)^-p
  static AttenuationSpec exp_decay(double a, double b);               // a+exp(-t/b)
  static AttenuationSpec trunc_linear(double a, double c);            // a+(1-t/c)1[0,c]
  static AttenuationSpec rational_simple();                           // 1/(1+0.1t)
  static AttenuationSpec custom(std::function<double(double)> value,
                                std::function<double(double)> deriv);
};

enum class CovariateKind { UnifBox, CorrelatedUnif, GaussianIso };

struct CovariateSpec {
  CovariateKind kind = CovariateKind::UnifBox;
  double lo = -3.0, hi = 3.0;
  int dim = 2;

  int d() const { return kind == CovariateKind::CorrelatedUnif ? 2 : dim; }
  Eigen::VectorXd sample(Rng& rng) const;
  std::string name() const;

  static CovariateSpec unif_box(double lo, double hi, int d);
  /// X1 ~ Unif[-3,3], X2 | X1 ~ 0.2 X1 + 0.8 Unif[-3,3].
  static CovariateSpec correlated_unif();
  static CovariateSpec gaussian_iso(int d);
};

enum class ErrorKind { Normal, SignedBeta, StudentT };

struct ErrorSpec {
  ErrorKind base = ErrorKind::Normal;
  double sigma = 1.0;           // Normal scale
  int nu = 3;                   // Student-t degrees of freedom
  bool hetero = false;          // multiply by log(2 + |theta0 - X|^2)
  /// Read (-1)^Ber(1) literally (constant sign -1) instead of a fair random
  /// sign; the literal reading breaks E[eps|X] = 0 and exists only to make
  /// the ambiguity explicit.
  bool beta_literal_sign = false;
  int moment_order_q = 6;       // metadata only

  /// One error draw given the squared distance u of the sensor to theta0.
  double draw(Rng& rng, double u) const;
  /// Var(eps | |theta0 - X|^2 = u).
  double conditional_variance(double u) const;
  double base_variance() const;
  std::string name() const;

  static ErrorSpec normal(double sigma);
  static ErrorSpec signed_beta();
  static ErrorSpec student_t(int nu);
  ErrorSpec with_hetero() const;
};

struct ScenarioConfig {
  AttenuationSpec attenuation;
  CovariateSpec covariates;
  ErrorSpec errors;
  Eigen::VectorXd theta0;
  int n = 500;
  int replications = 200;
  std::uint64_t seed = 1;
  std::string label;

  std::string name() const;
};

/// n i.i.d. draws from Y = eta0(|theta0 - X|^2) + eps, deterministic under
/// the scenario seed; the parameter box defaults to the sensor bounding box
/// expanded 10% per side.
SensorDataset generate(const ScenarioConfig& config);
SensorDataset generate_with_seed(const ScenarioConfig& config, std::uint64_t seed);

struct VarianceStudyRow {
  std::string scenario;
  int n = 0;
  Method method = Method::SSCE;
  int replications = 0;
  int failures = 0;
  double scaled_variance = 0.0;  // n * var(theta_1)
  double bias = 0.0;             // mean(theta_1 - theta0_1)
  double median_abs_error = 0.0;
  bool kink_flag = false;        // attenuation not differentiable at a kink
};

/// Monte-Carlo study of n * var for the requested estimators across the
/// scenario grid; replications are generated per scenario seed and shared
/// between methods.
std::vector<VarianceStudyRow> run_variance_study(const std::vector<ScenarioConfig>& scenarios,
                                                 const std::vector<int>& n_list,
                                                 const std::vector<Method>& methods,
                                                 const SearchConfig& search = {});

struct BootstrapSpec {
  int B = 200;
  double m_exponent = 0.875;  // m = floor(n^m_exponent)
  bool wild = false;
};

struct CoverageStudyRow {
  std::string scenario;
  int n = 0;
  int datasets = 0;
  double level = 0.9;
  bool wild = false;
  int m = 0;
  double coverage_normal = 0.0;      // CI theta_1 +/- z sqrt(cov_11)
  double coverage_percentile = 0.0;  // m-out-of-n percentile CI
  int failures = 0;
  bool kink_flag = false;
};

/// Empirical CI coverage for theta0_1 over Monte-Carlo datasets; the count of
/// datasets comes from scenario.replications.
std::vector<CoverageStudyRow> run_coverage_study(const std::vector<ScenarioConfig>& scenarios,
                                                 const std::vector<int>& n_list,
                                                 const BootstrapSpec& bootstrap, double level,
                                                 const SearchConfig& search = {});

}  // namespace monoloc
