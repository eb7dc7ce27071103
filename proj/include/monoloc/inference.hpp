#pragma once

#include <cstdint>
#include <vector>

#include "monoloc/estimators.hpp"
#include "monoloc/rng.hpp"
#include "monoloc/simulation.hpp"

namespace monoloc {

/// Confidence region {x : (x-center)' shape^+ (x-center) <= radius^2} where
/// shape is a covariance matrix and radius^2 the chi-squared quantile at the
/// level; degenerate directions are handled by the pseudo-inverse.
struct Ellipsoid {
  double level = 0.0;
  Eigen::VectorXd center;
  Eigen::MatrixXd shape;       // covariance
  double radius = 0.0;         // sqrt(chi^2_d quantile)
  int rank = 0;
  Eigen::MatrixXd shape_pinv;

  bool contains(const Eigen::VectorXd& x) const;
  /// Semi-axis lengths radius * sqrt(eigenvalue), descending.
  std::vector<double> semi_axes() const;
};

Ellipsoid normal_ellipsoid(const Eigen::VectorXd& center, const Eigen::MatrixXd& covariance,
                           double level);

/// Which estimator a resampling procedure re-runs.
struct EstimatorSpec {
  Method method = Method::SSCE;
  Direction direction = Direction::NonIncreasing;
  SearchConfig config;
  double bandwidth = 0.0;  // SmoothedScore only; <= 0 uses the default rule
};

LocationEstimate run_estimator(const SensorDataset& data, const EstimatorSpec& spec);

enum class BootstrapMethod { MOutOfN, Wild };

struct BootstrapSummary {
  BootstrapMethod method = BootstrapMethod::MOutOfN;
  int m = 0;                    // resample size (= n for Wild)
  Eigen::VectorXd center;       // full-data estimate
  Eigen::MatrixXd replicates;   // B x d, failed rows are NaN
  std::vector<char> replicate_ok;
  int effective_B = 0;
  Eigen::MatrixXd covariance;   // (m/n)-rescaled estimate of var(theta_hat)
  std::vector<Ellipsoid> ellipsoids;

  /// Two-sided normal-approximation CI for one coordinate.
  std::pair<double, double> normal_interval(int coordinate, double level) const;
  /// m-out-of-n percentile CI for one coordinate, from the replicate
  /// distribution of sqrt(m)(theta* - theta_hat) rescaled by sqrt(n).
  std::pair<double, double> percentile_interval(int coordinate, double level,
                                                Eigen::Index n) const;
};

/// Standard m-out-of-n bootstrap: B with-replacement resamples of size m,
/// replicate r seeded with mix64(seed, r); covariance = (m/n) * sample
/// covariance of the successful replicates, accumulated in replicate order.
BootstrapSummary bootstrap_m_of_n(const SensorDataset& data, const EstimatorSpec& spec, int m,
                                  int B, std::uint64_t seed,
                                  const std::vector<double>& levels = {0.90, 0.95});

enum class WildWeights { Mammen, AllOnes };

/// Mammen two-point multiplier: (1-sqrt5)/2 w.p. (sqrt5+1)/(2 sqrt5), else
/// (1+sqrt5)/2; mean 0, variance 1, third moment 1.
double mammen_weight(Rng& rng);

/// Wild bootstrap on residuals at the full-data fit (kept for the negative
/// result: inconsistent for the score estimator).  AllOnes reproduces the
/// original data in every replicate and is a degenerate diagnostic.
BootstrapSummary bootstrap_wild(const SensorDataset& data, const EstimatorSpec& spec, int B,
                                std::uint64_t seed, WildWeights weights = WildWeights::Mammen,
                                const std::vector<double>& levels = {0.90, 0.95});

/// Plug-in components of the asymptotic covariance of sqrt(n)(theta - theta0):
/// A = E[eta0'(u) Cov(X|u)], Sigma = E[sigma^2(X)(X - E[X|u])(X - E[X|u])'],
/// limit = A^-1 Sigma A^-1, with u = |theta0 - X|^2.
struct AsymptoticCovariance {
  Eigen::MatrixXd A;
  Eigen::MatrixXd Sigma;
  Eigen::MatrixXd limit;
  Eigen::MatrixXd A_se;      // entrywise Monte-Carlo standard errors
  Eigen::MatrixXd Sigma_se;
  int mc_samples = 0;
};

/// Nested Monte Carlo with distance-quantile binning (ceil(sqrt(N)) bins) for
/// the conditional moments; throws SingularA when the estimated A is
/// numerically singular.
AsymptoticCovariance asymptotic_covariance_oracle(const ScenarioConfig& truth, int mc_samples,
                                                  std::uint64_t seed);

}  // namespace monoloc
