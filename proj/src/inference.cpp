#include "monoloc/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "monoloc/errors.hpp"
#include "monoloc/parallel.hpp"
#include "monoloc/stats.hpp"

namespace monoloc {

bool Ellipsoid::contains(const Eigen::VectorXd& x) const {
  Eigen::VectorXd delta = x - center;
  if (rank < center.size()) {
    // outside the range space of a degenerate shape -> not contained
    Eigen::VectorXd projected = shape * shape_pinv * delta;
    double scale = std::max(1.0, delta.norm());
    if ((delta - projected).norm() > 1e-9 * scale) return false;
  }
  return delta.dot(shape_pinv * delta) <= radius * radius + 1e-12;
}

std::vector<double> Ellipsoid::semi_axes() const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(shape);
  std::vector<double> axes;
  for (Eigen::Index j = es.eigenvalues().size() - 1; j >= 0; --j)
    axes.push_back(radius * std::sqrt(std::max(0.0, es.eigenvalues()[j])));
  return axes;
}

Ellipsoid normal_ellipsoid(const Eigen::VectorXd& center, const Eigen::MatrixXd& covariance,
                           double level) {
  if (level <= 0.0 || level >= 1.0)
    throw std::invalid_argument("normal_ellipsoid: level must be in (0,1)");
  Ellipsoid e;
  e.level = level;
  e.center = center;
  e.shape = 0.5 * (covariance + covariance.transpose());
  e.radius = std::sqrt(chi_squared_quantile(level, static_cast<int>(center.size())));

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(e.shape);
  double lambda_max = es.eigenvalues().cwiseAbs().maxCoeff();
  double tol = 1e-12 * std::max(1.0, lambda_max);
  Eigen::VectorXd inv_values = Eigen::VectorXd::Zero(center.size());
  int rank = 0;
  for (Eigen::Index j = 0; j < es.eigenvalues().size(); ++j) {
    if (es.eigenvalues()[j] > tol) {
      inv_values[j] = 1.0 / es.eigenvalues()[j];
      ++rank;
    }
  }
  e.rank = rank;
  e.shape_pinv =
      es.eigenvectors() * inv_values.asDiagonal() * es.eigenvectors().transpose();
  return e;
}

LocationEstimate run_estimator(const SensorDataset& data, const EstimatorSpec& spec) {
  switch (spec.method) {
    case Method::SSCE:
      return estimate_ssce(data, spec.direction, spec.config);
    case Method::LSE:
      return estimate_lse(data, spec.direction, spec.config);
    case Method::SmoothedScore: {
      double h = spec.bandwidth > 0.0 ? spec.bandwidth : default_smoothing_bandwidth(data);
      return estimate_smoothed_score(data, spec.direction, h, spec.config);
    }
  }
  throw std::invalid_argument("run_estimator: unknown method");
}

std::pair<double, double> BootstrapSummary::normal_interval(int coordinate,
                                                            double level) const {
  double z = normal_quantile(0.5 + level / 2.0);
  double half = z * std::sqrt(std::max(0.0, covariance(coordinate, coordinate)));
  return {center[coordinate] - half, center[coordinate] + half};
}

std::pair<double, double> BootstrapSummary::percentile_interval(int coordinate, double level,
                                                                Eigen::Index n) const {
  std::vector<double> scaled;  // sqrt(m) (theta*_1 - theta_hat_1)
  scaled.reserve(static_cast<std::size_t>(replicates.rows()));
  double root_m = std::sqrt(static_cast<double>(m));
  for (Eigen::Index r = 0; r < replicates.rows(); ++r) {
    if (!replicate_ok[static_cast<std::size_t>(r)]) continue;
    scaled.push_back(root_m * (replicates(r, coordinate) - center[coordinate]));
  }
  double alpha = 1.0 - level;
  double lo_q = quantile(scaled, alpha / 2.0);
  double hi_q = quantile(scaled, 1.0 - alpha / 2.0);
  double root_n = std::sqrt(static_cast<double>(n));
  return {center[coordinate] - hi_q / root_n, center[coordinate] - lo_q / root_n};
}

namespace {

struct ReplicateBatch {
  Eigen::MatrixXd thetas;       // B x d, NaN rows on failure
  std::vector<char> ok;
  int effective_B = 0;
};

// Sample covariance over successful replicates, accumulated in replicate
// order (the order is part of the reproducibility contract).
Eigen::MatrixXd replicate_covariance(const ReplicateBatch& batch) {
  const Eigen::Index d = batch.thetas.cols();
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
  for (Eigen::Index r = 0; r < batch.thetas.rows(); ++r)
    if (batch.ok[static_cast<std::size_t>(r)]) mean += batch.thetas.row(r).transpose();
  if (batch.effective_B > 0) mean /= static_cast<double>(batch.effective_B);
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index r = 0; r < batch.thetas.rows(); ++r) {
    if (!batch.ok[static_cast<std::size_t>(r)]) continue;
    Eigen::VectorXd delta = batch.thetas.row(r).transpose() - mean;
    cov += delta * delta.transpose();
  }
  if (batch.effective_B > 1) cov /= static_cast<double>(batch.effective_B - 1);
  return cov;
}

ReplicateBatch run_replicates(int B, Eigen::Index d,
                              const std::function<Eigen::VectorXd(std::size_t)>& one) {
  ReplicateBatch batch;
  batch.thetas = Eigen::MatrixXd::Constant(B, d, std::numeric_limits<double>::quiet_NaN());
  batch.ok.assign(static_cast<std::size_t>(B), 0);
  parallel_for(static_cast<std::size_t>(B), [&](std::size_t r) {
    try {
      Eigen::VectorXd theta = one(r);
      batch.thetas.row(static_cast<Eigen::Index>(r)) = theta.transpose();
      batch.ok[r] = 1;
    } catch (const std::exception&) {
      batch.ok[r] = 0;
    }
  });
  for (char c : batch.ok) batch.effective_B += c;
  return batch;
}

void finalize_summary(BootstrapSummary& summary, const ReplicateBatch& batch, int B,
                      Eigen::Index n, const std::vector<double>& levels) {
  int failed = B - batch.effective_B;
  if (10 * failed > B)
    throw ResampleFailure("bootstrap: " + std::to_string(failed) + " of " + std::to_string(B) +
                          " replicates failed to converge");
  summary.replicates = batch.thetas;
  summary.replicate_ok = batch.ok;
  summary.effective_B = batch.effective_B;
  double rescale = static_cast<double>(summary.m) / static_cast<double>(n);
  summary.covariance = rescale * replicate_covariance(batch);
  for (double level : levels)
    summary.ellipsoids.push_back(normal_ellipsoid(summary.center, summary.covariance, level));
}

}  // namespace

BootstrapSummary bootstrap_m_of_n(const SensorDataset& data, const EstimatorSpec& spec, int m,
                                  int B, std::uint64_t seed,
                                  const std::vector<double>& levels) {
  const Eigen::Index n = data.n();
  if (n == 0) throw EmptyInput("bootstrap_m_of_n: empty dataset");
  if (m < 1 || m > n) throw std::invalid_argument("bootstrap_m_of_n: need 1 <= m <= n");
  if (B < 2) throw std::invalid_argument("bootstrap_m_of_n: need B >= 2");

  LocationEstimate full = run_estimator(data, spec);

  BootstrapSummary summary;
  summary.method = BootstrapMethod::MOutOfN;
  summary.m = m;
  summary.center = full.theta;

  ReplicateBatch batch = run_replicates(B, data.d(), [&](std::size_t r) {
    Rng rng(mix64(seed, r));
    SensorDataset resample;
    resample.bounds = data.bounds;
    resample.x.resize(m, data.x.cols());
    resample.y.resize(m);
    for (int i = 0; i < m; ++i) {
      std::size_t k = rng.uniform_index(static_cast<std::size_t>(n));
      resample.x.row(i) = data.x.row(static_cast<Eigen::Index>(k));
      resample.y[i] = data.y[static_cast<Eigen::Index>(k)];
    }
    EstimatorSpec rep_spec = spec;
    rep_spec.config.seed = mix64(seed, r);
    LocationEstimate est = run_estimator(resample, rep_spec);
    if (!est.converged) throw NoCrossing("replicate did not certify");
    return est.theta;
  });

  finalize_summary(summary, batch, B, n, levels);
  return summary;
}

double mammen_weight(Rng& rng) {
  const double root5 = std::sqrt(5.0);
  const double p_low = (root5 + 1.0) / (2.0 * root5);
  return rng.uniform01() < p_low ? (1.0 - root5) / 2.0 : (1.0 + root5) / 2.0;
}

BootstrapSummary bootstrap_wild(const SensorDataset& data, const EstimatorSpec& spec, int B,
                                std::uint64_t seed, WildWeights weights,
                                const std::vector<double>& levels) {
  const Eigen::Index n = data.n();
  if (n == 0) throw EmptyInput("bootstrap_wild: empty dataset");
  if (B < 2) throw std::invalid_argument("bootstrap_wild: need B >= 2");

  LocationEstimate full = run_estimator(data, spec);
  ProfileEvaluation at_full = profile_fit(data, full.theta, spec.direction);
  Eigen::VectorXd fitted = data.y - at_full.residuals;

  BootstrapSummary summary;
  summary.method = BootstrapMethod::Wild;
  summary.m = static_cast<int>(n);
  summary.center = full.theta;

  ReplicateBatch batch = run_replicates(B, data.d(), [&](std::size_t r) {
    Rng rng(mix64(seed, r));
    SensorDataset resample;
    resample.bounds = data.bounds;
    resample.x = data.x;
    resample.y.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      double w = weights == WildWeights::Mammen ? mammen_weight(rng) : 1.0;
      resample.y[i] = fitted[i] + w * at_full.residuals[i];
    }
    EstimatorSpec rep_spec = spec;
    rep_spec.config.seed = mix64(seed, r);
    LocationEstimate est = run_estimator(resample, rep_spec);
    if (!est.converged) throw NoCrossing("replicate did not certify");
    return est.theta;
  });

  finalize_summary(summary, batch, B, n, levels);
  return summary;
}

AsymptoticCovariance asymptotic_covariance_oracle(const ScenarioConfig& truth, int mc_samples,
                                                  std::uint64_t seed) {
  if (mc_samples < 10000)
    throw std::invalid_argument("asymptotic_covariance_oracle: mc_samples must be >= 10^4");
  const int d = truth.covariates.d();
  const Eigen::Index N = mc_samples;

  Rng rng(seed);
  Eigen::MatrixXd x(N, d);
  Eigen::VectorXd u(N);
  for (Eigen::Index i = 0; i < N; ++i) {
    Eigen::VectorXd xi = truth.covariates.sample(rng);
    x.row(i) = xi.transpose();
    u[i] = (xi - truth.theta0).squaredNorm();
  }

  // distance-quantile bins: equal counts in the sorted order of u
  std::vector<Eigen::Index> order(static_cast<std::size_t>(N));
  for (Eigen::Index i = 0; i < N; ++i) order[static_cast<std::size_t>(i)] = i;
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    if (u[a] != u[b]) return u[a] < u[b];
    return a < b;
  });
  const auto nbins =
      static_cast<Eigen::Index>(std::ceil(std::sqrt(static_cast<double>(N))));
  std::vector<Eigen::Index> bin_of(static_cast<std::size_t>(N));
  std::vector<Eigen::VectorXd> bin_mean(static_cast<std::size_t>(nbins),
                                        Eigen::VectorXd::Zero(d));
  std::vector<Eigen::MatrixXd> bin_cov(static_cast<std::size_t>(nbins),
                                       Eigen::MatrixXd::Zero(d, d));
  for (Eigen::Index b = 0; b < nbins; ++b) {
    Eigen::Index lo = b * N / nbins;
    Eigen::Index hi = (b + 1) * N / nbins;
    Eigen::Index count = hi - lo;
    if (count == 0) continue;
    Eigen::VectorXd mu = Eigen::VectorXd::Zero(d);
    for (Eigen::Index k = lo; k < hi; ++k) {
      bin_of[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])] = b;
      mu += x.row(order[static_cast<std::size_t>(k)]).transpose();
    }
    mu /= static_cast<double>(count);
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
    for (Eigen::Index k = lo; k < hi; ++k) {
      Eigen::VectorXd delta = x.row(order[static_cast<std::size_t>(k)]).transpose() - mu;
      cov += delta * delta.transpose();
    }
    cov /= static_cast<double>(count);
    bin_mean[static_cast<std::size_t>(b)] = mu;
    bin_cov[static_cast<std::size_t>(b)] = cov;
  }

  // A and Sigma as means of per-sample terms; entrywise SEs from the same terms
  Eigen::MatrixXd a_sum = Eigen::MatrixXd::Zero(d, d);
  Eigen::MatrixXd a_sq = Eigen::MatrixXd::Zero(d, d);
  Eigen::MatrixXd s_sum = Eigen::MatrixXd::Zero(d, d);
  Eigen::MatrixXd s_sq = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index i = 0; i < N; ++i) {
    Eigen::Index b = bin_of[static_cast<std::size_t>(i)];
    Eigen::MatrixXd a_term = truth.attenuation.deriv(u[i]) * bin_cov[static_cast<std::size_t>(b)];
    Eigen::VectorXd delta = x.row(i).transpose() - bin_mean[static_cast<std::size_t>(b)];
    Eigen::MatrixXd s_term =
        truth.errors.conditional_variance(u[i]) * (delta * delta.transpose());
    a_sum += a_term;
    a_sq += a_term.cwiseProduct(a_term);
    s_sum += s_term;
    s_sq += s_term.cwiseProduct(s_term);
  }
  const double n_d = static_cast<double>(N);

  AsymptoticCovariance result;
  result.mc_samples = mc_samples;
  result.A = a_sum / n_d;
  result.Sigma = s_sum / n_d;
  result.A_se = ((a_sq / n_d - result.A.cwiseProduct(result.A)).cwiseMax(0.0) / n_d)
                    .cwiseSqrt();
  result.Sigma_se = ((s_sq / n_d - result.Sigma.cwiseProduct(result.Sigma)).cwiseMax(0.0) / n_d)
                        .cwiseSqrt();

  Eigen::MatrixXd a_sym = 0.5 * (result.A + result.A.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a_sym);
  double max_abs = es.eigenvalues().cwiseAbs().maxCoeff();
  double min_abs = es.eigenvalues().cwiseAbs().minCoeff();
  if (min_abs < 1e-8 * max_abs)
    throw SingularA("asymptotic_covariance_oracle: estimated A is numerically singular");
  Eigen::MatrixXd a_inv = result.A.inverse();
  result.limit = a_inv * result.Sigma * a_inv.transpose();
  return result;
}

}  // namespace monoloc
