#pragma once

#include <cstdint>

#include "monoloc/profile.hpp"

namespace monoloc {

enum class Method { SSCE, LSE, SmoothedScore };

struct SearchConfig {
  int grid_points_per_dim = 21;
  int multistarts = 8;
  int max_evals = 0;           // <= 0: 5000 * d
  double tol_objective = 0.0;  // <= 0: 1e-6 * stdev(y) * mean|x|
  double tol_step = 0.0;       // <= 0: 1e-4 * box diameter
  std::uint64_t seed = 0x6D6F6E6F6C6F63ULL;

  /// Concrete tolerances for a given dataset (fills the data-driven defaults).
  SearchConfig resolved(const SensorDataset& data) const;
};

struct LocationEstimate {
  Eigen::VectorXd theta;
  MonotoneStepFunction eta;        // profiled fit refit at theta
  Method method = Method::SSCE;
  double objective_at_solution = 0.0;  // |n^-1 M_n| for score methods, SSE for LSE
  double sse = 0.0;                // profiled SSE at theta
  Direction direction = Direction::NonIncreasing;
  long evaluations = 0;
  bool converged = false;
};

/// Simple score estimator: minimizes |n^-1 M_n(theta)| over the box by a
/// coarse grid seeding multistart Nelder-Mead runs on the squared norm, then
/// certifies a componentwise sign change within a tol_step ball.
LocationEstimate estimate_ssce(const SensorDataset& data, Direction direction,
                               const SearchConfig& config);

/// Least squares estimator: minimizes the profiled SSE (piecewise constant in
/// theta) by coarse grid plus compass pattern search; among equal-SSE minima
/// the lexicographically smallest evaluated point is returned.
LocationEstimate estimate_lse(const SensorDataset& data, Direction direction,
                              const SearchConfig& config);

/// Kernel-smoothed score estimator: minimizes the norm of
/// n^-1 sum_i r_i(theta) eta'_{theta,h}(|theta-x_i|^2) x_i where the step
/// derivative is smoothed over the fit's jumps with a C^2 bump kernel.
LocationEstimate estimate_smoothed_score(const SensorDataset& data, Direction direction,
                                         double bandwidth, const SearchConfig& config);

/// Default bandwidth 0.5 * range(|c - x_i|^2) * n^(-1/7), distances taken
/// from the sensor centroid c.
double default_smoothing_bandwidth(const SensorDataset& data);

/// C^2 bump kernel 140 u^3 (1-u)^3 on [0,1], zero elsewhere; integrates to 1.
double smoothing_kernel(double u);

/// Smoothed derivative of a step function at u: h^-1 sum_j K((u - t_j)/h) D_j
/// over the jumps (t_j, D_j).
double smoothed_step_derivative(const MonotoneStepFunction& f, double u, double h);

}  // namespace monoloc
