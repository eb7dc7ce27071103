#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "monoloc/isotonic.hpp"

namespace monoloc {

/// Monitoring region: an axis-aligned box with the radius bound T such that
/// every sensor and every candidate location has Euclidean norm at most T.
struct ParameterBox {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  double radius_bound = 0.0;  // T

  int dim() const { return static_cast<int>(lower.size()); }
  double diameter() const { return (upper - lower).norm(); }
  double domain_upper() const { return 4.0 * radius_bound * radius_bound; }
  bool contains(const Eigen::VectorXd& theta) const;
  Eigen::VectorXd clamp(Eigen::VectorXd theta) const;

  /// Bounding box of the sensor locations expanded 10% per side; T covers
  /// both the sensors and the box corners.
  static ParameterBox default_for(const Eigen::MatrixXd& x);
};

/// n sensor locations (rows of x) with measured energies y.
struct SensorDataset {
  Eigen::MatrixXd x;  // n x d
  Eigen::VectorXd y;  // n
  ParameterBox bounds;

  Eigen::Index n() const { return x.rows(); }
  int d() const { return static_cast<int>(x.cols()); }

  static SensorDataset with_default_box(Eigen::MatrixXd x, Eigen::VectorXd y);
};

/// Everything the estimators need at one candidate location: the profiled
/// monotone fit, its squared error, and the normalized score n^-1 sum r_i x_i.
struct ProfileEvaluation {
  Eigen::VectorXd theta;
  MonotoneStepFunction eta;    // knots are the merged |theta - x_i|^2
  double sse = 0.0;
  Eigen::VectorXd score;
  std::uint64_t ordering_hash = 0;
  Eigen::VectorXd residuals;   // per original observation
};

/// Squared distances |theta - x_i|^2, one per sensor.
Eigen::VectorXd squared_distances(const SensorDataset& data, const Eigen::VectorXd& theta);

/// Digest of the distance ranking of the sensors from theta (ties folded in),
/// constant exactly on ranking cells.
std::uint64_t ordering_hash(const SensorDataset& data, const Eigen::VectorXd& theta);

/// Isotonic profile fit at theta: PAVA over (|theta - x_i|^2, y_i) with ties
/// merged, plus the profiled SSE and the score vector.
ProfileEvaluation profile_fit(const SensorDataset& data, const Eigen::VectorXd& theta,
                              Direction direction);

/// n^-1 sum_i (y_i - eta(|theta - x_i|^2)) x_i.
Eigen::VectorXd score(const SensorDataset& data, const Eigen::VectorXd& theta,
                      Direction direction);

/// True iff the two locations induce the same distance ranking of the
/// sensors, in which case the profiled fit and SSE coincide exactly.
bool criterion_is_ordering_invariant(const SensorDataset& data,
                                     const Eigen::VectorXd& theta1,
                                     const Eigen::VectorXd& theta2);

}  // namespace monoloc
