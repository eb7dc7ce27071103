#include "monoloc/profile.hpp"

#include <algorithm>
#include <numeric>
#include <utility>
#include <vector>

#include "monoloc/errors.hpp"

namespace monoloc {

bool ParameterBox::contains(const Eigen::VectorXd& theta) const {
  return (theta.array() >= lower.array()).all() && (theta.array() <= upper.array()).all();
}

Eigen::VectorXd ParameterBox::clamp(Eigen::VectorXd theta) const {
  for (Eigen::Index j = 0; j < theta.size(); ++j)
    theta[j] = std::clamp(theta[j], lower[j], upper[j]);
  return theta;
}

ParameterBox ParameterBox::default_for(const Eigen::MatrixXd& x) {
  if (x.rows() == 0) throw EmptyInput("ParameterBox::default_for: no sensors");
  ParameterBox box;
  box.lower = x.colwise().minCoeff();
  box.upper = x.colwise().maxCoeff();
  Eigen::VectorXd margin = 0.1 * (box.upper - box.lower);
  for (Eigen::Index j = 0; j < margin.size(); ++j)
    if (margin[j] == 0.0) margin[j] = 1.0;  // degenerate flat dimension
  box.lower -= margin;
  box.upper += margin;
  double t = x.rowwise().norm().maxCoeff();
  t = std::max(t, box.lower.norm());
  t = std::max(t, box.upper.norm());
  // corners mixing lower/upper coordinates cannot exceed the max component norm
  Eigen::VectorXd corner = box.lower.cwiseAbs().cwiseMax(box.upper.cwiseAbs());
  box.radius_bound = std::max(t, corner.norm());
  return box;
}

SensorDataset SensorDataset::with_default_box(Eigen::MatrixXd x, Eigen::VectorXd y) {
  if (x.rows() != y.size()) throw ShapeMismatch("SensorDataset: x rows != y size");
  SensorDataset data;
  data.bounds = ParameterBox::default_for(x);
  data.x = std::move(x);
  data.y = std::move(y);
  return data;
}

Eigen::VectorXd squared_distances(const SensorDataset& data, const Eigen::VectorXd& theta) {
  return (data.x.rowwise() - theta.transpose()).rowwise().squaredNorm();
}

namespace {

std::vector<std::size_t> distance_order(const Eigen::VectorXd& d2) {
  std::vector<std::size_t> order(static_cast<std::size_t>(d2.size()));
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (d2[static_cast<Eigen::Index>(a)] != d2[static_cast<Eigen::Index>(b)])
      return d2[static_cast<Eigen::Index>(a)] < d2[static_cast<Eigen::Index>(b)];
    return a < b;
  });
  return order;
}

// FNV-1a over the sorted index sequence; tie-group boundaries folded in so
// two rankings differing only in tie structure hash apart.
std::uint64_t hash_order(const Eigen::VectorXd& d2, const std::vector<std::size_t>& order) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  auto mix = [&h](std::uint64_t v) {
    h ^= v;
    h *= 0x100000001B3ULL;
  };
  for (std::size_t k = 0; k < order.size(); ++k) {
    mix(static_cast<std::uint64_t>(order[k]) + 1);
    bool tied_with_next =
        k + 1 < order.size() &&
        d2[static_cast<Eigen::Index>(order[k])] == d2[static_cast<Eigen::Index>(order[k + 1])];
    mix(tied_with_next ? 0x9EULL : 0x01ULL);
  }
  return h;
}

}  // namespace

std::uint64_t ordering_hash(const SensorDataset& data, const Eigen::VectorXd& theta) {
  Eigen::VectorXd d2 = squared_distances(data, theta);
  return hash_order(d2, distance_order(d2));
}

ProfileEvaluation profile_fit(const SensorDataset& data, const Eigen::VectorXd& theta,
                              Direction direction) {
  const Eigen::Index n = data.n();
  if (n == 0) throw EmptyInput("profile_fit: empty dataset");
  if (theta.size() != data.x.cols()) throw ShapeMismatch("profile_fit: theta dimension");

  Eigen::VectorXd d2 = squared_distances(data, theta);
  std::vector<std::size_t> order = distance_order(d2);

  // Merge distance ties into weighted points, keeping the group of each
  // original observation so residuals can be mapped back.
  WeightedSeries series;
  std::vector<std::size_t> group(static_cast<std::size_t>(n));
  std::size_t i = 0;
  while (i < order.size()) {
    double pos = d2[static_cast<Eigen::Index>(order[i])];
    double sum = 0.0;
    std::size_t count = 0;
    while (i < order.size() && d2[static_cast<Eigen::Index>(order[i])] == pos) {
      group[order[i]] = series.positions.size();
      sum += data.y[static_cast<Eigen::Index>(order[i])];
      ++count;
      ++i;
    }
    series.positions.push_back(pos);
    series.responses.push_back(sum / static_cast<double>(count));
    series.weights.push_back(static_cast<double>(count));
  }

  ProfileEvaluation eval;
  eval.theta = theta;
  eval.eta = pava(series, direction, data.bounds.domain_upper());
  eval.ordering_hash = hash_order(d2, order);

  eval.residuals.resize(n);
  eval.score = Eigen::VectorXd::Zero(data.x.cols());
  double sse = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    double r = data.y[k] - eval.eta.values[group[static_cast<std::size_t>(k)]];
    eval.residuals[k] = r;
    sse += r * r;
    eval.score += r * data.x.row(k).transpose();
  }
  eval.sse = sse;
  eval.score /= static_cast<double>(n);
  return eval;
}

Eigen::VectorXd score(const SensorDataset& data, const Eigen::VectorXd& theta,
                      Direction direction) {
  return profile_fit(data, theta, direction).score;
}

bool criterion_is_ordering_invariant(const SensorDataset& data,
                                     const Eigen::VectorXd& theta1,
                                     const Eigen::VectorXd& theta2) {
  return ordering_hash(data, theta1) == ordering_hash(data, theta2);
}

}  // namespace monoloc
