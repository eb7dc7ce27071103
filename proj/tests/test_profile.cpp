#include <doctest.h>

#include <cmath>

#include "monoloc/errors.hpp"
#include "monoloc/profile.hpp"
#include "monoloc/rng.hpp"
#include "oracles.hpp"

using namespace monoloc;

namespace {

SensorDataset random_dataset(Rng& rng, int n, int d, double noise) {
  Eigen::MatrixXd x(n, d);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) x(i, j) = rng.uniform(-3.0, 3.0);
    double u = x.row(i).squaredNorm();
    y[i] = 1.0 / (1.0 + 0.1 * u) + noise * rng.normal();
  }
  return SensorDataset::with_default_box(std::move(x), std::move(y));
}

}  // namespace

TEST_CASE("single observation fits exactly with zero score") {
  Eigen::MatrixXd x(1, 2);
  x << 1.0, 2.0;
  Eigen::VectorXd y(1);
  y << 7.5;
  auto data = SensorDataset::with_default_box(x, y);
  auto eval = profile_fit(data, Eigen::Vector2d(0.0, 0.0), Direction::NonIncreasing);
  CHECK(eval.eta.values == std::vector<double>{7.5});
  CHECK(eval.sse == 0.0);
  CHECK(eval.score.norm() == 0.0);
}

TEST_CASE("noiseless monotone data interpolates with zero SSE") {
  Rng rng(11);
  Eigen::Vector2d theta0(0.4, -0.7);
  Eigen::MatrixXd x(25, 2);
  Eigen::VectorXd y(25);
  for (int i = 0; i < 25; ++i) {
    x(i, 0) = rng.uniform(-3.0, 3.0);
    x(i, 1) = rng.uniform(-3.0, 3.0);
    double u = (x.row(i).transpose() - theta0).squaredNorm();
    y[i] = 5.0 + std::exp(-u / 4.0);
  }
  auto data = SensorDataset::with_default_box(x, y);
  auto eval = profile_fit(data, theta0, Direction::NonIncreasing);
  CHECK(eval.sse == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(eval.score.norm() == doctest::Approx(0.0).epsilon(1e-12));
  for (Eigen::Index i = 0; i < 25; ++i)
    CHECK(eval.eta((x.row(i).transpose() - theta0).squaredNorm()) == doctest::Approx(y[i]));
}

TEST_CASE("profiled SSE matches the exhaustive isotonic projection oracle") {
  Rng rng(12);
  auto data = random_dataset(rng, 12, 2, 0.4);
  Eigen::Vector2d theta(0.3, -0.2);
  auto eval = profile_fit(data, theta, Direction::NonIncreasing);

  Eigen::VectorXd d2 = squared_distances(data, theta);
  std::vector<double> pos(d2.data(), d2.data() + d2.size());
  std::vector<double> resp(data.y.data(), data.y.data() + data.y.size());
  auto merged = merge_ties(pos, resp);
  auto oracle = oracles::brute_force_monotone_fit(merged.responses, merged.weights,
                                                  Direction::NonIncreasing);
  double oracle_sse = 0.0;
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    // locate the merged knot of observation i
    std::size_t g = 0;
    while (merged.positions[g] != d2[i]) ++g;
    double r = data.y[i] - oracle[g];
    oracle_sse += r * r;
  }
  CHECK(eval.sse == doctest::Approx(oracle_sse).epsilon(1e-9));
}

TEST_CASE("score equals a direct double-loop summation") {
  Rng rng(13);
  auto data = random_dataset(rng, 30, 2, 0.5);
  Eigen::Vector2d theta(-0.8, 0.1);
  auto eval = profile_fit(data, theta, Direction::NonIncreasing);

  Eigen::Vector2d reference = Eigen::Vector2d::Zero();
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    double fitted = eval.eta((data.x.row(i).transpose() - theta).squaredNorm());
    reference += (data.y[i] - fitted) * data.x.row(i).transpose();
  }
  reference /= static_cast<double>(data.n());
  CHECK(eval.score[0] == doctest::Approx(reference[0]).epsilon(1e-12));
  CHECK(eval.score[1] == doctest::Approx(reference[1]).epsilon(1e-12));
}

TEST_CASE("score is translation covariant through the residuals") {
  Rng rng(14);
  auto data = random_dataset(rng, 40, 2, 0.3);
  Eigen::Vector2d theta(0.2, 0.6);
  Eigen::Vector2d shift(10.0, -4.0);

  SensorDataset moved = data;
  moved.x.rowwise() += shift.transpose();
  moved.bounds.lower += shift;
  moved.bounds.upper += shift;

  auto base = profile_fit(data, theta, Direction::NonIncreasing);
  auto trans = profile_fit(moved, theta + shift, Direction::NonIncreasing);
  // residual-sum-zero makes the score shift by c * mean(resid) = 0
  CHECK(trans.score[0] == doctest::Approx(base.score[0]).epsilon(1e-9));
  CHECK(trans.score[1] == doctest::Approx(base.score[1]).epsilon(1e-9));
  CHECK(trans.sse == doctest::Approx(base.sse).epsilon(1e-12));
}

TEST_CASE("residuals at the generating location vanish for noiseless data -> zero score") {
  Rng rng(15);
  Eigen::Vector2d theta0(1.0, 1.5);
  Eigen::MatrixXd x(20, 2);
  Eigen::VectorXd y(20);
  for (int i = 0; i < 20; ++i) {
    x(i, 0) = rng.uniform(-3.0, 3.0);
    x(i, 1) = rng.uniform(-3.0, 3.0);
    y[i] = 1.0 / (1.0 + 0.1 * (x.row(i).transpose() - theta0).squaredNorm());
  }
  auto data = SensorDataset::with_default_box(x, y);
  CHECK(score(data, theta0, Direction::NonIncreasing).norm() ==
        doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("ordering invariance detects ranking cells") {
  Rng rng(16);
  auto data = random_dataset(rng, 15, 2, 0.2);
  Eigen::Vector2d theta(0.5, 0.5);

  CHECK(criterion_is_ordering_invariant(data, theta, theta));

  // an infinitesimal move that provably preserves the ranking
  Eigen::Vector2d nudged = theta + Eigen::Vector2d(1e-13, -1e-13);
  if (ordering_hash(data, theta) == ordering_hash(data, nudged)) {
    auto a = profile_fit(data, theta, Direction::NonIncreasing);
    auto b = profile_fit(data, nudged, Direction::NonIncreasing);
    CHECK(a.sse == b.sse);  // bitwise equal on the same cell
    CHECK(criterion_is_ordering_invariant(data, theta, nudged));
  }

  // two sensors and a theta pair straddling their perpendicular bisector
  Eigen::MatrixXd x(2, 2);
  x << -1.0, 0.0, 1.0, 0.0;
  Eigen::VectorXd y(2);
  y << 2.0, 1.0;
  auto two = SensorDataset::with_default_box(x, y);
  CHECK_FALSE(criterion_is_ordering_invariant(two, Eigen::Vector2d(-0.5, 0.0),
                                              Eigen::Vector2d(0.5, 0.0)));
}

TEST_CASE("profile invariants over random locations") {
  Rng rng(17);
  auto data = random_dataset(rng, 60, 2, 0.6);
  double sd = std::sqrt((data.y.array() - data.y.mean()).square().sum() / (data.n() - 1.0));
  double ymin = data.y.minCoeff(), ymax = data.y.maxCoeff();

  for (int rep = 0; rep < 100; ++rep) {
    Eigen::Vector2d theta(rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0));
    auto eval = profile_fit(data, theta, Direction::NonIncreasing);

    // residual-sum-zero
    CHECK(std::abs(eval.residuals.sum()) <= 1e-9 * data.n() * sd);
    // fitted range bound
    for (double v : eval.eta.values) {
      CHECK(v >= ymin - 1e-12);
      CHECK(v <= ymax + 1e-12);
    }
    // SSE constant on the ranking cell
    Eigen::Vector2d nudged = theta + Eigen::Vector2d(rng.uniform(-1e-12, 1e-12),
                                                     rng.uniform(-1e-12, 1e-12));
    if (ordering_hash(data, theta) == ordering_hash(data, nudged)) {
      auto eval2 = profile_fit(data, nudged, Direction::NonIncreasing);
      CHECK(eval.sse == eval2.sse);
    }

    // direction flip: NonDecreasing on -y equals the negated NonIncreasing fit
    SensorDataset flipped = data;
    flipped.y = -flipped.y;
    auto flip = profile_fit(flipped, theta, Direction::NonDecreasing);
    CHECK(flip.sse == doctest::Approx(eval.sse).epsilon(1e-12));
    for (std::size_t k = 0; k < flip.eta.values.size(); ++k)
      CHECK(flip.eta.values[k] == doctest::Approx(-eval.eta.values[k]).epsilon(1e-12));

    // scale covariance: y -> a y + b
    double a = 2.5, b = -1.75;
    SensorDataset scaled = data;
    scaled.y = a * scaled.y.array() + b;
    auto sc = profile_fit(scaled, theta, Direction::NonIncreasing);
    CHECK(sc.sse == doctest::Approx(a * a * eval.sse).epsilon(1e-9));
    CHECK(sc.score[0] == doctest::Approx(a * eval.score[0]).epsilon(1e-9));
    CHECK(sc.score[1] == doctest::Approx(a * eval.score[1]).epsilon(1e-9));
    for (std::size_t k = 0; k < sc.eta.values.size(); ++k)
      CHECK(sc.eta.values[k] == doctest::Approx(a * eval.eta.values[k] + b).epsilon(1e-9));
  }
}

TEST_CASE("profile_fit rejects an empty dataset") {
  SensorDataset empty;
  empty.x.resize(0, 2);
  empty.y.resize(0);
  empty.bounds.lower = Eigen::Vector2d(-1, -1);
  empty.bounds.upper = Eigen::Vector2d(1, 1);
  empty.bounds.radius_bound = 2.0;
  CHECK_THROWS_AS(profile_fit(empty, Eigen::Vector2d(0, 0), Direction::NonIncreasing),
                  EmptyInput);
}

TEST_CASE("a sensor exactly at theta contributes the zero knot") {
  Eigen::MatrixXd x(3, 2);
  x << 0.0, 0.0, 1.0, 0.0, 0.0, 2.0;
  Eigen::VectorXd y(3);
  y << 5.0, 4.0, 3.0;
  auto data = SensorDataset::with_default_box(x, y);
  auto eval = profile_fit(data, Eigen::Vector2d(0.0, 0.0), Direction::NonIncreasing);
  CHECK(eval.eta.knots.front() == 0.0);
  CHECK(eval.sse == doctest::Approx(0.0));
}
