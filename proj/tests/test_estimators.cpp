#include <doctest.h>

#include <cmath>
#include <map>

#include "monoloc/errors.hpp"
#include "monoloc/estimators.hpp"
#include "monoloc/rng.hpp"
#include "monoloc/simulation.hpp"

using namespace monoloc;

namespace {

SensorDataset noiseless_dataset(std::uint64_t seed, int n, const Eigen::Vector2d& theta0,
                                const AttenuationSpec& eta) {
  Rng rng(seed);
  Eigen::MatrixXd x(n, 2);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    x(i, 0) = rng.uniform(-3.0, 3.0);
    x(i, 1) = rng.uniform(-3.0, 3.0);
    y[i] = eta.value((x.row(i).transpose() - theta0).squaredNorm());
  }
  return SensorDataset::with_default_box(std::move(x), std::move(y));
}

SensorDataset noisy_dataset(std::uint64_t seed, int n) {
  ScenarioConfig config;
  config.attenuation = AttenuationSpec::rational_simple();
  config.covariates = CovariateSpec::unif_box(-3.0, 3.0, 2);
  config.errors = ErrorSpec::normal(0.1);
  config.theta0 = Eigen::Vector2d(0.0, 0.0);
  config.n = n;
  config.seed = seed;
  return generate(config);
}

}  // namespace

TEST_CASE("noiseless strictly decreasing data is recovered exactly") {
  Eigen::Vector2d theta0(0.35, -0.55);
  auto data = noiseless_dataset(42, 800, theta0, AttenuationSpec::rational_simple());
  SearchConfig config;
  auto est = estimate_ssce(data, Direction::NonIncreasing, config);
  double tol_step = config.resolved(data).tol_step;
  CHECK(est.converged);
  CHECK(est.objective_at_solution == doctest::Approx(0.0).epsilon(1e-10));
  CHECK(est.sse == doctest::Approx(0.0).epsilon(1e-10));
  CHECK((est.theta - theta0).norm() <= tol_step);
}

TEST_CASE("ssce solver is at least as good as a 201x201 grid oracle") {
  auto data = noisy_dataset(4040, 40);
  SearchConfig config;
  auto est = estimate_ssce(data, Direction::NonIncreasing, config);

  double grid_best = std::numeric_limits<double>::infinity();
  const int g = 201;
  for (int i = 0; i < g; ++i) {
    for (int j = 0; j < g; ++j) {
      Eigen::Vector2d theta(
          data.bounds.lower[0] + i * (data.bounds.upper[0] - data.bounds.lower[0]) / (g - 1),
          data.bounds.lower[1] + j * (data.bounds.upper[1] - data.bounds.lower[1]) / (g - 1));
      grid_best = std::min(grid_best,
                           profile_fit(data, theta, Direction::NonIncreasing).score.norm());
    }
  }
  CHECK(est.objective_at_solution <= grid_best + 1e-12);
}

TEST_CASE("lse attains an SSE no worse than every point of a 201x201 grid") {
  auto data = noisy_dataset(3030, 30);
  SearchConfig config;
  auto est = estimate_lse(data, Direction::NonIncreasing, config);

  const int g = 201;
  for (int i = 0; i < g; ++i) {
    for (int j = 0; j < g; ++j) {
      Eigen::Vector2d theta(
          data.bounds.lower[0] + i * (data.bounds.upper[0] - data.bounds.lower[0]) / (g - 1),
          data.bounds.lower[1] + j * (data.bounds.upper[1] - data.bounds.lower[1]) / (g - 1));
      CHECK(est.sse <= profile_fit(data, theta, Direction::NonIncreasing).sse + 1e-12);
    }
  }
}

TEST_CASE("noiseless LSE lands in a zero-SSE cell") {
  Eigen::Vector2d theta0(-0.8, 0.4);
  auto data = noiseless_dataset(77, 300, theta0, AttenuationSpec::exp_decay(5.0, 4.0));
  auto est = estimate_lse(data, Direction::NonIncreasing, SearchConfig{});
  CHECK(est.sse == doctest::Approx(0.0).epsilon(1e-12));
  // the zero cell contains theta0; the returned point must share its ranking
  CHECK(criterion_is_ordering_invariant(data, est.theta, theta0));
}

TEST_CASE("equal ranking hash implies identical SSE") {
  auto data = noisy_dataset(505, 25);
  std::map<std::uint64_t, double> seen;
  Rng rng(606);
  for (int k = 0; k < 400; ++k) {
    Eigen::Vector2d theta(rng.uniform(-3.3, 3.3), rng.uniform(-3.3, 3.3));
    auto eval = profile_fit(data, theta, Direction::NonIncreasing);
    auto [it, inserted] = seen.emplace(eval.ordering_hash, eval.sse);
    if (!inserted) CHECK(it->second == eval.sse);
  }
}

TEST_CASE("translation equivariance of both estimators") {
  Eigen::Vector2d shift(7.0, -5.0);
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    auto data = noisy_dataset(seed, 60);
    SensorDataset moved = data;
    moved.x.rowwise() += shift.transpose();
    moved.bounds.lower += shift;
    moved.bounds.upper += shift;
    moved.bounds.radius_bound = moved.x.rowwise().norm().maxCoeff() +
                                (moved.bounds.upper - moved.bounds.lower).norm();

    auto base = estimate_ssce(data, Direction::NonIncreasing, SearchConfig{});
    auto trans = estimate_ssce(moved, Direction::NonIncreasing, SearchConfig{});
    CHECK((trans.theta - base.theta - shift).norm() <= 1e-9);

    auto base_lse = estimate_lse(data, Direction::NonIncreasing, SearchConfig{});
    auto trans_lse = estimate_lse(moved, Direction::NonIncreasing, SearchConfig{});
    CHECK((trans_lse.theta - base_lse.theta - shift).norm() <= 1e-9);
  }
}

TEST_CASE("response-affine invariance of the located point") {
  for (std::uint64_t seed : {11ULL, 12ULL}) {
    auto data = noisy_dataset(seed, 200);
    SensorDataset scaled = data;
    scaled.y = 3.0 * scaled.y.array() + 2.0;
    SearchConfig config;
    double tol_step = config.resolved(data).tol_step;

    auto base = estimate_ssce(data, Direction::NonIncreasing, config);
    auto aff = estimate_ssce(scaled, Direction::NonIncreasing, config);
    CHECK((aff.theta - base.theta).norm() <= tol_step);

    auto base_lse = estimate_lse(data, Direction::NonIncreasing, config);
    auto aff_lse = estimate_lse(scaled, Direction::NonIncreasing, config);
    CHECK((aff_lse.theta - base_lse.theta).norm() <= tol_step);
  }
}

TEST_CASE("quarter-turn equivariance on a symmetric box") {
  // exact orthogonal map that keeps the axis-aligned box and its grid:
  // R(x, y) = (-y, x), applied to sensors and box alike
  auto data = noisy_dataset(21, 200);
  double bound = std::max(std::abs(data.x.minCoeff()), std::abs(data.x.maxCoeff())) * 1.1;
  data.bounds.lower = Eigen::Vector2d(-bound, -bound);
  data.bounds.upper = Eigen::Vector2d(bound, bound);
  data.bounds.radius_bound = 2.0 * bound;

  SensorDataset rotated = data;
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    rotated.x(i, 0) = -data.x(i, 1);
    rotated.x(i, 1) = data.x(i, 0);
  }

  SearchConfig config;
  double tol_step = config.resolved(data).tol_step;
  auto base = estimate_ssce(data, Direction::NonIncreasing, config);
  auto rot = estimate_ssce(rotated, Direction::NonIncreasing, config);
  Eigen::Vector2d mapped(-base.theta[1], base.theta[0]);
  CHECK((rot.theta - mapped).norm() <= tol_step);
}

TEST_CASE("a monitoring box that excludes the target has no zero crossing") {
  // good radial data around the origin, but the box only covers [2,3]^2:
  // the score field keeps its sign over the whole box
  auto data = noisy_dataset(31415, 200);
  data.bounds.lower = Eigen::Vector2d(2.0, 2.0);
  data.bounds.upper = Eigen::Vector2d(3.0, 3.0);
  CHECK_THROWS_AS(estimate_ssce(data, Direction::NonIncreasing, SearchConfig{}), NoCrossing);
}

TEST_CASE("smoothing kernel is a normalized C^2 bump on [0,1]") {
  CHECK(smoothing_kernel(-0.1) == 0.0);
  CHECK(smoothing_kernel(1.1) == 0.0);
  CHECK(smoothing_kernel(0.5) == doctest::Approx(140.0 * std::pow(0.25, 3)));
  // midpoint-rule integral close to 1
  double integral = 0.0;
  const int steps = 20000;
  for (int i = 0; i < steps; ++i) {
    double u = (i + 0.5) / steps;
    integral += smoothing_kernel(u) / steps;
  }
  CHECK(integral == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("smoothed derivative of a single jump is one kernel term") {
  MonotoneStepFunction f;
  f.knots = {1.0, 2.0};
  f.values = {4.0, 1.0};  // single jump of -3 at t = 2
  f.direction = Direction::NonIncreasing;
  f.domain_upper = 10.0;
  double h = 0.5;
  for (double u : {2.05, 2.2, 2.4, 2.45}) {
    double expected = smoothing_kernel((u - 2.0) / h) * (-3.0) / h;
    CHECK(smoothed_step_derivative(f, u, h) == doctest::Approx(expected).epsilon(1e-12));
  }
  CHECK(smoothed_step_derivative(f, 3.0, h) == 0.0);  // outside the window
}

TEST_CASE("smoothed-score objective matches a reference double loop") {
  auto data = noisy_dataset(8080, 40);
  double h = default_smoothing_bandwidth(data);
  REQUIRE(h > 0.0);
  auto est = estimate_smoothed_score(data, Direction::NonIncreasing, h, SearchConfig{});

  auto eval = profile_fit(data, est.theta, Direction::NonIncreasing);
  Eigen::Vector2d acc = Eigen::Vector2d::Zero();
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    double u = (data.x.row(i).transpose() - est.theta).squaredNorm();
    double deriv = 0.0;
    for (auto [t, delta] : eval.eta.jumps()) deriv += smoothing_kernel((u - t) / h) * delta / h;
    acc += eval.residuals[i] * deriv * data.x.row(i).transpose();
  }
  acc /= static_cast<double>(data.n());
  CHECK(est.objective_at_solution == doctest::Approx(acc.norm()).epsilon(1e-9));
}

TEST_CASE("smoothed score flags a constant fit as non-converged") {
  Rng rng(515);
  Eigen::MatrixXd x(30, 2);
  Eigen::VectorXd y = Eigen::VectorXd::Constant(30, 2.0);
  for (int i = 0; i < 30; ++i) {
    x(i, 0) = rng.uniform(-3.0, 3.0);
    x(i, 1) = rng.uniform(-3.0, 3.0);
  }
  auto data = SensorDataset::with_default_box(x, y);
  auto est = estimate_smoothed_score(data, Direction::NonIncreasing, 1.0, SearchConfig{});
  CHECK_FALSE(est.converged);
  CHECK(est.eta.jumps().empty());
}

TEST_CASE("invalid bandwidth is rejected") {
  auto data = noisy_dataset(1, 10);
  CHECK_THROWS_AS(estimate_smoothed_score(data, Direction::NonIncreasing, 0.0, SearchConfig{}),
                  InvalidBandwidth);
}

TEST_CASE("estimators reject an empty dataset") {
  SensorDataset empty;
  empty.x.resize(0, 2);
  empty.y.resize(0);
  empty.bounds.lower = Eigen::Vector2d(-1, -1);
  empty.bounds.upper = Eigen::Vector2d(1, 1);
  empty.bounds.radius_bound = 2.0;
  CHECK_THROWS_AS(estimate_ssce(empty, Direction::NonIncreasing, SearchConfig{}), EmptyInput);
  CHECK_THROWS_AS(estimate_lse(empty, Direction::NonIncreasing, SearchConfig{}), EmptyInput);
}

TEST_CASE("consistency smoke: error shrinks from n=150 to n=1500") {
  std::vector<double> small_err, large_err;
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    auto small = noisy_dataset(mix64(900, seed), 150);
    auto large = noisy_dataset(mix64(901, seed), 1500);
    small_err.push_back(
        estimate_ssce(small, Direction::NonIncreasing, SearchConfig{}).theta.norm());
    large_err.push_back(
        estimate_ssce(large, Direction::NonIncreasing, SearchConfig{}).theta.norm());
  }
  std::sort(small_err.begin(), small_err.end());
  std::sort(large_err.begin(), large_err.end());
  CHECK(large_err[large_err.size() / 2] < small_err[small_err.size() / 2]);
}
