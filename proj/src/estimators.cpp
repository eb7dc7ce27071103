#include "monoloc/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "monoloc/errors.hpp"
#include "monoloc/rng.hpp"

namespace monoloc {

SearchConfig SearchConfig::resolved(const SensorDataset& data) const {
  SearchConfig c = *this;
  const auto n = static_cast<double>(data.n());
  if (c.max_evals <= 0) c.max_evals = 5000 * data.d();
  if (c.tol_objective <= 0.0) {
    double sd = n > 1 ? std::sqrt((data.y.array() - data.y.mean()).square().sum() / (n - 1.0)) : 0.0;
    double mean_abs_x = data.x.rowwise().norm().mean();
    c.tol_objective = 1e-6 * sd * mean_abs_x;
    if (c.tol_objective <= 0.0) c.tol_objective = 1e-12;
  }
  if (c.tol_step <= 0.0) c.tol_step = 1e-4 * data.bounds.diameter();
  return c;
}

namespace {

using Objective = std::function<double(const Eigen::VectorXd&)>;

// The profiled objectives are piecewise constant, and values of one ranking
// cell computed under affine response maps agree only to rounding.  All
// search decisions therefore compare with a relative tie band so that
// transformed reruns take identical branches.
constexpr double kRelTie = 1e-9;

bool approx_equal(double a, double b) {
  return std::abs(a - b) <= kRelTie * std::max(std::abs(a), std::abs(b));
}

bool value_less(double a, double b) { return a < b && !approx_equal(a, b); }

bool lex_less(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  for (Eigen::Index j = 0; j < a.size(); ++j) {
    if (a[j] < b[j]) return true;
    if (a[j] > b[j]) return false;
  }
  return false;
}

// Deterministic reduction of equal-value candidates.  With a tie center
// (the box midpoint) the key is rotation/translation covariant; without one
// it is the spec'd lexicographic order used by the LSE.
struct BestPoint {
  double value = std::numeric_limits<double>::infinity();
  Eigen::VectorXd theta;
  Eigen::VectorXd tie_center;

  bool tie_prefers(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
    if (tie_center.size() > 0) {
      double ra = (a - tie_center).squaredNorm();
      double rb = (b - tie_center).squaredNorm();
      if (ra != rb) return ra < rb;
    }
    return lex_less(a, b);
  }

  // true iff v strictly improved the incumbent value
  bool offer(double v, const Eigen::VectorXd& t) {
    if (theta.size() == 0 || value_less(v, value)) {
      value = v;
      theta = t;
      return true;
    }
    if (approx_equal(v, value) && tie_prefers(t, theta)) {
      value = std::min(value, v);
      theta = t;
    }
    return false;
  }
};

std::vector<Eigen::VectorXd> box_grid(const ParameterBox& box, int per_dim) {
  const int d = box.dim();
  std::vector<Eigen::VectorXd> points;
  std::vector<int> idx(static_cast<std::size_t>(d), 0);
  Eigen::VectorXd step(d);
  for (int j = 0; j < d; ++j)
    step[j] = per_dim > 1 ? (box.upper[j] - box.lower[j]) / (per_dim - 1) : 0.0;
  for (;;) {
    Eigen::VectorXd p(d);
    for (int j = 0; j < d; ++j) p[j] = box.lower[j] + idx[static_cast<std::size_t>(j)] * step[j];
    points.push_back(std::move(p));
    int j = 0;
    while (j < d && ++idx[static_cast<std::size_t>(j)] == per_dim) {
      idx[static_cast<std::size_t>(j)] = 0;
      ++j;
    }
    if (j == d) break;
  }
  return points;
}

struct CountedObjective {
  Objective fn;
  long evals = 0;
  long budget = 0;

  bool exhausted() const { return evals >= budget; }
  double operator()(const Eigen::VectorXd& p) {
    ++evals;
    return fn(p);
  }
};

// Nelder-Mead on the clamped box.  Vertex ordering and accept decisions use
// the tie-banded comparisons; ties order by the covariant key.
BestPoint nelder_mead(CountedObjective& obj, const ParameterBox& box,
                      const Eigen::VectorXd& start, double init_step, double tol_step) {
  const int d = box.dim();
  const Eigen::VectorXd tie_center = 0.5 * (box.lower + box.upper);
  struct Vertex {
    Eigen::VectorXd x;
    double f;
  };
  std::vector<Vertex> simplex;
  simplex.reserve(static_cast<std::size_t>(d) + 1);
  simplex.push_back({start, obj(start)});
  if (d == 2) {
    // orient the initial simplex toward the box center so the construction
    // commutes with the box's rotations (SO(2) is abelian)
    Eigen::VectorXd u = tie_center - start;
    if (u.norm() < 1e-12) u = Eigen::Vector2d(1.0, 0.0);
    u.normalize();
    Eigen::Vector2d v(-u[1], u[0]);
    for (const Eigen::VectorXd& dir : {u, Eigen::VectorXd(v)}) {
      Eigen::VectorXd p = box.clamp(start + init_step * dir);
      simplex.push_back({p, obj(p)});
    }
  } else {
    for (int j = 0; j < d; ++j) {
      Eigen::VectorXd p = start;
      p[j] += init_step;
      if (p[j] > box.upper[j]) p[j] = start[j] - init_step;
      p = box.clamp(p);
      simplex.push_back({p, obj(p)});
    }
  }

  auto vertex_less = [&](const Vertex& a, const Vertex& b) {
    if (value_less(a.f, b.f)) return true;
    if (value_less(b.f, a.f)) return false;
    if ((a.x - tie_center).squaredNorm() != (b.x - tie_center).squaredNorm())
      return (a.x - tie_center).squaredNorm() < (b.x - tie_center).squaredNorm();
    return lex_less(a.x, b.x);
  };
  // insertion sort: the comparator's tie band is not a strict weak ordering,
  // so keep the sort primitive and local
  auto order = [&]() {
    for (std::size_t i = 1; i < simplex.size(); ++i) {
      Vertex v = simplex[i];
      std::size_t j = i;
      while (j > 0 && vertex_less(v, simplex[j - 1])) {
        simplex[j] = simplex[j - 1];
        --j;
      }
      simplex[j] = v;
    }
  };
  order();

  BestPoint best;
  best.tie_center = tie_center;
  best.offer(simplex.front().f, simplex.front().x);

  while (!obj.exhausted()) {
    double spread = 0.0;
    for (int j = 1; j <= d; ++j)
      spread = std::max(spread, (simplex[static_cast<std::size_t>(j)].x - simplex[0].x)
                                    .cwiseAbs()
                                    .maxCoeff());
    if (spread < tol_step) break;
    if (approx_equal(simplex.back().f, simplex.front().f)) break;  // flat plateau

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(d);
    for (int j = 0; j < d; ++j) centroid += simplex[static_cast<std::size_t>(j)].x;
    centroid /= static_cast<double>(d);
    const Vertex worst = simplex.back();

    Eigen::VectorXd xr = box.clamp(centroid + (centroid - worst.x));
    double fr = obj(xr);
    best.offer(fr, xr);

    if (value_less(fr, simplex.front().f)) {
      Eigen::VectorXd xe = box.clamp(centroid + 2.0 * (xr - centroid));
      double fe = obj(xe);
      best.offer(fe, xe);
      simplex.back() = value_less(fe, fr) ? Vertex{xe, fe} : Vertex{xr, fr};
    } else if (value_less(fr, simplex[static_cast<std::size_t>(d - 1)].f)) {
      simplex.back() = {xr, fr};
    } else {
      Eigen::VectorXd xc = value_less(fr, worst.f)
                               ? box.clamp(centroid + 0.5 * (xr - centroid))
                               : box.clamp(centroid - 0.5 * (centroid - worst.x));
      double fc = obj(xc);
      best.offer(fc, xc);
      if (value_less(fc, std::min(fr, worst.f))) {
        simplex.back() = {xc, fc};
      } else {
        for (int j = 1; j <= d; ++j) {
          auto& v = simplex[static_cast<std::size_t>(j)];
          v.x = box.clamp(simplex[0].x + 0.5 * (v.x - simplex[0].x));
          v.f = obj(v.x);
          best.offer(v.f, v.x);
          if (obj.exhausted()) break;
        }
      }
    }
    order();
  }
  return best;
}

// Rotating-direction pattern descent: each radius level evaluates a full
// direction fan around a snapshot of the incumbent, then moves once.  The
// 45-degree fan maps onto itself under quarter turns, which keeps the walk
// covariant on symmetric boxes.  Radius halves down to `floor_radius`, well
// below the reporting tolerance, so minima hiding in tiny ranking cells are
// found.
void pattern_polish(CountedObjective& obj, const ParameterBox& box, BestPoint& best,
                    double radius0, double floor_radius) {
  const int d = box.dim();
  int sweep = 0;
  for (double radius = radius0; radius >= floor_radius && !obj.exhausted(); radius *= 0.5) {
    // finer fan once the radius drops near typical ranking-cell scales
    const int fan = std::max(radius < 0.1 * radius0 ? 16 : 8, 4 * d);
    bool improved = true;
    while (improved && !obj.exhausted()) {
      improved = false;
      const Eigen::VectorXd center = best.theta;
      BestPoint round;
      round.tie_center = best.tie_center;
      for (int j = 0; j < fan; ++j) {
        Eigen::VectorXd dir(d);
        if (d == 2) {
          double phi = 2.0 * M_PI * (static_cast<double>(j) / fan + 0.38196601125 * sweep);
          dir << std::cos(phi), std::sin(phi);
        } else {
          Rng rng(mix64(0x706F6C697368ULL + static_cast<std::uint64_t>(sweep),
                        static_cast<std::uint64_t>(j)));
          for (int k = 0; k < d; ++k) dir[k] = rng.normal();
          dir.normalize();
        }
        Eigen::VectorXd p = box.clamp(center + radius * dir);
        round.offer(obj(p), p);
      }
      ++sweep;
      if (round.theta.size() > 0 && value_less(round.value, best.value)) {
        best.offer(round.value, round.theta);
        improved = true;
      }
    }
  }
}

std::vector<Eigen::VectorXd> top_seeds(const std::vector<Eigen::VectorXd>& grid,
                                       const std::vector<double>& values,
                                       const Eigen::VectorXd& tie_center, int count) {
  std::vector<std::size_t> order(grid.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (values[a] != values[b]) return values[a] < values[b];
    double ra = (grid[a] - tie_center).squaredNorm();
    double rb = (grid[b] - tie_center).squaredNorm();
    if (ra != rb) return ra < rb;
    return lex_less(grid[a], grid[b]);
  });
  std::vector<Eigen::VectorXd> seeds;
  for (std::size_t i = 0; i < order.size() && seeds.size() < static_cast<std::size_t>(count); ++i)
    seeds.push_back(grid[order[i]]);
  return seeds;
}

// Componentwise sign change of the score field within a tol_step ball:
// samples the center and the 2d axis neighbors and requires min*max <= 0
// for every component.
bool certify_crossing(const SensorDataset& data, Direction direction,
                      const Eigen::VectorXd& theta, double radius, long& evals) {
  const int d = data.d();
  Eigen::MatrixXd samples(2 * d + 1, d);
  std::vector<Eigen::VectorXd> points;
  points.push_back(theta);
  for (int j = 0; j < d; ++j) {
    Eigen::VectorXd plus = theta, minus = theta;
    plus[j] += radius;
    minus[j] -= radius;
    points.push_back(data.bounds.clamp(plus));
    points.push_back(data.bounds.clamp(minus));
  }
  for (std::size_t k = 0; k < points.size(); ++k) {
    samples.row(static_cast<Eigen::Index>(k)) =
        profile_fit(data, points[k], direction).score.transpose();
    ++evals;
  }
  for (int j = 0; j < d; ++j) {
    double lo = samples.col(j).minCoeff();
    double hi = samples.col(j).maxCoeff();
    if (lo * hi > 0.0) return false;
  }
  return true;
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

LocationEstimate run_norm_minimizer(const SensorDataset& data, Direction direction,
                                    const SearchConfig& raw, Method method,
                                    const Objective& norm2) {
  if (data.n() == 0) throw EmptyInput("estimate: empty dataset");
  const SearchConfig config = raw.resolved(data);
  const ParameterBox& box = data.bounds;

  CountedObjective obj{norm2, 0, config.max_evals};

  std::vector<Eigen::VectorXd> grid = box_grid(box, config.grid_points_per_dim);
  std::vector<double> grid_values(grid.size());
  BestPoint best;
  best.tie_center = 0.5 * (box.lower + box.upper);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    grid_values[i] = obj(grid[i]);
    best.offer(grid_values[i], grid[i]);
  }
  double grid_median_norm = std::sqrt(median_of(grid_values));

  double init_step = 0.5 * (box.upper - box.lower).maxCoeff() /
                     std::max(1, config.grid_points_per_dim - 1);
  for (const Eigen::VectorXd& seed :
       top_seeds(grid, grid_values, best.tie_center, config.multistarts)) {
    if (obj.exhausted()) break;
    BestPoint local = nelder_mead(obj, box, seed, init_step, config.tol_step);
    best.offer(local.value, local.theta);
  }
  // descend through the final ranking cells well below the reporting tolerance
  pattern_polish(obj, box, best, 4.0 * config.tol_step, 1e-3 * config.tol_step);

  LocationEstimate est;
  est.method = method;
  est.direction = direction;
  est.theta = best.theta;
  est.objective_at_solution = std::sqrt(best.value);
  ProfileEvaluation at_solution = profile_fit(data, best.theta, direction);
  est.eta = at_solution.eta;
  est.sse = at_solution.sse;

  bool small = est.objective_at_solution <= config.tol_objective;
  bool certified = false;
  if (method == Method::SSCE && !small)
    certified = certify_crossing(data, direction, best.theta, config.tol_step, obj.evals);
  est.evaluations = obj.evals;
  est.converged = small || certified;

  if (method == Method::SSCE && !est.converged &&
      est.objective_at_solution > 10.0 * config.tol_objective &&
      est.objective_at_solution > 0.25 * grid_median_norm) {
    throw NoCrossing("estimate_ssce: no zero crossing; score norm stays near " +
                     std::to_string(est.objective_at_solution) + " across the box");
  }
  return est;
}

}  // namespace

LocationEstimate estimate_ssce(const SensorDataset& data, Direction direction,
                               const SearchConfig& config) {
  auto norm2 = [&](const Eigen::VectorXd& theta) {
    return profile_fit(data, theta, direction).score.squaredNorm();
  };
  return run_norm_minimizer(data, direction, config, Method::SSCE, norm2);
}

LocationEstimate estimate_lse(const SensorDataset& data, Direction direction,
                              const SearchConfig& raw) {
  if (data.n() == 0) throw EmptyInput("estimate_lse: empty dataset");
  const SearchConfig config = raw.resolved(data);
  const ParameterBox& box = data.bounds;
  const int d = box.dim();

  long evals = 0;
  auto sse_at = [&](const Eigen::VectorXd& theta) {
    ++evals;
    return profile_fit(data, theta, direction).sse;
  };

  std::vector<Eigen::VectorXd> grid = box_grid(box, config.grid_points_per_dim);
  std::vector<double> grid_values(grid.size());
  BestPoint best;  // no tie center: lexicographic smallest among equal SSE
  for (std::size_t i = 0; i < grid.size(); ++i) {
    grid_values[i] = sse_at(grid[i]);
    best.offer(grid_values[i], grid[i]);
  }

  Eigen::VectorXd base_step = (box.upper - box.lower) /
                              std::max(1, config.grid_points_per_dim - 1);
  const Eigen::VectorXd tie_center = 0.5 * (box.lower + box.upper);
  for (const Eigen::VectorXd& seed :
       top_seeds(grid, grid_values, tie_center, config.multistarts)) {
    Eigen::VectorXd center = seed;
    double center_value = profile_fit(data, center, direction).sse;
    double shrink = 1.0;
    while (shrink * base_step.maxCoeff() >= 1e-3 * config.tol_step &&
           evals < config.max_evals) {
      std::uint64_t center_hash = ordering_hash(data, center);
      BestPoint poll;
      bool cell_changed = false;
      for (int j = 0; j < d && evals < config.max_evals; ++j) {
        for (double dir : {1.0, -1.0}) {
          Eigen::VectorXd p = center;
          p[j] += dir * shrink * base_step[j];
          p = box.clamp(p);
          double v = sse_at(p);
          best.offer(v, p);
          poll.offer(v, p);
          if (ordering_hash(data, p) != center_hash) cell_changed = true;
        }
      }
      if (poll.theta.size() > 0 && value_less(poll.value, center_value)) {
        center = poll.theta;
        center_value = poll.value;
      } else {
        if (!cell_changed) break;  // ranking cell stopped changing
        shrink *= 0.5;
      }
    }
  }
  {
    CountedObjective polish_obj{
        [&](const Eigen::VectorXd& p) { return profile_fit(data, p, direction).sse; }, evals,
        config.max_evals};
    pattern_polish(polish_obj, box, best, 4.0 * config.tol_step, 1e-3 * config.tol_step);
    evals = polish_obj.evals;
  }

  LocationEstimate est;
  est.method = Method::LSE;
  est.direction = direction;
  est.theta = best.theta;
  ProfileEvaluation at_solution = profile_fit(data, best.theta, direction);
  est.eta = at_solution.eta;
  est.sse = at_solution.sse;
  est.objective_at_solution = at_solution.sse;
  est.evaluations = evals;
  est.converged = true;  // the profiled SSE minimum always exists
  return est;
}

double smoothing_kernel(double u) {
  if (u <= 0.0 || u >= 1.0) return 0.0;
  double v = u * (1.0 - u);
  return 140.0 * v * v * v;
}

double smoothed_step_derivative(const MonotoneStepFunction& f, double u, double h) {
  if (h <= 0.0) throw InvalidBandwidth("smoothed_step_derivative: bandwidth must be > 0");
  // K((u-t)/h) is supported on t in [u-h, u]
  auto lo = std::lower_bound(f.knots.begin(), f.knots.end(), u - h);
  auto hi = std::upper_bound(f.knots.begin(), f.knots.end(), u);
  double sum = 0.0;
  for (auto it = lo; it != hi; ++it) {
    auto j = static_cast<std::size_t>(it - f.knots.begin());
    if (j == 0) continue;  // first knot carries no jump
    double delta = f.values[j] - f.values[j - 1];
    if (delta != 0.0) sum += smoothing_kernel((u - *it) / h) * delta;
  }
  return sum / h;
}

double default_smoothing_bandwidth(const SensorDataset& data) {
  Eigen::VectorXd centroid = data.x.colwise().mean();
  Eigen::VectorXd d2 = (data.x.rowwise() - centroid.transpose()).rowwise().squaredNorm();
  double range = d2.maxCoeff() - d2.minCoeff();
  return 0.5 * range * std::pow(static_cast<double>(data.n()), -1.0 / 7.0);
}

LocationEstimate estimate_smoothed_score(const SensorDataset& data, Direction direction,
                                         double bandwidth, const SearchConfig& config) {
  if (data.n() == 0) throw EmptyInput("estimate_smoothed_score: empty dataset");
  if (bandwidth <= 0.0) throw InvalidBandwidth("estimate_smoothed_score: bandwidth must be > 0");

  auto norm2 = [&](const Eigen::VectorXd& theta) {
    ProfileEvaluation eval = profile_fit(data, theta, direction);
    Eigen::VectorXd d2 = squared_distances(data, theta);
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(data.d());
    for (Eigen::Index i = 0; i < data.n(); ++i) {
      double deriv = smoothed_step_derivative(eval.eta, d2[i], bandwidth);
      acc += eval.residuals[i] * deriv * data.x.row(i).transpose();
    }
    acc /= static_cast<double>(data.n());
    return acc.squaredNorm();
  };

  LocationEstimate est =
      run_norm_minimizer(data, direction, config, Method::SmoothedScore, norm2);
  // A constant profiled fit has zero smoothed derivative everywhere and the
  // objective degenerates to zero; flag rather than report convergence.
  est.converged = !est.eta.jumps().empty();
  return est;
}

}  // namespace monoloc
