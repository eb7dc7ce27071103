#include "monoloc/isotonic.hpp"

#include <algorithm>
#include <numeric>

#include "monoloc/errors.hpp"

namespace monoloc {

double MonotoneStepFunction::operator()(double t) const {
  // First knot > t; the block owning t starts at the previous knot.
  auto it = std::upper_bound(knots.begin(), knots.end(), t);
  if (it == knots.begin()) return values.front();
  return values[static_cast<std::size_t>(it - knots.begin()) - 1];
}

std::vector<std::pair<double, double>> MonotoneStepFunction::jumps() const {
  std::vector<std::pair<double, double>> out;
  for (std::size_t j = 1; j < knots.size(); ++j) {
    double delta = values[j] - values[j - 1];
    if (delta != 0.0) out.emplace_back(knots[j], delta);
  }
  return out;
}

double evaluate(const MonotoneStepFunction& f, double t) { return f(t); }

WeightedSeries merge_ties(const std::vector<double>& positions,
                          const std::vector<double>& responses) {
  if (positions.empty()) throw EmptyInput("merge_ties: empty input");
  if (positions.size() != responses.size())
    throw ShapeMismatch("merge_ties: positions/responses length mismatch");

  std::vector<std::size_t> order(positions.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (positions[a] != positions[b]) return positions[a] < positions[b];
    return a < b;
  });

  WeightedSeries out;
  out.positions.reserve(positions.size());
  out.responses.reserve(positions.size());
  out.weights.reserve(positions.size());
  std::size_t i = 0;
  while (i < order.size()) {
    double pos = positions[order[i]];
    double sum = 0.0;
    std::size_t count = 0;
    while (i < order.size() && positions[order[i]] == pos) {
      sum += responses[order[i]];
      ++count;
      ++i;
    }
    out.positions.push_back(pos);
    out.responses.push_back(sum / static_cast<double>(count));
    out.weights.push_back(static_cast<double>(count));
  }
  return out;
}

namespace detail {

// Blocks with equal means are merged, keeping the knot representation minimal.
void pava_blocks_non_decreasing(const std::vector<double>& responses,
                                const std::vector<double>& weights,
                                std::vector<PavaBlock>& blocks) {
  blocks.clear();
  for (std::size_t i = 0; i < responses.size(); ++i) {
    blocks.push_back({responses[i], weights[i], 1});
    while (blocks.size() >= 2) {
      PavaBlock& prev = blocks[blocks.size() - 2];
      PavaBlock& last = blocks.back();
      if (prev.mean < last.mean) break;
      prev.mean = (prev.mean * prev.weight + last.mean * last.weight) /
                  (prev.weight + last.weight);
      prev.weight += last.weight;
      prev.count += last.count;
      blocks.pop_back();
    }
  }
}

}  // namespace detail

std::vector<double> pava_fitted(const WeightedSeries& series, Direction direction) {
  if (series.size() == 0) throw EmptyInput("pava: empty series");
  std::vector<double> responses = series.responses;
  if (direction == Direction::NonIncreasing)
    for (double& r : responses) r = -r;

  std::vector<detail::PavaBlock> blocks;
  blocks.reserve(series.size());
  detail::pava_blocks_non_decreasing(responses, series.weights, blocks);

  std::vector<double> fitted;
  fitted.reserve(series.size());
  for (const detail::PavaBlock& b : blocks) {
    double v = direction == Direction::NonIncreasing ? -b.mean : b.mean;
    for (std::size_t k = 0; k < b.count; ++k) fitted.push_back(v);
  }
  return fitted;
}

MonotoneStepFunction pava(const WeightedSeries& series, Direction direction,
                          double domain_upper) {
  std::vector<double> fitted = pava_fitted(series, direction);
  MonotoneStepFunction f;
  f.direction = direction;
  f.domain_upper = domain_upper > 0.0 ? domain_upper : series.positions.back();
  f.knots = series.positions;
  f.values = std::move(fitted);
  return f;
}

}  // namespace monoloc
