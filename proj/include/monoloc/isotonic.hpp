#pragma once

#include <cstddef>
#include <vector>

namespace monoloc {

enum class Direction { NonIncreasing, NonDecreasing };

/// Right-continuous piecewise-constant monotone function.  The function is
/// constant on [knots[j], knots[j+1]) with value values[j]; below the first
/// knot it takes values[0] and at or above the last knot it takes the last
/// value, so evaluation is total on [0, inf).
struct MonotoneStepFunction {
  std::vector<double> knots;   // strictly increasing abscissae (distance^2)
  std::vector<double> values;  // same length, ordered per direction
  Direction direction = Direction::NonIncreasing;
  double domain_upper = 0.0;   // 4T^2 bound of the nominal domain

  double operator()(double t) const;

  /// Jump locations and signed sizes: jump j sits at knots[j+1] with size
  /// values[j+1] - values[j] (the measure of the right-continuous step).
  std::vector<std::pair<double, double>> jumps() const;
};

double evaluate(const MonotoneStepFunction& f, double t);

/// Positions with tied abscissae collapsed; weights are tie counts.
struct WeightedSeries {
  std::vector<double> positions;  // strictly increasing
  std::vector<double> responses;
  std::vector<double> weights;    // > 0

  std::size_t size() const { return positions.size(); }
};

/// Collapses equal positions into single weighted points (response = mean of
/// the tied group, weight = tie count).  Input need not be sorted.
WeightedSeries merge_ties(const std::vector<double>& positions,
                          const std::vector<double>& responses);

/// Weighted least-squares projection of the responses onto the monotone cone
/// of the given direction (pool adjacent violators).  Fitted values are
/// constant on each pooled block and equal to the weighted block mean;
/// blocks with exactly equal means are merged so the knot representation is
/// minimal.
MonotoneStepFunction pava(const WeightedSeries& series, Direction direction,
                          double domain_upper = 0.0);

/// PAVA fitted value for every input point (block means expanded back to the
/// per-point vector), in the order of `series`.
std::vector<double> pava_fitted(const WeightedSeries& series, Direction direction);

namespace detail {

struct PavaBlock {
  double mean;
  double weight;
  std::size_t count;  // merged input points
};

/// Stack PAVA for the non-decreasing cone, appending into `blocks` (cleared
/// first).  The non-increasing problem is this on negated responses.
void pava_blocks_non_decreasing(const std::vector<double>& responses,
                                const std::vector<double>& weights,
                                std::vector<PavaBlock>& blocks);

}  // namespace detail

}  // namespace monoloc
