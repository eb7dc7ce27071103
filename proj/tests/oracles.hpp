// Independent brute-force oracles used by the unit and acceptance suites.
// Everything here is deliberately naive and kept separate from the library
// implementation paths it checks.
#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "monoloc/isotonic.hpp"

namespace oracles {

/// Weighted SSE of a fitted vector against (responses, weights).
inline double weighted_sse(const std::vector<double>& responses,
                           const std::vector<double>& weights,
                           const std::vector<double>& fitted) {
  double sse = 0.0;
  for (std::size_t i = 0; i < responses.size(); ++i) {
    double r = responses[i] - fitted[i];
    sse += weights[i] * r * r;
  }
  return sse;
}

/// Exhaustive weighted least-squares projection onto the monotone cone:
/// enumerates every partition of the indices into consecutive blocks (2^(k-1)
/// bitmasks), fits each block at its weighted mean, keeps the feasible
/// candidate with the smallest SSE.  Exponential; for k <= ~16 only.
inline std::vector<double> brute_force_monotone_fit(const std::vector<double>& responses,
                                                    const std::vector<double>& weights,
                                                    monoloc::Direction direction) {
  const std::size_t k = responses.size();
  std::vector<double> best;
  double best_sse = std::numeric_limits<double>::infinity();
  const std::size_t masks = k >= 1 ? (std::size_t{1} << (k - 1)) : 0;
  for (std::size_t mask = 0; mask < masks; ++mask) {
    // bit j set: a block boundary between j and j+1
    std::vector<double> fitted(k);
    bool feasible = true;
    double prev_mean = 0.0;
    bool have_prev = false;
    std::size_t start = 0;
    for (std::size_t j = 0; j <= k - 1; ++j) {
      bool boundary = j == k - 1 || (mask >> j) & 1U;
      if (!boundary) continue;
      double sw = 0.0, swy = 0.0;
      for (std::size_t i = start; i <= j; ++i) {
        sw += weights[i];
        swy += weights[i] * responses[i];
      }
      double mean = swy / sw;
      if (have_prev) {
        bool ok = direction == monoloc::Direction::NonDecreasing ? prev_mean <= mean
                                                                 : prev_mean >= mean;
        if (!ok) {
          feasible = false;
          break;
        }
      }
      for (std::size_t i = start; i <= j; ++i) fitted[i] = mean;
      prev_mean = mean;
      have_prev = true;
      start = j + 1;
    }
    if (!feasible) continue;
    double sse = weighted_sse(responses, weights, fitted);
    if (sse < best_sse) {
      best_sse = sse;
      best = fitted;
    }
  }
  return best;
}

/// Unweighted slot PAVA over a plain sequence (each slot its own point),
/// non-decreasing; used to cross-check the tie-merge equivalence when the
/// tied responses are pre-sorted adversely to the direction.
inline std::vector<double> slot_pava_non_decreasing(std::vector<double> y) {
  struct Block {
    double mean;
    double weight;
  };
  std::vector<Block> blocks;
  std::vector<std::size_t> counts;
  for (double v : y) {
    blocks.push_back({v, 1.0});
    counts.push_back(1);
    while (blocks.size() >= 2 && blocks[blocks.size() - 2].mean >= blocks.back().mean) {
      Block& a = blocks[blocks.size() - 2];
      Block& b = blocks.back();
      a.mean = (a.mean * a.weight + b.mean * b.weight) / (a.weight + b.weight);
      a.weight += b.weight;
      counts[counts.size() - 2] += counts.back();
      blocks.pop_back();
      counts.pop_back();
    }
  }
  std::vector<double> fitted;
  for (std::size_t b = 0; b < blocks.size(); ++b)
    for (std::size_t i = 0; i < counts[b]; ++i) fitted.push_back(blocks[b].mean);
  return fitted;
}

}  // namespace oracles
