#pragma once

#include <string>
#include <vector>

#include "monoloc/inference.hpp"

namespace monoloc {

/// A stack of equally-sized gray-intensity frames.
struct FrameStack {
  std::vector<Eigen::MatrixXd> frames;  // H x W each
  std::vector<std::string> labels;

  void check_aligned() const;  // throws ShapeMismatch / EmptyInput
};

/// Pixelwise mean of the empty frames.
Eigen::MatrixXd estimate_background(const FrameStack& empty_frames);

/// Full-grid dataset from a centered frame: x_i = (column+0.5, row+0.5) in
/// pixel units with origin top-left, y_i = frame - background.  The
/// monitoring box is the pixel domain [0,W] x [0,H].
SensorDataset center_frame(const Eigen::MatrixXd& frame, const Eigen::MatrixXd& background);

/// Uniform without-replacement draw of k^2 sensors, seed-deterministic.
SensorDataset subsample_grid(const SensorDataset& data, int k, std::uint64_t seed);

struct FramePipelineConfig {
  int grid_k = 100;
  std::uint64_t seed = 1;
  int bootstrap_B = 200;
  double m_exponent = 0.875;
  std::vector<double> levels = {0.90, 0.95};
  SearchConfig search;
  bool score_field = true;  // emit |n^-1 M_n(theta)| over sensor locations
};

struct ChannelReport {
  std::string label;
  bool ok = false;
  std::string error;
  Direction direction = Direction::NonIncreasing;
  LocationEstimate estimate;       // the chosen-direction SSCE
  double sse_nonincreasing = 0.0;  // profiled SSE at each direction's solution
  double sse_nondecreasing = 0.0;
  BootstrapSummary bootstrap;
  Eigen::MatrixXd score_locations;  // k^2 x 2 sensor locations
  Eigen::VectorXd score_norms;      // |n^-1 M_n| at each location
};

struct PipelineReport {
  std::vector<ChannelReport> channels;
  std::uint64_t seed = 0;
  int subsample = 0;           // sensors per channel (k^2)
  int background_frames = 0;   // per channel
  bool all_converged = false;
};

/// Per channel: estimate the background, center the target frame, subsample
/// k^2 pixels, fit the score estimator in both directions, keep the smaller
/// profiled SSE, and attach m-out-of-n ellipsoids.  Channel failures are
/// reported without aborting the other channels.
PipelineReport locate_in_frame(const FrameStack& targets,
                               const std::vector<FrameStack>& backgrounds,
                               const FramePipelineConfig& config);

/// Binary PGM (P5, 8-bit) and plain CSV matrix I/O.
Eigen::MatrixXd read_pgm(const std::string& path);
void write_pgm(const std::string& path, const Eigen::MatrixXd& image);
Eigen::MatrixXd read_matrix_csv(const std::string& path);
void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m);

}  // namespace monoloc
