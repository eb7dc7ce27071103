#include "monoloc/frames.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "monoloc/errors.hpp"
#include "monoloc/parallel.hpp"

namespace monoloc {

void FrameStack::check_aligned() const {
  if (frames.empty()) throw EmptyInput("FrameStack: no frames");
  for (const auto& f : frames)
    if (f.rows() != frames.front().rows() || f.cols() != frames.front().cols())
      throw ShapeMismatch("FrameStack: frames differ in size");
}

Eigen::MatrixXd estimate_background(const FrameStack& empty_frames) {
  empty_frames.check_aligned();
  Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(empty_frames.frames.front().rows(),
                                               empty_frames.frames.front().cols());
  for (const auto& f : empty_frames.frames) mean += f;
  return mean / static_cast<double>(empty_frames.frames.size());
}

SensorDataset center_frame(const Eigen::MatrixXd& frame, const Eigen::MatrixXd& background) {
  if (frame.rows() != background.rows() || frame.cols() != background.cols())
    throw ShapeMismatch("center_frame: frame/background size mismatch");
  const Eigen::Index h = frame.rows();
  const Eigen::Index w = frame.cols();
  SensorDataset data;
  data.x.resize(h * w, 2);
  data.y.resize(h * w);
  Eigen::Index i = 0;
  for (Eigen::Index r = 0; r < h; ++r) {
    for (Eigen::Index c = 0; c < w; ++c, ++i) {
      data.x(i, 0) = static_cast<double>(c) + 0.5;
      data.x(i, 1) = static_cast<double>(r) + 0.5;
      data.y[i] = frame(r, c) - background(r, c);
    }
  }
  data.bounds.lower = Eigen::Vector2d(0.0, 0.0);
  data.bounds.upper = Eigen::Vector2d(static_cast<double>(w), static_cast<double>(h));
  data.bounds.radius_bound = data.bounds.upper.norm();
  return data;
}

SensorDataset subsample_grid(const SensorDataset& data, int k, std::uint64_t seed) {
  const Eigen::Index n = data.n();
  const auto want = static_cast<Eigen::Index>(k) * k;
  if (want > n) throw TooFewPixels("subsample_grid: k^2 exceeds the pixel count");
  std::vector<Eigen::Index> pool(static_cast<std::size_t>(n));
  std::iota(pool.begin(), pool.end(), Eigen::Index{0});
  Rng rng(seed);
  // partial Fisher-Yates: slot i swaps with a uniform index in [i, n)
  for (Eigen::Index i = 0; i < want; ++i) {
    auto j = i + static_cast<Eigen::Index>(
                     rng.uniform_index(static_cast<std::size_t>(n - i)));
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
  }
  SensorDataset out;
  out.bounds = data.bounds;
  out.x.resize(want, data.x.cols());
  out.y.resize(want);
  for (Eigen::Index i = 0; i < want; ++i) {
    out.x.row(i) = data.x.row(pool[static_cast<std::size_t>(i)]);
    out.y[i] = data.y[pool[static_cast<std::size_t>(i)]];
  }
  return out;
}

PipelineReport locate_in_frame(const FrameStack& targets,
                               const std::vector<FrameStack>& backgrounds,
                               const FramePipelineConfig& config) {
  targets.check_aligned();
  if (backgrounds.size() != targets.frames.size())
    throw ShapeMismatch("locate_in_frame: one background stack per channel required");

  PipelineReport report;
  report.seed = config.seed;
  report.subsample = config.grid_k * config.grid_k;
  report.background_frames = static_cast<int>(backgrounds.front().frames.size());
  report.channels.resize(targets.frames.size());

  parallel_for(targets.frames.size(), [&](std::size_t ch) {
    ChannelReport& out = report.channels[ch];
    out.label = ch < targets.labels.size() ? targets.labels[ch] : "channel" + std::to_string(ch);
    try {
      Eigen::MatrixXd background = estimate_background(backgrounds[ch]);
      SensorDataset full = center_frame(targets.frames[ch], background);
      SensorDataset data = subsample_grid(full, config.grid_k, mix64(config.seed, ch));

      SearchConfig search = config.search;
      search.seed = mix64(config.seed, 0x500 + ch);
      LocationEstimate dec = estimate_ssce(data, Direction::NonIncreasing, search);
      LocationEstimate inc = estimate_ssce(data, Direction::NonDecreasing, search);
      out.sse_nonincreasing = dec.sse;
      out.sse_nondecreasing = inc.sse;
      bool pick_dec = dec.sse <= inc.sse;
      out.estimate = pick_dec ? dec : inc;
      out.direction = out.estimate.direction;

      EstimatorSpec spec;
      spec.method = Method::SSCE;
      spec.direction = out.direction;
      spec.config = search;
      int m = static_cast<int>(std::floor(
          std::pow(static_cast<double>(data.n()), config.m_exponent)));
      out.bootstrap = bootstrap_m_of_n(data, spec, m, config.bootstrap_B,
                                       mix64(config.seed, 0x900 + ch), config.levels);

      if (config.score_field) {
        out.score_locations = data.x;
        out.score_norms.resize(data.n());
        for (Eigen::Index i = 0; i < data.n(); ++i) {
          Eigen::VectorXd theta = data.x.row(i).transpose();
          out.score_norms[i] = profile_fit(data, theta, out.direction).score.norm();
        }
      }
      out.ok = out.estimate.converged;
      if (!out.ok) out.error = "estimate did not certify a zero crossing";
    } catch (const std::exception& err) {
      out.ok = false;
      out.error = err.what();
    }
  });

  report.all_converged =
      std::all_of(report.channels.begin(), report.channels.end(),
                  [](const ChannelReport& c) { return c.ok; });
  return report;
}

Eigen::MatrixXd read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_pgm: cannot open " + path);
  std::string magic;
  in >> magic;
  if (magic != "P5") throw std::runtime_error("read_pgm: not a binary PGM (P5): " + path);
  auto next_int = [&in, &path]() {
    // skip whitespace and '#' comment lines
    for (;;) {
      int c = in.peek();
      if (c == '#') {
        std::string line;
        std::getline(in, line);
      } else if (c != EOF && std::isspace(c)) {
        in.get();
      } else {
        break;
      }
    }
    long v = 0;
    in >> v;
    if (!in) throw std::runtime_error("read_pgm: malformed header in " + path);
    return v;
  };
  long w = next_int();
  long h = next_int();
  long maxval = next_int();
  if (maxval <= 0 || maxval > 255)
    throw std::runtime_error("read_pgm: only 8-bit PGM supported: " + path);
  in.get();  // single whitespace after maxval
  std::vector<unsigned char> buf(static_cast<std::size_t>(w) * static_cast<std::size_t>(h));
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!in) throw std::runtime_error("read_pgm: truncated pixel data in " + path);
  Eigen::MatrixXd img(h, w);
  for (long r = 0; r < h; ++r)
    for (long c = 0; c < w; ++c)
      img(r, c) = static_cast<double>(buf[static_cast<std::size_t>(r * w + c)]);
  return img;
}

void write_pgm(const std::string& path, const Eigen::MatrixXd& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_pgm: cannot open " + path);
  out << "P5\n" << image.cols() << " " << image.rows() << "\n255\n";
  for (Eigen::Index r = 0; r < image.rows(); ++r) {
    for (Eigen::Index c = 0; c < image.cols(); ++c) {
      double v = std::clamp(std::round(image(r, c)), 0.0, 255.0);
      out.put(static_cast<char>(static_cast<unsigned char>(v)));
    }
  }
  if (!out) throw std::runtime_error("write_pgm: write failed for " + path);
}

Eigen::MatrixXd read_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_matrix_csv: cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (!rows.empty() && row.size() != rows.front().size())
      throw std::runtime_error("read_matrix_csv: ragged rows in " + path);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw EmptyInput("read_matrix_csv: no data in " + path);
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  return m;
}

void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_matrix_csv: cannot open " + path);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) out << ',';
      out << m(r, c);
    }
    out << '\n';
  }
}

}  // namespace monoloc
