#pragma once

#include <stdexcept>
#include <string>

namespace monoloc {

struct EmptyInput : std::invalid_argument {
  explicit EmptyInput(const std::string& what) : std::invalid_argument(what) {}
};

struct ShapeMismatch : std::invalid_argument {
  explicit ShapeMismatch(const std::string& what) : std::invalid_argument(what) {}
};

struct InvalidBandwidth : std::invalid_argument {
  explicit InvalidBandwidth(const std::string& what) : std::invalid_argument(what) {}
};

struct TooFewPixels : std::invalid_argument {
  explicit TooFewPixels(const std::string& what) : std::invalid_argument(what) {}
};

/// The score field has no certified zero crossing and its minimum stays far
/// above tolerance on every start; typically flat or degenerate data.
struct NoCrossing : std::runtime_error {
  explicit NoCrossing(const std::string& what) : std::runtime_error(what) {}
};

/// More than 10% of bootstrap replicates failed to converge.
struct ResampleFailure : std::runtime_error {
  explicit ResampleFailure(const std::string& what) : std::runtime_error(what) {}
};

/// Estimated score derivative matrix is numerically singular.
struct SingularA : std::runtime_error {
  explicit SingularA(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace monoloc
