#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace swdgp {

/// Hyperparameters of the squared-exponential kernel
///   k(x, x') = signal_variance * prod_i exp(-(x_i - x'_i)^2 / (2 l_i^2)),
/// plus the observation-noise variance used by the latent-grid model.
struct KernelParams {
  double signal_variance = 1.0;
  std::vector<double> length_scales;  // one per input dimension
  double noise_variance = 0.0;

  std::size_t dim() const noexcept { return length_scales.size(); }

  void validate() const {
    if (signal_variance <= 0.0)
      throw std::invalid_argument("KernelParams: signal_variance must be > 0");
    if (length_scales.empty())
      throw std::invalid_argument("KernelParams: at least one length scale required");
    for (double l : length_scales)
      if (l <= 0.0)
        throw std::invalid_argument("KernelParams: length scales must be > 0");
    if (noise_variance < 0.0)
      throw std::invalid_argument("KernelParams: noise_variance must be >= 0");
  }

  static KernelParams isotropic(double signal_variance, double length_scale,
                                std::size_t dim = 1, double noise_variance = 0.0) {
    KernelParams p;
    p.signal_variance = signal_variance;
    p.length_scales.assign(dim, length_scale);
    p.noise_variance = noise_variance;
    return p;
  }
};

/// One axis of a regular grid: nodes at origin + j * spacing, j = 0..count-1.
struct GridAxis {
  double origin = 0.0;
  double spacing = 1.0;
  int count = 1;

  double node(int j) const noexcept { return origin + spacing * j; }
};

/// A regular 1-D grid or tensor product of per-dimension regular grids.
/// Tensor data is stored row-major: the last axis varies fastest.
struct GridSpec {
  std::vector<GridAxis> axes;

  static GridSpec uniform_1d(double origin, double spacing, int count) {
    return GridSpec{{GridAxis{origin, spacing, count}}};
  }

  /// count evenly spaced nodes covering [lo, hi] (count >= 2).
  static GridSpec spanning_1d(double lo, double hi, int count) {
    if (count < 2) throw std::invalid_argument("GridSpec: spanning grid needs count >= 2");
    return uniform_1d(lo, (hi - lo) / (count - 1), count);
  }

  std::size_t dim() const noexcept { return axes.size(); }

  std::size_t total_points() const noexcept {
    std::size_t n = 1;
    for (const auto& a : axes) n *= static_cast<std::size_t>(a.count);
    return n;
  }

  void validate() const {
    if (axes.empty()) throw std::invalid_argument("GridSpec: no axes");
    for (const auto& a : axes) {
      if (a.spacing <= 0.0) throw std::invalid_argument("GridSpec: spacing must be > 0");
      if (a.count < 1) throw std::invalid_argument("GridSpec: count must be >= 1");
    }
  }
};

/// Per-test-point predictive mean and variance.
///
/// `variance` is the predictive variance of the modeled quantity: for grid
/// models the latent function, for latent-grid models the observation
/// (noise-inclusive, per the predictive distribution). Latent-grid models
/// additionally fill `function_variance` (the noise-free variant); other
/// models leave it empty. `clamped_variances` counts test points whose
/// variance was clamped up to zero after truncation effects.
struct PredictiveResult {
  std::vector<double> mean;
  std::vector<double> variance;
  std::vector<double> function_variance;
  std::size_t clamped_variances = 0;
};

namespace detail {

inline void require_dim(std::size_t have, std::size_t want, const char* where) {
  if (have != want)
    throw std::invalid_argument(std::string(where) + ": dimension mismatch (" +
                                std::to_string(have) + " vs " + std::to_string(want) + ")");
}

}  // namespace detail

}  // namespace swdgp
