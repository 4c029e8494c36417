#pragma once

#include <cmath>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "swdgp/swd.hpp"

namespace swdgp {

enum class TransformPath { automatic, direct, fast };

namespace detail {

/// Mode projections of a truncated cross row: a[k] = sum_c value_c * v_k[index_c].
/// Evaluated with the sine recurrence sin((k+1)phi) so the hot loop is
/// trigonometry-free; `out` must have grid_size entries and is overwritten.
inline void cross_row_mode_projections(const CrossRow& row, int grid_size,
                                       std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  const double step = M_PI / (grid_size + 1);
  for (int c = 0; c < row.count; ++c) {
    const double phi = (row.index[c] + 1) * step;
    const double two_cos = 2.0 * std::cos(phi);
    const double val = row.value[c];
    double prev = 0.0;
    double cur = std::sin(phi);
    for (int k = 0; k < grid_size; ++k) {
      out[k] += val * cur;
      const double next = two_cos * cur - prev;
      prev = cur;
      cur = next;
    }
  }
  const double inv_norm = 1.0 / std::sqrt(0.5 * (grid_size + 1));
  for (auto& v : out) v *= inv_norm;
}

/// Applies the eigenvector projection along one axis of a row-major tensor,
/// in place: each line along `axis` is replaced by v_k . line per mode k.
inline void project_axis(std::vector<double>& tensor, std::span<const int> sizes, int axis,
                         TransformPath path) {
  const int m = sizes[axis];
  std::size_t inner = 1, outer = 1;
  for (std::size_t a = axis + 1; a < sizes.size(); ++a) inner *= sizes[a];
  for (int a = 0; a < axis; ++a) outer *= sizes[a];

  const bool fast = path == TransformPath::fast ||
                    (path == TransformPath::automatic && m >= 64);
  std::optional<SineTransform> plan;
  if (fast) plan.emplace(m);

  const double inv_norm = 1.0 / std::sqrt(0.5 * (m + 1));
  std::vector<double> line(m), transformed(m);
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t i = 0; i < inner; ++i) {
      double* base = tensor.data() + (o * m) * inner + i;
      for (int k = 0; k < m; ++k) line[k] = base[k * inner];
      if (fast) {
        plan->forward(line, transformed);
      } else {
        transformed = sine_transform_direct(line);
      }
      for (int k = 0; k < m; ++k) base[k * inner] = transformed[k] * inv_norm;
    }
}

}  // namespace detail

/// SWD-GP model for targets living on a (possibly tensor-product) grid.
/// Immutable after grid_fit; prediction is pure.
class GridGPModel {
public:
  friend GridGPModel grid_fit(const GridSpec&, std::span<const double>, const KernelParams&,
                              int, TransformPath);

  const GridSpec& grid() const noexcept { return grid_; }
  const KernelParams& params() const noexcept { return params_; }
  int band_order() const noexcept { return band_order_; }
  std::size_t dim() const noexcept { return grid_.dim(); }
  const std::vector<SWDEigensystem>& eigensystems() const noexcept { return eig_; }
  const std::vector<double>& targets() const noexcept { return y_; }
  /// Cached projections (v_{k1} x ... x v_{kd})^T y, row-major over mode tuples.
  const std::vector<double>& mode_projections() const noexcept { return proj_; }

private:
  GridSpec grid_;
  KernelParams params_;
  int band_order_ = 3;
  std::vector<SWDEigensystem> eig_;
  std::vector<double> y_;
  std::vector<double> proj_;
  std::vector<double> mode_reduced_eig_;  // prod_n lambda_n/sigma^2 per mode tuple
};

/// Fits a grid model: builds the per-axis eigensystems and caches the mode
/// projections of the targets. The direct path costs O(N^2), the fast path
/// O(N log N) in the grid size N.
inline GridGPModel grid_fit(const GridSpec& grid, std::span<const double> targets,
                            const KernelParams& params, int band_order,
                            TransformPath path = TransformPath::automatic) {
  grid.validate();
  params.validate();
  detail::check_band_order(band_order);
  detail::require_dim(params.dim(), grid.dim(), "grid_fit");
  if (targets.size() != grid.total_points())
    throw std::invalid_argument("grid_fit: target count does not match grid size");

  GridGPModel model;
  model.grid_ = grid;
  model.params_ = params;
  model.band_order_ = band_order;
  model.y_.assign(targets.begin(), targets.end());

  std::vector<int> sizes;
  for (std::size_t a = 0; a < grid.dim(); ++a) {
    const KernelParams axis_params =
        KernelParams::isotropic(params.signal_variance, params.length_scales[a]);
    model.eig_.push_back(
        build_eigensystem(grid.axes[a].count, axis_params, grid.axes[a].spacing, band_order));
    sizes.push_back(grid.axes[a].count);
  }

  model.proj_ = model.y_;
  for (std::size_t a = 0; a < grid.dim(); ++a)
    detail::project_axis(model.proj_, sizes, static_cast<int>(a), path);

  // Reduced eigenvalue products per mode tuple (row-major odometer).
  model.mode_reduced_eig_.assign(grid.total_points(), 1.0);
  std::vector<int> idx(grid.dim(), 0);
  for (std::size_t t = 0; t < model.mode_reduced_eig_.size(); ++t) {
    double prod = 1.0;
    for (std::size_t a = 0; a < grid.dim(); ++a)
      prod *= model.eig_[a].eigenvalues[idx[a]] / params.signal_variance;
    model.mode_reduced_eig_[t] = prod;
    for (std::size_t a = grid.dim(); a-- > 0;) {
      if (++idx[a] < sizes[a]) break;
      idx[a] = 0;
    }
  }
  return model;
}

/// Predictive mean/variance at arbitrary points (row-major, grid dimension).
/// The mean is sum_k (k_*^T v_k)(v_k^T y)/lambda_k with the truncated cross
/// kernel; negative variances arising from truncation are clamped to zero
/// and counted.
inline PredictiveResult grid_predict(const GridGPModel& model, std::span<const double> points,
                                     std::size_t count) {
  const std::size_t d = model.dim();
  if (points.size() != count * d)
    throw std::invalid_argument("grid_predict: point size is not N*dim");
  const GridSpec& grid = model.grid();
  const double s2 = model.params().signal_variance;

  PredictiveResult out;
  out.mean.reserve(count);
  out.variance.reserve(count);

  std::vector<std::vector<double>> mode_weights(d);   // a_n[k] / reduced_lambda_n[k]
  std::vector<std::vector<double>> axis_proj(d);      // a_n[k]
  for (std::size_t a = 0; a < d; ++a) {
    mode_weights[a].resize(grid.axes[a].count);
    axis_proj[a].resize(grid.axes[a].count);
  }
  std::vector<double> fold = model.mode_projections();  // scratch sized on first use

  for (std::size_t i = 0; i < count; ++i) {
    double prior = s2;
    double var_term = s2;
    for (std::size_t a = 0; a < d; ++a) {
      const GridAxis& ax = grid.axes[a];
      const double x = points[i * d + a];
      const double l = model.params().length_scales[a];
      const CrossRow row = detail::unit_cross_row(x, ax, l, model.band_order());
      detail::cross_row_mode_projections(row, ax.count, axis_proj[a]);
      prior *= detail::unit_prior_variance(x, ax, l, model.band_order());
      double axis_var = 0.0;
      const auto& eig = model.eigensystems()[a];
      for (int k = 0; k < ax.count; ++k) {
        const double reduced = eig.eigenvalues[k] / s2;
        mode_weights[a][k] = axis_proj[a][k] / reduced;
        axis_var += axis_proj[a][k] * axis_proj[a][k] / reduced;
      }
      var_term *= axis_var;
    }

    // Mean: contract the projection tensor with the per-axis weight vectors.
    fold.assign(model.mode_projections().begin(), model.mode_projections().end());
    std::size_t tail = fold.size();
    for (std::size_t a = 0; a < d; ++a) {
      const std::size_t m = static_cast<std::size_t>(grid.axes[a].count);
      tail /= m;
      for (std::size_t r = 0; r < tail; ++r) {
        double acc = 0.0;
        for (std::size_t k = 0; k < m; ++k) acc += mode_weights[a][k] * fold[k * tail + r];
        fold[r] = acc;
      }
    }
    const double mean = fold[0];

    double variance = prior - var_term;
    if (variance < 0.0) {
      ++out.clamped_variances;
      variance = 0.0;
    }
    out.mean.push_back(mean);
    out.variance.push_back(variance);
  }
  return out;
}

/// FFT-route prediction for 1-D models: the cached target transform and a
/// full sine transform of each (densified) cross row. Same contract as
/// grid_predict; the two agree to rounding.
inline PredictiveResult grid_predict_fft(const GridGPModel& model,
                                         std::span<const double> points, std::size_t count) {
  if (model.dim() != 1)
    throw std::invalid_argument("grid_predict_fft: only 1-D models are supported");
  if (points.size() != count)
    throw std::invalid_argument("grid_predict_fft: point size is not N*dim");

  const GridAxis& ax = model.grid().axes[0];
  const int m = ax.count;
  const double s2 = model.params().signal_variance;
  const double l = model.params().length_scales[0];
  const SWDEigensystem& eig = model.eigensystems()[0];
  const double scale = 2.0 / (m + 1);

  // Unnormalized transform of y, recovered from the cached projections.
  const double norm = std::sqrt(0.5 * (m + 1));
  std::vector<double> y_hat(m);
  for (int k = 0; k < m; ++k) y_hat[k] = model.mode_projections()[k] * norm;

  SineTransform plan(m);
  std::vector<double> cross(m), cross_hat(m);

  PredictiveResult out;
  out.mean.reserve(count);
  out.variance.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double x = points[i];
    const CrossRow row = detail::unit_cross_row(x, ax, l, model.band_order());
    std::fill(cross.begin(), cross.end(), 0.0);
    for (int c = 0; c < row.count; ++c) cross[row.index[c]] = s2 * row.value[c];
    plan.forward(cross, cross_hat);

    double mean = 0.0, quad = 0.0;
    for (int k = 0; k < m; ++k) {
      mean += cross_hat[k] * y_hat[k] / eig.eigenvalues[k];
      quad += cross_hat[k] * cross_hat[k] / eig.eigenvalues[k];
    }
    mean *= scale;
    quad *= scale;

    const double prior = s2 * detail::unit_prior_variance(x, ax, l, model.band_order());
    double variance = prior - quad;
    if (variance < 0.0) {
      ++out.clamped_variances;
      variance = 0.0;
    }
    out.mean.push_back(mean);
    out.variance.push_back(variance);
  }
  return out;
}

}  // namespace swdgp
