#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "swdgp/errors.hpp"
#include "swdgp/types.hpp"

namespace swdgp {

/// Squared-exponential covariance between two points of equal dimension.
inline double se_kernel(std::span<const double> x, std::span<const double> y,
                        const KernelParams& params) {
  params.validate();
  detail::require_dim(x.size(), params.dim(), "se_kernel(x)");
  detail::require_dim(y.size(), params.dim(), "se_kernel(y)");
  double exponent = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    const double l = params.length_scales[i];
    exponent += d * d / (2.0 * l * l);
  }
  return params.signal_variance * std::exp(-exponent);
}

inline double se_kernel(double x, double y, const KernelParams& params) {
  return se_kernel(std::span<const double>(&x, 1), std::span<const double>(&y, 1), params);
}

/// Correlation between neighboring grid nodes, alpha = exp(-spacing^2 / (2 l^2)).
/// The small parameter of the banded approximation; in (0, 1).
inline double nearest_neighbor_correlation(double length_scale, double spacing) {
  if (length_scale <= 0.0 || spacing <= 0.0)
    throw std::invalid_argument("nearest_neighbor_correlation: inputs must be > 0");
  return std::exp(-(spacing * spacing) / (2.0 * length_scale * length_scale));
}

namespace detail {

/// Reduced eigenvalue lambda/sigma^2 of the banded grid kernel at angle theta.
inline double reduced_eigenvalue(double alpha, double theta, int band_order) {
  double v = 1.0 + 2.0 * alpha * std::cos(theta);
  if (band_order == 5) {
    const double a4 = alpha * alpha * alpha * alpha;
    v += 2.0 * a4 * std::cos(2.0 * theta);
  }
  return v;
}

inline double min_reduced_eigenvalue(double alpha, int grid_size, int band_order) {
  const double step = M_PI / (grid_size + 1);
  double mn = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= grid_size; ++k)
    mn = std::min(mn, reduced_eigenvalue(alpha, k * step, band_order));
  return mn;
}

inline void check_band_order(int band_order) {
  if (band_order != 3 && band_order != 5)
    throw std::invalid_argument("band order must be 3 or 5");
}

inline double ratio_from_alpha(double alpha) {
  return 1.0 / std::sqrt(2.0 * std::log(1.0 / alpha));
}

}  // namespace detail

/// Largest admissible length-scale-to-spacing ratio for which every analytic
/// eigenvalue of the banded grid kernel stays strictly positive. Returns
/// +infinity when positivity holds for all alpha < 1 (e.g. band 3, M = 2).
/// For band 3 the bound decreases to 1/sqrt(2 ln 2) ~ 0.8493 as M grows.
inline double max_length_scale_ratio(int band_order, int grid_size) {
  detail::check_band_order(band_order);
  if (grid_size < 2)
    throw std::invalid_argument("max_length_scale_ratio: grid_size must be >= 2");

  // The minimum eigenvalue need not be monotone in alpha (band 5), so locate
  // the first sign change by scan, then bisect.
  const int scan_steps = 4096;
  double lo = 0.0;  // min eigenvalue at alpha -> 0+ is 1 > 0
  double hi = -1.0;
  for (int s = 1; s <= scan_steps; ++s) {
    const double a = static_cast<double>(s) / (scan_steps + 1);
    if (detail::min_reduced_eigenvalue(a, grid_size, band_order) <= 0.0) {
      hi = a;
      break;
    }
    lo = a;
  }
  if (hi < 0.0) {
    const double a_top = 1.0 - 1e-12;
    if (detail::min_reduced_eigenvalue(a_top, grid_size, band_order) > 0.0)
      return std::numeric_limits<double>::infinity();
    hi = a_top;
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (detail::min_reduced_eigenvalue(mid, grid_size, band_order) > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return detail::ratio_from_alpha(0.5 * (lo + hi));
}

/// Symmetric banded matrix with band order 3 (tridiagonal) or 5 (pentadiagonal).
/// Stores the main diagonal and the first (and second) superdiagonals.
struct BandedMatrix {
  int size = 0;
  int band_order = 3;
  std::vector<double> diag;  // size
  std::vector<double> off1;  // size-1
  std::vector<double> off2;  // size-2, band 5 only

  double at(int i, int j) const noexcept {
    const int d = std::abs(i - j);
    if (d == 0) return diag[i];
    if (d == 1) return off1[std::min(i, j)];
    if (d == 2 && band_order == 5) return off2[std::min(i, j)];
    return 0.0;
  }

  void multiply(std::span<const double> x, std::span<double> out) const {
    for (int i = 0; i < size; ++i) {
      double acc = diag[i] * x[i];
      if (i > 0) acc += off1[i - 1] * x[i - 1];
      if (i + 1 < size) acc += off1[i] * x[i + 1];
      if (band_order == 5) {
        if (i > 1) acc += off2[i - 2] * x[i - 2];
        if (i + 2 < size) acc += off2[i] * x[i + 2];
      }
      out[i] = acc;
    }
  }

  std::vector<double> dense() const {
    std::vector<double> m(static_cast<std::size_t>(size) * size, 0.0);
    for (int i = 0; i < size; ++i)
      for (int j = std::max(0, i - 2); j <= std::min(size - 1, i + 2); ++j)
        m[static_cast<std::size_t>(i) * size + j] = at(i, j);
    return m;
  }
};

/// Banded approximation of the SE kernel matrix on a 1-D grid. Band 3 keeps
/// nearest-neighbor correlations; band 5 additionally keeps next-nearest ones
/// and corrects the two corner diagonal entries so that the standing-wave
/// basis diagonalizes the matrix exactly. Throws PositivityError when the
/// length scale exceeds the admissible ratio for the requested band.
inline BandedMatrix banded_grid_kernel(const GridSpec& grid, const KernelParams& params,
                                       int band_order) {
  grid.validate();
  params.validate();
  detail::check_band_order(band_order);
  if (grid.dim() != 1)
    throw std::invalid_argument("banded_grid_kernel: grid must be 1-D");
  detail::require_dim(params.dim(), 1, "banded_grid_kernel");

  const GridAxis& ax = grid.axes[0];
  const int m = ax.count;
  const double s2 = params.signal_variance;
  const double alpha = nearest_neighbor_correlation(params.length_scales[0], ax.spacing);

  if (m >= 2) {
    const double min_eig = s2 * detail::min_reduced_eigenvalue(alpha, m, band_order);
    if (min_eig <= 0.0)
      throw PositivityError(
          "banded_grid_kernel: inadmissible length scale, smallest eigenvalue " +
              std::to_string(min_eig) + " <= 0 (ratio bound " +
              std::to_string(max_length_scale_ratio(band_order, m)) + ")",
          min_eig);
  } else if (band_order == 5) {
    const double a4 = alpha * alpha * alpha * alpha;
    const double eig = s2 * (1.0 - 2.0 * a4);
    if (eig <= 0.0)
      throw PositivityError("banded_grid_kernel: inadmissible length scale for M=1", eig);
  }

  BandedMatrix k;
  k.size = m;
  k.band_order = band_order;
  k.diag.assign(m, s2);
  k.off1.assign(std::max(0, m - 1), s2 * alpha);
  if (band_order == 5) {
    const double a4 = s2 * alpha * alpha * alpha * alpha;
    k.off2.assign(std::max(0, m - 2), a4);
    if (m == 1) {
      k.diag[0] -= 2.0 * a4;
    } else {
      k.diag[0] -= a4;
      k.diag[m - 1] -= a4;
    }
  }
  return k;
}

/// One truncated unit-variance cross-kernel row: covariance of a point with
/// the grid nodes inside the truncation radius, divided by sigma^2.
struct CrossRow {
  int count = 0;
  std::array<int, 5> index{};
  std::array<double, 5> value{};
};

namespace detail {

/// Hat weight for the band-5 corner correction: 1 at the edge node, 0 from
/// the neighboring node outward. Keeps rows of grid-coincident points equal
/// to the corresponding banded-matrix rows while staying continuous in x.
inline double corner_hat(double x, double edge, double spacing) {
  return std::max(0.0, 1.0 - std::abs(x - edge) / spacing);
}

/// Unit-variance truncated cross row along one grid axis. Entries are
/// exp(-d^2/2l^2) for nodes with d < (band/2)*spacing; exact ties are
/// excluded. For band 5 the corner-hat correction is subtracted at the two
/// edge nodes.
inline CrossRow unit_cross_row(double x, const GridAxis& ax, double length_scale,
                               int band_order) {
  CrossRow row;
  const int m = ax.count;
  const double radius = 0.5 * band_order * ax.spacing * (1.0 - 1e-12);
  const int reach = band_order / 2;
  const int j0 = static_cast<int>(std::llround((x - ax.origin) / ax.spacing));
  const int lo = std::max(0, j0 - reach);
  const int hi = std::min(m - 1, j0 + reach);
  for (int j = lo; j <= hi; ++j) {
    const double d = x - ax.node(j);
    if (std::abs(d) < radius) {
      row.index[row.count] = j;
      row.value[row.count] = std::exp(-d * d / (2.0 * length_scale * length_scale));
      ++row.count;
    }
  }
  if (band_order == 5 && row.count > 0) {
    const double alpha = nearest_neighbor_correlation(length_scale, ax.spacing);
    const double a4 = alpha * alpha * alpha * alpha;
    for (int c = 0; c < row.count; ++c) {
      const int j = row.index[c];
      if (j == 0) row.value[c] -= a4 * corner_hat(x, ax.node(0), ax.spacing);
      if (j == m - 1) row.value[c] -= a4 * corner_hat(x, ax.node(m - 1), ax.spacing);
    }
  }
  return row;
}

/// Prior variance of a point under the truncated model, divided by sigma^2.
/// Band 3: identically 1. Band 5: dips to the corrected corner value at the
/// two edge nodes so that grid-coincident predictions are consistent.
inline double unit_prior_variance(double x, const GridAxis& ax, double length_scale,
                                  int band_order) {
  if (band_order != 5) return 1.0;
  const double alpha = nearest_neighbor_correlation(length_scale, ax.spacing);
  const double a4 = alpha * alpha * alpha * alpha;
  return 1.0 - a4 * (corner_hat(x, ax.node(0), ax.spacing) +
                     corner_hat(x, ax.node(ax.count - 1), ax.spacing));
}

}  // namespace detail

/// Sparse cross-kernel between off-grid points and a 1-D grid, in CSR layout.
/// Each row has at most band_order nonzero entries.
struct SparseCrossKernel {
  int rows = 0;
  int cols = 0;
  std::vector<std::int64_t> offsets;  // rows + 1
  std::vector<int> index;
  std::vector<double> value;

  std::span<const int> row_indices(int i) const {
    return {index.data() + offsets[i], static_cast<std::size_t>(offsets[i + 1] - offsets[i])};
  }
  std::span<const double> row_values(int i) const {
    return {value.data() + offsets[i], static_cast<std::size_t>(offsets[i + 1] - offsets[i])};
  }
};

/// Cross-kernel rows k(x_i, g_j) for 1-D points against a 1-D grid, truncated
/// with the same sparsity rule as the banded grid kernel. Points beyond the
/// truncation radius of every node yield all-zero rows.
inline SparseCrossKernel sparse_cross_kernel(std::span<const double> points,
                                             const GridSpec& grid, const KernelParams& params,
                                             int band_order) {
  grid.validate();
  params.validate();
  detail::check_band_order(band_order);
  if (grid.dim() != 1)
    throw std::invalid_argument("sparse_cross_kernel: grid must be 1-D");
  detail::require_dim(params.dim(), 1, "sparse_cross_kernel");

  const GridAxis& ax = grid.axes[0];
  SparseCrossKernel out;
  out.rows = static_cast<int>(points.size());
  out.cols = ax.count;
  out.offsets.reserve(points.size() + 1);
  out.offsets.push_back(0);
  out.index.reserve(points.size() * band_order);
  out.value.reserve(points.size() * band_order);
  for (double x : points) {
    const CrossRow row = detail::unit_cross_row(x, ax, params.length_scales[0], band_order);
    for (int c = 0; c < row.count; ++c) {
      out.index.push_back(row.index[c]);
      out.value.push_back(params.signal_variance * row.value[c]);
    }
    out.offsets.push_back(static_cast<std::int64_t>(out.index.size()));
  }
  return out;
}

}  // namespace swdgp
