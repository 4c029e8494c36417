#pragma once

#include <cmath>
#include <cstdlib>
#include <span>
#include <vector>

#include "swdgp/kernel.hpp"
#include "swdgp/sine_transform.hpp"

namespace swdgp {

/// Analytic eigensystem of a banded grid kernel. Mode k (0-based) has angle
/// theta_k = (k+1) pi / (M+1) and eigenvalue
///   band 3:  sigma^2 (1 + 2 alpha cos theta_k)
///   band 5:  sigma^2 (1 + 2 alpha cos theta_k + 2 alpha^4 cos 2 theta_k)
/// with eigenvector components v_k[j] = sin((j+1) theta_k) / sqrt((M+1)/2).
/// Eigenvalues are stored by mode index, not by magnitude: the latent-grid
/// perturbation couples the symmetric modes (k, M-1-k).
struct SWDEigensystem {
  int size = 0;
  int band_order = 3;
  double alpha = 0.0;
  double signal_variance = 1.0;
  std::vector<double> angles;
  std::vector<double> eigenvalues;

  double min_eigenvalue() const {
    double mn = eigenvalues[0];
    for (double v : eigenvalues) mn = std::min(mn, v);
    return mn;
  }
};

/// Builds the standing-wave eigensystem for a grid of M nodes with spacing
/// `spacing`. Throws PositivityError when any eigenvalue is nonpositive.
inline SWDEigensystem build_eigensystem(int grid_size, const KernelParams& params,
                                        double spacing, int band_order) {
  params.validate();
  detail::check_band_order(band_order);
  detail::require_dim(params.dim(), 1, "build_eigensystem");
  if (grid_size < 1) throw std::invalid_argument("build_eigensystem: grid_size must be >= 1");
  if (spacing <= 0.0) throw std::invalid_argument("build_eigensystem: spacing must be > 0");

  SWDEigensystem eig;
  eig.size = grid_size;
  eig.band_order = band_order;
  eig.signal_variance = params.signal_variance;
  eig.alpha = nearest_neighbor_correlation(params.length_scales[0], spacing);
  eig.angles.resize(grid_size);
  eig.eigenvalues.resize(grid_size);
  const double step = M_PI / (grid_size + 1);
  for (int k = 0; k < grid_size; ++k) {
    eig.angles[k] = (k + 1) * step;
    eig.eigenvalues[k] =
        params.signal_variance * detail::reduced_eigenvalue(eig.alpha, eig.angles[k], band_order);
  }
  const double mn = eig.min_eigenvalue();
  if (mn <= 0.0) {
    std::string message = "build_eigensystem: smallest eigenvalue " + std::to_string(mn) +
                          " <= 0; length scale / spacing = " +
                          std::to_string(params.length_scales[0] / spacing);
    if (grid_size >= 2)
      message += " exceeds the admissible ratio " +
                 std::to_string(max_length_scale_ratio(band_order, grid_size));
    throw PositivityError(message, mn);
  }
  return eig;
}

/// Component j of standing-wave eigenvector k (both 0-based), for a grid of
/// M nodes: sin((j+1)(k+1) pi/(M+1)) / sqrt((M+1)/2).
inline double eigenvector_component(int mode, int node, int grid_size) {
  if (mode < 0 || mode >= grid_size || node < 0 || node >= grid_size)
    throw std::out_of_range("eigenvector_component: index out of range");
  const double theta = (mode + 1) * M_PI / (grid_size + 1);
  return std::sin((node + 1) * theta) / std::sqrt(0.5 * (grid_size + 1));
}

/// w[j] = sum_k sin((k+1)(j+1)pi/(M+1)) y[k] = sqrt((M+1)/2) * (v_j . y).
inline std::vector<double> eigenvector_transform_direct(std::span<const double> y) {
  return sine_transform_direct(y);
}

inline std::vector<double> eigenvector_transform_fast(std::span<const double> y) {
  SineTransform t(static_cast<int>(y.size()));
  std::vector<double> out(y.size());
  t.forward(y, out);
  return out;
}

/// Dispatches to the fast path for all but tiny inputs.
inline std::vector<double> eigenvector_transform(std::span<const double> y) {
  if (y.empty()) return {};
  if (y.size() < 32) return eigenvector_transform_direct(y);
  return eigenvector_transform_fast(y);
}

/// K^{-1} y through the decomposition sum_k v_k v_k^T / lambda_k.
/// Exact for band 3; for band 5 it inverts the reconstructed matrix.
inline std::vector<double> apply_inverse(const SWDEigensystem& eig, std::span<const double> y) {
  if (static_cast<int>(y.size()) != eig.size)
    throw std::invalid_argument("apply_inverse: length mismatch");
  const double norm = 2.0 / (eig.size + 1);  // transform^2 = ((M+1)/2) I
  std::vector<double> w = eigenvector_transform(y);
  for (int k = 0; k < eig.size; ++k) w[k] *= norm / eig.eigenvalues[k];
  return eigenvector_transform(w);
}

/// a(p) = sum_{k=1..M} cos(k p pi / (M+1)): M when p is a multiple of
/// 2(M+1); otherwise -1 for even p and 0 for odd p.
inline double reconstruction_coefficient(long long p_arg, int grid_size) {
  const long long period = 2LL * (grid_size + 1);
  long long r = p_arg % period;
  if (r < 0) r += period;
  if (r == 0) return static_cast<double>(grid_size);
  return (r % 2 == 0) ? -1.0 : 0.0;
}

namespace detail {

/// Assembles sum_k f(theta_k) v_k v_k^T for f(theta) = sum_q coeffs[q] cos(q theta)
/// using the closed-form cosine sums, without evaluating eigenvectors.
inline std::vector<double> cosine_series_matrix(std::span<const double> coeffs, int grid_size) {
  const int m = grid_size;
  std::vector<double> out(static_cast<std::size_t>(m) * m, 0.0);
  const double scale = 1.0 / (2.0 * (m + 1));
  for (int i = 1; i <= m; ++i) {
    for (int j = 1; j <= m; ++j) {
      double acc = 0.0;
      for (std::size_t q = 0; q < coeffs.size(); ++q) {
        const long long qq = static_cast<long long>(q);
        acc += coeffs[q] * (reconstruction_coefficient(i - j + qq, m) +
                            reconstruction_coefficient(i - j - qq, m) -
                            reconstruction_coefficient(i + j + qq, m) -
                            reconstruction_coefficient(i + j - qq, m));
      }
      out[static_cast<std::size_t>(i - 1) * m + (j - 1)] = scale * acc;
    }
  }
  return out;
}

}  // namespace detail

/// Dense reconstruction sum_k lambda_k v_k v_k^T for a band-5 eigensystem,
/// assembled through the cosine-sum identity. Equals the pentadiagonal
/// banded_grid_kernel including its corner corrections.
inline std::vector<double> reconstructed_matrix(const SWDEigensystem& eig) {
  if (eig.band_order != 5)
    throw std::invalid_argument(
        "reconstructed_matrix: only band 5 is reconstructed (band 3 is exact by construction)");
  const double s2 = eig.signal_variance;
  const double a = eig.alpha;
  const double a4 = a * a * a * a;
  const double coeffs[3] = {s2, 2.0 * s2 * a, 2.0 * s2 * a4};
  return detail::cosine_series_matrix(std::span<const double>(coeffs, 3), eig.size);
}

}  // namespace swdgp
