#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "swdgp/gridgp.hpp"
#include "swdgp/kernel.hpp"
#include "swdgp/swd.hpp"

namespace swdgp {

/// Solution of one symmetric 2x2 pair eigenproblem
///   [[a, delta], [delta, b]] u = chi u
/// expressed as a rotation by phi of the unperturbed pair basis:
///   u_plus = cos(phi) v + sin(phi) v_bar,  u_minus = -sin(phi) v + cos(phi) v_bar.
struct PairSolution {
  double chi_plus = 0.0;
  double chi_minus = 0.0;
  double phi = 0.0;
  double cos_phi = 1.0;
  double sin_phi = 0.0;
};

/// Stable two-level solve. For delta == 0 the branch assigns exact (1,0) or
/// (0,1) rotations so that the uncoupled path is reproduced bit for bit;
/// otherwise phi = atan2(r - beta_minus, delta) avoids cancellation when
/// beta_minus approaches -r.
inline PairSolution solve_pair(double a, double b, double delta) {
  PairSolution s;
  const double beta_plus = 0.5 * (a + b);
  const double beta_minus = 0.5 * (a - b);
  if (delta == 0.0) {
    if (beta_minus >= 0.0) {
      s.chi_plus = a;
      s.chi_minus = b;
      s.phi = 0.0;
      s.cos_phi = 1.0;
      s.sin_phi = 0.0;
    } else {
      s.chi_plus = b;
      s.chi_minus = a;
      s.phi = 0.5 * M_PI;
      s.cos_phi = 0.0;
      s.sin_phi = 1.0;
    }
    return s;
  }
  const double r = std::hypot(beta_minus, delta);
  s.chi_plus = beta_plus + r;
  s.chi_minus = beta_plus - r;
  s.phi = std::atan2(r - beta_minus, delta);
  s.cos_phi = std::cos(s.phi);
  s.sin_phi = std::sin(s.phi);
  return s;
}

/// Per-pair perturbation record: modes (lo, hi) = (k, M-1-k); lo == hi marks
/// the middle mode of an odd-sized grid (a 1x1 problem).
struct PairPerturbation {
  int lo = 0;
  int hi = 0;
  double eps_lo = 0.0;
  double eps_hi = 0.0;
  double delta = 0.0;
  PairSolution solution;
};

/// Band-structure summary of K_gx Lambda^-1 K_xg: the means of the diagonal
/// and super/sub-diagonal, their std/mean variation ratios, and the max-norm
/// of the residual after subtracting the two-band average. Small ratios mark
/// the regime where the pair perturbation is trustworthy.
struct ResidualDiagnostic {
  double diag_mean = 0.0;
  double offdiag_mean = 0.0;
  double diag_std_ratio = 0.0;
  double offdiag_std_ratio = 0.0;
  double residual_max = 0.0;
  double threshold = 0.5;
  bool perturbation_valid = true;
};

/// Latent-grid SWD-GP: data at arbitrary 1-D inputs projected onto a regular
/// grid of inducing nodes, with the projection matrix Q inverted
/// perturbatively in the standing-wave basis. Immutable after latent_fit.
class LatentProjection {
public:
  friend LatentProjection latent_fit(std::span<const double>, std::span<const double>,
                                     const GridSpec&, const KernelParams&, int, int);

  const GridSpec& grid() const noexcept { return grid_; }
  const KernelParams& params() const noexcept { return params_; }
  int band_order() const noexcept { return band_order_; }
  int order() const noexcept { return order_; }
  const SWDEigensystem& eigensystem() const noexcept { return eig_; }
  const std::vector<PairPerturbation>& pairs() const noexcept { return pairs_; }
  /// Most probable projected function values at the grid nodes.
  const std::vector<double>& projected_means() const noexcept { return gbar_; }
  /// Q^{-1} K_gx Lambda^{-1} y in grid coordinates (= K_gg^{-1} gbar).
  const std::vector<double>& information_vector() const noexcept { return qinv_b_; }
  /// Per-datum predictive variances (noise-inclusive), floored at sigma_N^2.
  const std::vector<double>& lambda_diagonal() const noexcept { return lambda_; }
  std::size_t lambda_floor_count() const noexcept { return lambda_floor_count_; }
  std::size_t data_count() const noexcept { return lambda_.size(); }
  const SparseCrossKernel& cross_rows() const noexcept { return rows_; }

  /// Perturbed eigenvalue attributed to mode k: the chi of the rotated pair
  /// vector with the larger component along v_k. At order 1 this is exactly
  /// lambda_k + eps_k.
  double chi(int mode) const {
    const int m = eig_.size;
    const int q = std::min(mode, m - 1 - mode);
    const PairPerturbation& p = pairs_[q];
    if (p.lo == p.hi) return p.solution.chi_plus;
    const bool lo_takes_plus = p.solution.cos_phi >= p.solution.sin_phi;
    const bool want_plus = (mode == p.lo) == lo_takes_plus;
    return want_plus ? p.solution.chi_plus : p.solution.chi_minus;
  }

private:
  GridSpec grid_;
  KernelParams params_;
  int band_order_ = 3;
  int order_ = 1;
  SWDEigensystem eig_;
  std::vector<PairPerturbation> pairs_;
  std::vector<double> lambda_;
  std::vector<double> gbar_;
  std::vector<double> qinv_b_;
  SparseCrossKernel rows_;
  std::size_t lambda_floor_count_ = 0;
};

namespace detail {

/// Projections s[m] = v_m . k for one sparse cross row, via the sine
/// recurrence (O(band * M), no trig in the inner loop).
inline void sparse_row_mode_projections(std::span<const int> idx, std::span<const double> val,
                                        int grid_size, std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  const double step = M_PI / (grid_size + 1);
  for (std::size_t c = 0; c < idx.size(); ++c) {
    const double phi = (idx[c] + 1) * step;
    const double two_cos = 2.0 * std::cos(phi);
    const double v = val[c];
    double prev = 0.0;
    double cur = std::sin(phi);
    for (int k = 0; k < grid_size; ++k) {
      out[k] += v * cur;
      const double next = two_cos * cur - prev;
      prev = cur;
      cur = next;
    }
  }
  const double inv_norm = 1.0 / std::sqrt(0.5 * (grid_size + 1));
  for (auto& v : out) v *= inv_norm;
}

inline std::vector<double> synthesize_from_modes(std::span<const double> coeffs) {
  // f = sum_m coeffs[m] v_m; the sine transform is symmetric, so synthesis
  // is one more transform with the eigenvector normalization.
  std::vector<double> w = eigenvector_transform(coeffs);
  const double inv_norm = 1.0 / std::sqrt(0.5 * (coeffs.size() + 1));
  for (auto& v : w) v *= inv_norm;
  return w;
}

}  // namespace detail

/// Fits the latent-grid model: computes Lambda, accumulates the per-mode
/// perturbations, solves every (k, M-1-k) pair, and assembles the projected
/// means. Total cost O(M * band * N). Requires sigma_N^2 > 0.
inline LatentProjection latent_fit(std::span<const double> inputs,
                                   std::span<const double> targets, const GridSpec& grid,
                                   const KernelParams& params, int band_order, int order) {
  grid.validate();
  params.validate();
  detail::check_band_order(band_order);
  if (order != 1 && order != 2)
    throw std::invalid_argument("latent_fit: perturbation order must be 1 or 2");
  if (grid.dim() != 1) throw std::invalid_argument("latent_fit: grid must be 1-D");
  detail::require_dim(params.dim(), 1, "latent_fit");
  if (params.noise_variance <= 0.0)
    throw std::invalid_argument(
        "latent_fit: noise_variance must be > 0 (Lambda^-1 is undefined otherwise)");
  if (inputs.size() != targets.size())
    throw std::invalid_argument("latent_fit: |X| != |y|");

  const GridAxis& ax = grid.axes[0];
  const int m = ax.count;
  const double s2 = params.signal_variance;
  const double sn2 = params.noise_variance;

  LatentProjection model;
  model.grid_ = grid;
  model.params_ = params;
  model.band_order_ = band_order;
  model.order_ = order;
  model.eig_ = build_eigensystem(m, params, ax.spacing, band_order);
  model.rows_ = sparse_cross_kernel(inputs, grid, params, band_order);

  const std::size_t n = inputs.size();
  model.lambda_.resize(n);
  std::vector<double> eps(m, 0.0);
  std::vector<double> delta(m / 2, 0.0);
  std::vector<double> b(m, 0.0);
  std::vector<double> s(m);

  for (std::size_t i = 0; i < n; ++i) {
    const auto idx = model.rows_.row_indices(static_cast<int>(i));
    const auto val = model.rows_.row_values(static_cast<int>(i));
    detail::sparse_row_mode_projections(idx, val, m, s);

    double quad = 0.0;
    for (int k = 0; k < m; ++k) quad += s[k] * s[k] / model.eig_.eigenvalues[k];
    const double prior =
        s2 * detail::unit_prior_variance(inputs[i], ax, params.length_scales[0], band_order);
    double lam = prior - quad + sn2;
    if (lam < sn2) {
      lam = sn2;
      ++model.lambda_floor_count_;
    }
    model.lambda_[i] = lam;

    const double inv_lam = 1.0 / lam;
    for (int k = 0; k < m; ++k) eps[k] += s[k] * s[k] * inv_lam;
    if (order == 2)
      for (int k = 0; k < m / 2; ++k) delta[k] += s[k] * s[m - 1 - k] * inv_lam;
    const double w = targets[i] * inv_lam;
    for (std::size_t c = 0; c < idx.size(); ++c) b[idx[c]] += w * val[c];
  }

  // Pair solves; order 1 feeds delta = 0 through the same code path.
  model.pairs_.reserve((m + 1) / 2);
  for (int k = 0; k <= (m - 1) / 2; ++k) {
    const int hi = m - 1 - k;
    PairPerturbation pair;
    pair.lo = k;
    pair.hi = hi;
    pair.eps_lo = eps[k];
    pair.eps_hi = eps[hi];
    pair.delta = (order == 2 && k < hi) ? delta[k] : 0.0;
    if (k == hi) {
      pair.solution.chi_plus = pair.solution.chi_minus =
          model.eig_.eigenvalues[k] + eps[k];
      pair.solution.phi = 0.0;
      pair.solution.cos_phi = 1.0;
      pair.solution.sin_phi = 0.0;
    } else {
      pair.solution = solve_pair(model.eig_.eigenvalues[k] + eps[k],
                                 model.eig_.eigenvalues[hi] + eps[hi], pair.delta);
    }
    if (pair.solution.chi_plus <= 0.0 || pair.solution.chi_minus <= 0.0)
      throw PositivityError("latent_fit: nonpositive perturbed eigenvalue",
                            std::min(pair.solution.chi_plus, pair.solution.chi_minus));
    model.pairs_.push_back(pair);
  }

  // gamma = Q^{-1} b in mode coordinates, per pair.
  std::vector<double> w = eigenvector_transform(b);
  const double inv_norm = 1.0 / std::sqrt(0.5 * (m + 1));
  std::vector<double> t(m);
  for (int k = 0; k < m; ++k) t[k] = w[k] * inv_norm;

  std::vector<double> gamma(m, 0.0);
  std::vector<double> gamma_scaled(m, 0.0);
  for (const PairPerturbation& pair : model.pairs_) {
    if (pair.lo == pair.hi) {
      gamma[pair.lo] = t[pair.lo] / pair.solution.chi_plus;
    } else {
      const double c = pair.solution.cos_phi;
      const double sphi = pair.solution.sin_phi;
      const double up = (c * t[pair.lo] + sphi * t[pair.hi]) / pair.solution.chi_plus;
      const double um = (-sphi * t[pair.lo] + c * t[pair.hi]) / pair.solution.chi_minus;
      gamma[pair.lo] = c * up - sphi * um;
      gamma[pair.hi] = sphi * up + c * um;
    }
  }
  for (int k = 0; k < m; ++k) gamma_scaled[k] = gamma[k] * model.eig_.eigenvalues[k];

  model.qinv_b_ = detail::synthesize_from_modes(gamma);
  model.gbar_ = detail::synthesize_from_modes(gamma_scaled);
  return model;
}

/// Predictive distribution at arbitrary 1-D test inputs. `variance` is the
/// noise-inclusive observation variance; `function_variance` omits the noise
/// term. Far from the grid both revert to the prior.
inline PredictiveResult latent_predict(const LatentProjection& model,
                                       std::span<const double> points) {
  const GridAxis& ax = model.grid().axes[0];
  const int m = ax.count;
  const double s2 = model.params().signal_variance;
  const double sn2 = model.params().noise_variance;
  const double l = model.params().length_scales[0];

  PredictiveResult out;
  out.mean.reserve(points.size());
  out.variance.reserve(points.size());
  out.function_variance.reserve(points.size());
  std::vector<double> tau(m);

  for (double x : points) {
    const CrossRow row = detail::unit_cross_row(x, ax, l, model.band_order());
    double mean = 0.0;
    for (int c = 0; c < row.count; ++c)
      mean += s2 * row.value[c] * model.information_vector()[row.index[c]];

    std::array<int, 5> idx{};
    std::array<double, 5> val{};
    for (int c = 0; c < row.count; ++c) {
      idx[c] = row.index[c];
      val[c] = s2 * row.value[c];
    }
    detail::sparse_row_mode_projections(std::span<const int>(idx.data(), row.count),
                                        std::span<const double>(val.data(), row.count), m,
                                        tau);

    double kinv_quad = 0.0;
    for (int k = 0; k < m; ++k)
      kinv_quad += tau[k] * tau[k] / model.eigensystem().eigenvalues[k];
    double q_quad = 0.0;
    for (const PairPerturbation& pair : model.pairs()) {
      if (pair.lo == pair.hi) {
        q_quad += tau[pair.lo] * tau[pair.lo] / pair.solution.chi_plus;
      } else {
        const double c = pair.solution.cos_phi;
        const double sphi = pair.solution.sin_phi;
        const double up = c * tau[pair.lo] + sphi * tau[pair.hi];
        const double um = -sphi * tau[pair.lo] + c * tau[pair.hi];
        q_quad += up * up / pair.solution.chi_plus + um * um / pair.solution.chi_minus;
      }
    }

    const double prior = s2 * detail::unit_prior_variance(x, ax, l, model.band_order());
    double latent_var = prior - kinv_quad;
    if (latent_var < 0.0) {
      ++out.clamped_variances;
      latent_var = 0.0;
    }
    const double fvar = latent_var + q_quad;
    out.mean.push_back(mean);
    out.function_variance.push_back(fvar);
    out.variance.push_back(fvar + sn2);
  }
  return out;
}

/// Band statistics of K_gx Lambda^-1 K_xg (assembled densely; O(band^2 N + M^2)).
inline ResidualDiagnostic residual_diagnostic(const LatentProjection& model,
                                              double threshold = 0.5) {
  const int m = model.grid().axes[0].count;
  ResidualDiagnostic diag;
  diag.threshold = threshold;
  if (model.data_count() == 0) return diag;

  std::vector<double> w(static_cast<std::size_t>(m) * m, 0.0);
  for (std::size_t i = 0; i < model.data_count(); ++i) {
    const auto idx = model.cross_rows().row_indices(static_cast<int>(i));
    const auto val = model.cross_rows().row_values(static_cast<int>(i));
    const double inv_lam = 1.0 / model.lambda_diagonal()[i];
    for (std::size_t a = 0; a < idx.size(); ++a)
      for (std::size_t b = 0; b < idx.size(); ++b)
        w[static_cast<std::size_t>(idx[a]) * m + idx[b]] += val[a] * val[b] * inv_lam;
  }

  auto band_stats = [&](int offset) {
    double mean = 0.0;
    const int count = m - offset;
    for (int i = 0; i < count; ++i) mean += w[static_cast<std::size_t>(i) * m + i + offset];
    mean /= count;
    double var = 0.0;
    for (int i = 0; i < count; ++i) {
      const double d = w[static_cast<std::size_t>(i) * m + i + offset] - mean;
      var += d * d;
    }
    return std::pair<double, double>{mean, std::sqrt(var / count)};
  };

  const auto [dmean, dstd] = band_stats(0);
  diag.diag_mean = dmean;
  diag.diag_std_ratio = dmean != 0.0 ? dstd / std::abs(dmean) : 0.0;
  if (m >= 2) {
    const auto [omean, ostd] = band_stats(1);
    diag.offdiag_mean = omean;
    diag.offdiag_std_ratio = omean != 0.0 ? ostd / std::abs(omean) : 0.0;
  }

  double rmax = 0.0;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      double r = w[static_cast<std::size_t>(i) * m + j];
      if (i == j) r -= diag.diag_mean;
      else if (std::abs(i - j) == 1) r -= diag.offdiag_mean;
      rmax = std::max(rmax, std::abs(r));
    }
  diag.residual_max = rmax;
  diag.perturbation_valid =
      diag.diag_std_ratio < threshold && diag.offdiag_std_ratio < threshold;
  return diag;
}

/// Diagonal of the posterior covariance A^-1 = K_gg Q^-1 K_gg over the grid
/// nodes, assembled pairwise in the standing-wave basis.
inline std::vector<double> posterior_covariance_diag(const LatentProjection& model) {
  const int m = model.grid().axes[0].count;
  const auto& lam = model.eigensystem().eigenvalues;
  std::vector<double> out(m, 0.0);
  for (const PairPerturbation& pair : model.pairs()) {
    if (pair.lo == pair.hi) {
      const double g = lam[pair.lo] * lam[pair.lo] / pair.solution.chi_plus;
      for (int j = 0; j < m; ++j) {
        const double v = eigenvector_component(pair.lo, j, m);
        out[j] += g * v * v;
      }
      continue;
    }
    const double c = pair.solution.cos_phi;
    const double s = pair.solution.sin_phi;
    const double ip = 1.0 / pair.solution.chi_plus;
    const double im = 1.0 / pair.solution.chi_minus;
    const double g11 = lam[pair.lo] * lam[pair.lo] * (c * c * ip + s * s * im);
    const double g12 = lam[pair.lo] * lam[pair.hi] * (c * s * (ip - im));
    const double g22 = lam[pair.hi] * lam[pair.hi] * (s * s * ip + c * c * im);
    for (int j = 0; j < m; ++j) {
      const double vlo = eigenvector_component(pair.lo, j, m);
      const double vhi = eigenvector_component(pair.hi, j, m);
      out[j] += g11 * vlo * vlo + 2.0 * g12 * vlo * vhi + g22 * vhi * vhi;
    }
  }
  return out;
}

}  // namespace swdgp
