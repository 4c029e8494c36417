// Independent reference implementations used as test oracles. These must not
// share code with the library paths they check: the GP reference uses its own
// Gaussian elimination, the eigen checks go through Eigen's dense solver, and
// the cosine sums are evaluated by direct summation.
#pragma once

#include <cmath>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include <swdgp/kernel.hpp>
#include <swdgp/latent.hpp>

namespace oracles {

/// Solves A x = b by Gaussian elimination with partial pivoting.
inline std::vector<double> solve_dense(std::vector<double> a, std::vector<double> b) {
  const std::size_t n = b.size();
  if (a.size() != n * n) throw std::invalid_argument("solve_dense: shape mismatch");
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r * n + col]) > std::abs(a[pivot * n + col])) pivot = r;
    if (a[pivot * n + col] == 0.0) throw std::runtime_error("solve_dense: singular matrix");
    if (pivot != col) {
      for (std::size_t c = 0; c < n; ++c) std::swap(a[col * n + c], a[pivot * n + c]);
      std::swap(b[col], b[pivot]);
    }
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r * n + col] / a[col * n + col];
      if (f == 0.0) continue;
      for (std::size_t c = col; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t r = n; r-- > 0;) {
    double acc = b[r];
    for (std::size_t c = r + 1; c < n; ++c) acc -= a[r * n + c] * x[c];
    x[r] = acc / a[r * n + r];
  }
  return x;
}

/// Textbook GP regression with the full SE kernel: mean and variance at each
/// test point, via the hand-rolled dense solve above.
struct NaiveGPResult {
  std::vector<double> mean;
  std::vector<double> variance;
};

inline NaiveGPResult naive_se_gp(std::span<const double> inputs, std::size_t count,
                                 std::size_t dim, std::span<const double> targets,
                                 const swdgp::KernelParams& params,
                                 std::span<const double> test, std::size_t test_count) {
  std::vector<double> k(count * count);
  for (std::size_t i = 0; i < count; ++i)
    for (std::size_t j = 0; j < count; ++j)
      k[i * count + j] = swdgp::se_kernel(inputs.subspan(i * dim, dim),
                                          inputs.subspan(j * dim, dim), params);
  for (std::size_t i = 0; i < count; ++i) k[i * count + i] += params.noise_variance;

  NaiveGPResult out;
  const std::vector<double> weights =
      solve_dense(k, std::vector<double>(targets.begin(), targets.end()));
  for (std::size_t t = 0; t < test_count; ++t) {
    std::vector<double> cross(count);
    for (std::size_t i = 0; i < count; ++i)
      cross[i] = swdgp::se_kernel(test.subspan(t * dim, dim), inputs.subspan(i * dim, dim),
                                  params);
    double mean = 0.0;
    for (std::size_t i = 0; i < count; ++i) mean += cross[i] * weights[i];
    const std::vector<double> solved = solve_dense(k, cross);
    double quad = 0.0;
    for (std::size_t i = 0; i < count; ++i) quad += cross[i] * solved[i];
    out.mean.push_back(mean);
    out.variance.push_back(params.signal_variance - quad);
  }
  return out;
}

/// Direct summation of sum_{k=1..M} cos(k p pi / (M+1)).
inline double cosine_sum_direct(long long p, int grid_size) {
  double acc = 0.0;
  for (int k = 1; k <= grid_size; ++k)
    acc += std::cos(k * static_cast<double>(p) * M_PI / (grid_size + 1));
  return acc;
}

inline Eigen::MatrixXd to_eigen(const std::vector<double>& dense, int n) {
  return Eigen::Map<const Eigen::MatrixXd>(dense.data(), n, n);
}

/// Smallest eigenvalue of the densified banded kernel, through Eigen.
inline double dense_min_eigenvalue(const swdgp::BandedMatrix& banded) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(to_eigen(banded.dense(), banded.size),
                                                    Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

/// Brute-force admissibility bound: largest l/spacing ratio (scanned on a
/// fine geometric refinement) for which the densified banded kernel stays
/// positive definite, judged by Eigen's dense eigensolver.
inline double brute_force_ratio_bound(int band_order, int grid_size) {
  const auto admissible = [&](double ratio) {
    const auto params = swdgp::KernelParams::isotropic(1.0, ratio);
    try {
      const auto banded = swdgp::banded_grid_kernel(
          swdgp::GridSpec::uniform_1d(0.0, 1.0, grid_size), params, band_order);
      return dense_min_eigenvalue(banded) > 0.0;
    } catch (const swdgp::PositivityError&) {
      return false;
    }
  };
  double lo = 0.05, hi = 5.0;
  if (admissible(hi)) return std::numeric_limits<double>::infinity();
  const int steps = 2000;
  double last_good = lo;
  for (int s = 0; s <= steps; ++s) {
    const double r = lo + (hi - lo) * s / steps;
    if (admissible(r))
      last_good = r;
    else
      break;
  }
  double a = last_good, b = last_good + (hi - lo) / steps;
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (a + b);
    if (admissible(mid)) a = mid;
    else b = mid;
  }
  return 0.5 * (a + b);
}

/// Dense latent-grid oracle: shares Lambda and the truncated cross rows with
/// the model under test but inverts Q exactly.
struct DenseLatentOracle {
  std::vector<double> gbar;
  Eigen::MatrixXd q_inverse;
  Eigen::MatrixXd kgg;
};

inline DenseLatentOracle dense_latent_oracle(const swdgp::LatentProjection& model,
                                             std::span<const double> targets) {
  const int m = model.grid().axes[0].count;
  const auto banded =
      swdgp::banded_grid_kernel(model.grid(), model.params(), model.band_order());
  const Eigen::MatrixXd kgg = to_eigen(banded.dense(), m);

  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(m, m);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
  const auto& rows = model.cross_rows();
  for (std::size_t i = 0; i < model.data_count(); ++i) {
    const auto idx = rows.row_indices(static_cast<int>(i));
    const auto val = rows.row_values(static_cast<int>(i));
    const double inv_lam = 1.0 / model.lambda_diagonal()[i];
    for (std::size_t a = 0; a < idx.size(); ++a) {
      for (std::size_t c = 0; c < idx.size(); ++c)
        w(idx[a], idx[c]) += val[a] * val[c] * inv_lam;
      b(idx[a]) += val[a] * targets[i] * inv_lam;
    }
  }
  DenseLatentOracle oracle;
  oracle.kgg = kgg;
  const Eigen::MatrixXd q = kgg + w;
  oracle.q_inverse = q.ldlt().solve(Eigen::MatrixXd::Identity(m, m));
  const Eigen::VectorXd gbar = kgg * (oracle.q_inverse * b);
  oracle.gbar.assign(gbar.data(), gbar.data() + m);
  return oracle;
}

/// Kronecker product of dense matrices (row-major vectors).
inline std::vector<double> kron(const std::vector<double>& a, int na,
                                const std::vector<double>& b, int nb) {
  std::vector<double> out(static_cast<std::size_t>(na) * nb * na * nb);
  const int n = na * nb;
  for (int i1 = 0; i1 < na; ++i1)
    for (int i2 = 0; i2 < nb; ++i2)
      for (int j1 = 0; j1 < na; ++j1)
        for (int j2 = 0; j2 < nb; ++j2)
          out[static_cast<std::size_t>(i1 * nb + i2) * n + (j1 * nb + j2)] =
              a[static_cast<std::size_t>(i1) * na + j1] *
              b[static_cast<std::size_t>(i2) * nb + j2];
  return out;
}

}  // namespace oracles
