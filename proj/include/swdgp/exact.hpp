#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "swdgp/kernel.hpp"

namespace swdgp {

/// Dense exact GP regression. O(N^3) fit, O(N^2) per-query solve; the
/// accuracy baseline for every approximation in the library.
///
/// Three constructions share the same factorization and query machinery:
///  - fit():          full (untruncated) SE kernel on arbitrary inputs;
///  - fit_banded():   the truncated banded grid kernel, densely factorized,
///                    queried with the same truncated cross rows the SWD path
///                    uses. Comparing against this isolates decomposition
///                    error from truncation error.
///  - from_covariance(): an explicit covariance matrix; queries go through
///                    predict_with_cross().
class DenseGPModel {
public:
  static DenseGPModel fit(std::span<const double> inputs, std::size_t count,
                          std::span<const double> targets, const KernelParams& params) {
    params.validate();
    if (count < 1) throw std::invalid_argument("DenseGPModel: need at least one point");
    if (targets.size() != count) throw std::invalid_argument("DenseGPModel: |y| != N");
    const std::size_t d = params.dim();
    if (inputs.size() != count * d)
      throw std::invalid_argument("DenseGPModel: input size is not N*dim");

    DenseGPModel model;
    model.params_ = params;
    model.inputs_.assign(inputs.begin(), inputs.end());
    model.dim_ = d;
    Eigen::MatrixXd k(count, count);
    for (std::size_t i = 0; i < count; ++i)
      for (std::size_t j = 0; j <= i; ++j) {
        const double v = se_kernel(inputs.subspan(i * d, d), inputs.subspan(j * d, d), params);
        k(i, j) = v;
        k(j, i) = v;
      }
    k.diagonal().array() += params.noise_variance;
    model.factorize(k, targets);
    return model;
  }

  static DenseGPModel fit_banded(const GridSpec& grid, std::span<const double> targets,
                                 const KernelParams& params, int band_order) {
    grid.validate();
    if (grid.dim() != 1)
      throw std::invalid_argument("DenseGPModel::fit_banded: grid must be 1-D");
    const BandedMatrix banded = banded_grid_kernel(grid, params, band_order);
    if (targets.size() != static_cast<std::size_t>(banded.size))
      throw std::invalid_argument("DenseGPModel: |y| != grid size");

    DenseGPModel model;
    model.params_ = params;
    model.grid_ = grid;
    model.band_order_ = band_order;
    model.dim_ = 1;
    const std::vector<double> dense = banded.dense();
    Eigen::MatrixXd k = Eigen::Map<const Eigen::MatrixXd>(dense.data(), banded.size, banded.size);
    k.diagonal().array() += params.noise_variance;
    model.factorize(k, targets);
    return model;
  }

  static DenseGPModel from_covariance(const Eigen::MatrixXd& covariance,
                                      std::span<const double> targets,
                                      const KernelParams& params) {
    params.validate();
    if (covariance.rows() != covariance.cols() ||
        covariance.rows() != static_cast<Eigen::Index>(targets.size()))
      throw std::invalid_argument("DenseGPModel: covariance/targets shape mismatch");
    DenseGPModel model;
    model.params_ = params;
    model.dim_ = params.dim();
    Eigen::MatrixXd k = covariance;
    k.diagonal().array() += params.noise_variance;
    model.factorize(k, targets);
    return model;
  }

  /// Predictive mean and variance at `count` points (row-major, model dim).
  PredictiveResult predict(std::span<const double> points, std::size_t count) const {
    if (points.size() != count * dim_)
      throw std::invalid_argument("DenseGPModel::predict: point size is not N*dim");
    PredictiveResult out;
    out.mean.reserve(count);
    out.variance.reserve(count);
    Eigen::VectorXd cross(llt_.rows());
    for (std::size_t i = 0; i < count; ++i) {
      const std::span<const double> x = points.subspan(i * dim_, dim_);
      double prior = params_.signal_variance;
      if (grid_) {
        const GridAxis& ax = grid_->axes[0];
        const CrossRow row =
            detail::unit_cross_row(x[0], ax, params_.length_scales[0], band_order_);
        cross.setZero();
        for (int c = 0; c < row.count; ++c)
          cross(row.index[c]) = params_.signal_variance * row.value[c];
        prior *= detail::unit_prior_variance(x[0], ax, params_.length_scales[0], band_order_);
      } else {
        for (Eigen::Index j = 0; j < cross.size(); ++j)
          cross(j) = se_kernel(x, std::span<const double>(inputs_.data() + j * dim_, dim_),
                               params_);
      }
      const auto [mean, variance] = conditional(cross, prior, out);
      out.mean.push_back(mean);
      out.variance.push_back(variance);
    }
    return out;
  }

  /// Conditional mean/variance given an explicit cross-covariance vector and
  /// prior variance of the query point.
  std::pair<double, double> predict_with_cross(std::span<const double> cross,
                                               double prior_variance) const {
    if (cross.size() != static_cast<std::size_t>(llt_.rows()))
      throw std::invalid_argument("predict_with_cross: length mismatch");
    const Eigen::VectorXd k = Eigen::Map<const Eigen::VectorXd>(cross.data(), cross.size());
    PredictiveResult scratch;
    return conditional(k, prior_variance, scratch);
  }

  std::size_t training_count() const noexcept { return static_cast<std::size_t>(llt_.rows()); }
  const KernelParams& params() const noexcept { return params_; }

private:
  void factorize(const Eigen::MatrixXd& k, std::span<const double> targets) {
    llt_.compute(k);
    if (llt_.info() != Eigen::Success) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k, Eigen::EigenvaluesOnly);
      const double smallest = es.eigenvalues().minCoeff();
      throw FactorizationError(
          "DenseGPModel: kernel matrix is not positive definite (smallest pivot " +
              std::to_string(smallest) + ")",
          smallest);
    }
    const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(targets.data(), targets.size());
    weights_ = llt_.solve(y);
  }

  std::pair<double, double> conditional(const Eigen::VectorXd& cross, double prior_variance,
                                        PredictiveResult& counters) const {
    const double mean = cross.dot(weights_);
    double variance = prior_variance - cross.dot(llt_.solve(cross));
    if (variance < 0.0) {
      ++counters.clamped_variances;
      variance = 0.0;
    }
    return {mean, variance};
  }

  KernelParams params_;
  std::size_t dim_ = 1;
  std::vector<double> inputs_;          // full-SE mode
  std::optional<GridSpec> grid_;        // banded mode
  int band_order_ = 0;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::VectorXd weights_;
};

inline DenseGPModel exact_fit(std::span<const double> inputs, std::size_t count,
                              std::span<const double> targets, const KernelParams& params) {
  return DenseGPModel::fit(inputs, count, targets, params);
}

inline PredictiveResult exact_predict(const DenseGPModel& model, std::span<const double> points,
                                      std::size_t count) {
  return model.predict(points, count);
}

}  // namespace swdgp
