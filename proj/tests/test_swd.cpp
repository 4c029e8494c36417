#include <swdgp/swd.hpp>

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "oracles.hpp"

using swdgp::GridSpec;
using swdgp::KernelParams;
using swdgp::SWDEigensystem;

namespace {

double ratio_for_alpha(double alpha) { return 1.0 / std::sqrt(2.0 * std::log(1.0 / alpha)); }

SWDEigensystem eig_for_alpha(int m, double alpha, double s2, int band) {
  return swdgp::build_eigensystem(m, KernelParams::isotropic(s2, ratio_for_alpha(alpha)),
                                  1.0, band);
}

std::vector<double> banded_dense_for_alpha(int m, double alpha, double s2, int band) {
  const auto banded = swdgp::banded_grid_kernel(
      GridSpec::uniform_1d(0.0, 1.0, m),
      KernelParams::isotropic(s2, ratio_for_alpha(alpha)), band);
  return banded.dense();
}

}  // namespace

TEST(Eigensystem, SingleNode) {
  const auto eig = eig_for_alpha(1, 0.4, 2.0, 3);
  EXPECT_NEAR(eig.angles[0], M_PI / 2.0, 1e-15);
  EXPECT_NEAR(eig.eigenvalues[0], 2.0, 1e-15);
}

TEST(Eigensystem, TwoNodeClosedForm) {
  const auto eig = eig_for_alpha(2, 0.4, 1.0, 3);
  EXPECT_NEAR(eig.angles[0], M_PI / 3.0, 1e-15);
  EXPECT_NEAR(eig.angles[1], 2.0 * M_PI / 3.0, 1e-15);
  EXPECT_NEAR(eig.eigenvalues[0], 1.4, 1e-14);
  EXPECT_NEAR(eig.eigenvalues[1], 0.6, 1e-14);
}

TEST(Eigensystem, AnglesPairToPi) {
  const auto eig = eig_for_alpha(20, 0.3, 1.0, 3);
  for (int k = 0; k < 20; ++k)
    EXPECT_NEAR(eig.angles[k] + eig.angles[19 - k], M_PI, 1e-14);
}

TEST(Eigensystem, MatchesDenseSolver) {
  // ratio 0.54 setting; eigenvalues sorted and compared against Eigen.
  const double alpha = std::exp(-1.0 / (2.0 * 0.54 * 0.54));
  const auto eig = eig_for_alpha(20, alpha, 1.0, 3);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
      oracles::to_eigen(banded_dense_for_alpha(20, alpha, 1.0, 3), 20));
  std::vector<double> ours(eig.eigenvalues);
  std::sort(ours.begin(), ours.end());
  for (int k = 0; k < 20; ++k) EXPECT_NEAR(ours[k], es.eigenvalues()(k), 1e-12);
}

TEST(Eigensystem, InadmissibleThrows) {
  EXPECT_THROW(eig_for_alpha(50, 0.6, 1.0, 3), swdgp::PositivityError);
}

TEST(Eigenvector, SingleNodeComponent) {
  EXPECT_NEAR(swdgp::eigenvector_component(0, 0, 1), 1.0, 1e-15);
}

TEST(Eigenvector, IndexOutOfRangeThrows) {
  EXPECT_THROW(swdgp::eigenvector_component(5, 0, 5), std::out_of_range);
  EXPECT_THROW(swdgp::eigenvector_component(0, -1, 5), std::out_of_range);
}

TEST(Eigenvector, PairSymmetry) {
  const int m = 20;
  for (int k = 0; k < m; ++k)
    for (int j = 0; j < m; ++j) {
      const double sign = j % 2 == 0 ? 1.0 : -1.0;
      EXPECT_NEAR(swdgp::eigenvector_component(k, j, m),
                  sign * swdgp::eigenvector_component(m - 1 - k, j, m), 1e-12);
    }
}

TEST(Eigenvector, OrthonormalByDirectSummation) {
  const int m = 5;
  for (int k = 0; k < m; ++k)
    for (int l = 0; l < m; ++l) {
      double dot = 0.0;
      for (int j = 0; j < m; ++j)
        dot += swdgp::eigenvector_component(k, j, m) * swdgp::eigenvector_component(l, j, m);
      EXPECT_NEAR(dot, k == l ? 1.0 : 0.0, 1e-12);
    }
}

TEST(Eigenvector, OrthonormalityLargeGrids) {
  for (int m : {50, 200}) {
    double worst = 0.0;
    for (int k = 0; k < m; ++k)
      for (int l = k; l < m; ++l) {
        double dot = 0.0;
        for (int j = 0; j < m; ++j)
          dot +=
              swdgp::eigenvector_component(k, j, m) * swdgp::eigenvector_component(l, j, m);
        worst = std::max(worst, std::abs(dot - (k == l ? 1.0 : 0.0)));
      }
    EXPECT_LT(worst, 1e-10) << "M = " << m;
  }
}

TEST(Eigenvector, ExactDiagonalizationBothBands) {
  for (int band : {3, 5}) {
    const double alpha = band == 3 ? 0.45 : 0.6;
    const int m = 30;
    const auto eig = eig_for_alpha(m, alpha, 1.3, band);
    const auto dense = banded_dense_for_alpha(m, alpha, 1.3, band);
    for (int k = 0; k < m; ++k) {
      double worst = 0.0;
      for (int i = 0; i < m; ++i) {
        double kv = 0.0;
        for (int j = 0; j < m; ++j)
          kv += dense[static_cast<std::size_t>(i) * m + j] *
                swdgp::eigenvector_component(k, j, m);
        worst = std::max(
            worst, std::abs(kv - eig.eigenvalues[k] * swdgp::eigenvector_component(k, i, m)));
      }
      EXPECT_LT(worst, 1e-10) << "band " << band << " mode " << k;
    }
  }
}

TEST(Transform, FirstEigenvectorMapsToUnitCoordinate) {
  const int m = 24;
  std::vector<double> v(m);
  for (int j = 0; j < m; ++j) v[j] = swdgp::eigenvector_component(0, j, m);
  const auto w = swdgp::eigenvector_transform(v);
  const double norm = std::sqrt(0.5 * (m + 1));
  EXPECT_NEAR(w[0], norm, 1e-12);
  for (int k = 1; k < m; ++k) EXPECT_NEAR(w[k], 0.0, 1e-12);
}

TEST(Transform, ZeroMapsToZero) {
  std::vector<double> zeros(17, 0.0);
  for (double w : swdgp::eigenvector_transform(zeros)) EXPECT_DOUBLE_EQ(w, 0.0);
}

TEST(Transform, FastMatchesDirect) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int m : {1, 2, 7, 63, 64, 1000}) {
    std::vector<double> y(m);
    for (auto& v : y) v = g(rng);
    const auto direct = swdgp::eigenvector_transform_direct(y);
    const auto fast = swdgp::eigenvector_transform_fast(y);
    double scale = 0.0;
    for (double v : direct) scale = std::max(scale, std::abs(v));
    for (int k = 0; k < m; ++k)
      EXPECT_NEAR(fast[k], direct[k], 1e-10 * std::max(1.0, scale)) << "M = " << m;
  }
}

TEST(Transform, FastMatchesDirectLarge) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g(0.0, 1.0);
  const int m = 4096;
  std::vector<double> y(m);
  for (auto& v : y) v = g(rng);
  const auto direct = swdgp::eigenvector_transform_direct(y);
  const auto fast = swdgp::eigenvector_transform_fast(y);
  double scale = 0.0, worst = 0.0;
  for (double v : direct) scale = std::max(scale, std::abs(v));
  for (int k = 0; k < m; ++k) worst = std::max(worst, std::abs(fast[k] - direct[k]));
  EXPECT_LT(worst / scale, 1e-10);
}

TEST(ApplyInverse, DiagonalLimit) {
  // ratio 0.01 underflows alpha to exactly zero, so K = sigma^2 I.
  const int m = 12;
  const auto eig = swdgp::build_eigensystem(m, KernelParams::isotropic(2.0, 0.01), 1.0, 3);
  ASSERT_EQ(eig.alpha, 0.0);
  std::vector<double> y(m);
  for (int j = 0; j < m; ++j) y[j] = std::sin(0.7 * j) + 0.2 * j;
  const auto x = swdgp::apply_inverse(eig, y);
  for (int j = 0; j < m; ++j) EXPECT_NEAR(x[j], y[j] / 2.0, 1e-12);
}

TEST(ApplyInverse, MatchesDenseSolve) {
  const int m = 10;
  const double alpha = 0.35;
  const auto eig = eig_for_alpha(m, alpha, 1.0, 3);
  const auto dense = banded_dense_for_alpha(m, alpha, 1.0, 3);
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> y(m);
  for (auto& v : y) v = g(rng);
  const auto ours = swdgp::apply_inverse(eig, y);
  const auto ref = oracles::solve_dense(dense, y);
  for (int j = 0; j < m; ++j) EXPECT_NEAR(ours[j], ref[j], 1e-10);
}

TEST(ApplyInverse, ColumnOfKernelGivesUnitVector) {
  const int m = 15;
  const double alpha = 0.4;
  const auto eig = eig_for_alpha(m, alpha, 1.0, 3);
  const auto banded = swdgp::banded_grid_kernel(
      GridSpec::uniform_1d(0.0, 1.0, m), KernelParams::isotropic(1.0, ratio_for_alpha(alpha)),
      3);
  const int col = 6;
  std::vector<double> y(m, 0.0);
  for (int i = 0; i < m; ++i) y[i] = banded.at(i, col);
  const auto e = swdgp::apply_inverse(eig, y);
  for (int i = 0; i < m; ++i) EXPECT_NEAR(e[i], i == col ? 1.0 : 0.0, 1e-8);
}

TEST(ApplyInverse, RoundTripThroughBandedMultiply) {
  const int m = 40;
  const double alpha = 0.45;
  const auto eig = eig_for_alpha(m, alpha, 1.7, 5);
  const auto banded = swdgp::banded_grid_kernel(
      GridSpec::uniform_1d(0.0, 1.0, m), KernelParams::isotropic(1.7, ratio_for_alpha(alpha)),
      5);
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> y(m);
  for (auto& v : y) v = g(rng);
  const auto x = swdgp::apply_inverse(eig, y);
  std::vector<double> back(m);
  banded.multiply(x, back);
  double scale = 0.0;
  for (double v : y) scale = std::max(scale, std::abs(v));
  for (int i = 0; i < m; ++i) EXPECT_NEAR(back[i], y[i], 1e-8 * scale);
}

TEST(ApplyInverse, LengthMismatchThrows) {
  const auto eig = eig_for_alpha(4, 0.3, 1.0, 3);
  std::vector<double> y(5, 0.0);
  EXPECT_THROW(swdgp::apply_inverse(eig, y), std::invalid_argument);
}

TEST(ReconstructionCoefficient, SpecialSetGivesGridSize) {
  EXPECT_DOUBLE_EQ(swdgp::reconstruction_coefficient(0, 7), 7.0);
  EXPECT_DOUBLE_EQ(swdgp::reconstruction_coefficient(16, 7), 7.0);  // one full period
  EXPECT_DOUBLE_EQ(swdgp::reconstruction_coefficient(-16, 7), 7.0);
}

TEST(ReconstructionCoefficient, MatchesDirectSummation) {
  for (int m : {2, 5, 10}) {
    for (long long p = -25; p <= 40; ++p) {
      EXPECT_NEAR(swdgp::reconstruction_coefficient(p, m), oracles::cosine_sum_direct(p, m),
                  1e-10)
          << "p = " << p << " M = " << m;
    }
  }
}

TEST(ReconstructionCoefficient, ParityValues) {
  // Off the special set the sum is -1 for even arguments and 0 for odd ones;
  // frozen from the direct-summation oracle.
  EXPECT_NEAR(oracles::cosine_sum_direct(4, 10), -1.0, 1e-12);
  EXPECT_DOUBLE_EQ(swdgp::reconstruction_coefficient(4, 10), -1.0);
  EXPECT_NEAR(oracles::cosine_sum_direct(3, 10), 0.0, 1e-12);
  EXPECT_DOUBLE_EQ(swdgp::reconstruction_coefficient(3, 10), 0.0);
}

TEST(ReconstructedMatrix, EqualsPentadiagonalClosedForm) {
  for (int m : {4, 10, 50}) {
    const double alpha = 0.3;
    const auto eig = eig_for_alpha(m, alpha, 1.0, 5);
    const auto rebuilt = swdgp::reconstructed_matrix(eig);
    const auto closed = banded_dense_for_alpha(m, alpha, 1.0, 5);
    for (std::size_t i = 0; i < closed.size(); ++i)
      EXPECT_NEAR(rebuilt[i], closed[i], 1e-12) << "M = " << m << " flat index " << i;
  }
}

TEST(ReconstructedMatrix, CornersCarryAlphaFourthCorrection) {
  const auto eig = eig_for_alpha(4, 0.3, 1.0, 5);
  const auto rebuilt = swdgp::reconstructed_matrix(eig);
  const double a4 = 0.3 * 0.3 * 0.3 * 0.3;
  EXPECT_NEAR(rebuilt[0], 1.0 - a4, 1e-13);
  EXPECT_NEAR(rebuilt[15], 1.0 - a4, 1e-13);
}

TEST(ReconstructedMatrix, VanishingAlphaGivesDiagonal) {
  const auto eig = swdgp::build_eigensystem(6, KernelParams::isotropic(1.5, 0.01), 1.0, 5);
  ASSERT_EQ(eig.alpha, 0.0);
  const auto rebuilt = swdgp::reconstructed_matrix(eig);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j)
      EXPECT_NEAR(rebuilt[static_cast<std::size_t>(i) * 6 + j], i == j ? 1.5 : 0.0, 1e-12);
}

TEST(ReconstructedMatrix, EigenResidualAtLongRatio) {
  // ratio 0.76 (the pentadiagonal regime): K~ v_k = lambda_k v_k to 1e-10.
  const int m = 20;
  const double alpha = std::exp(-1.0 / (2.0 * 0.76 * 0.76));
  const auto eig = eig_for_alpha(m, alpha, 1.0, 5);
  const auto rebuilt = swdgp::reconstructed_matrix(eig);
  for (int k = 0; k < m; ++k) {
    double worst = 0.0;
    for (int i = 0; i < m; ++i) {
      double kv = 0.0;
      for (int j = 0; j < m; ++j)
        kv += rebuilt[static_cast<std::size_t>(i) * m + j] *
              swdgp::eigenvector_component(k, j, m);
      worst = std::max(
          worst, std::abs(kv - eig.eigenvalues[k] * swdgp::eigenvector_component(k, i, m)));
    }
    EXPECT_LT(worst, 1e-10) << "mode " << k;
  }
}

TEST(ReconstructedMatrix, TridiagonalUnsupported) {
  const auto eig = eig_for_alpha(5, 0.3, 1.0, 3);
  EXPECT_THROW(swdgp::reconstructed_matrix(eig), std::invalid_argument);
}
