#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "swdgp/exact.hpp"
#include "swdgp/gridgp.hpp"
#include "swdgp/latent.hpp"

namespace swdgp {

/// Synthetic target functions used by the benchmark harness.
///   fig2:      x cos(2 pi x) sin[4 pi (x + 0.03)]
///   fig2_text: x cos(2 pi x) sin[24 pi (x + 0.03)]  (sensitivity variant)
///   fig4:      cos(2 pi x) sin(12 pi x)
///   fig5:      x cos[8 pi (x + 0.15)] cos(2 pi x)
///   sim7:      sin(5 pi / (x + 0.1))
enum class TestFunction { fig2, fig2_text, fig4, fig5, sim7 };

inline double evaluate(TestFunction fn, double x) {
  switch (fn) {
    case TestFunction::fig2:
      return x * std::cos(2.0 * M_PI * x) * std::sin(4.0 * M_PI * (x + 0.03));
    case TestFunction::fig2_text:
      return x * std::cos(2.0 * M_PI * x) * std::sin(24.0 * M_PI * (x + 0.03));
    case TestFunction::fig4:
      return std::cos(2.0 * M_PI * x) * std::sin(12.0 * M_PI * x);
    case TestFunction::fig5:
      return x * std::cos(8.0 * M_PI * (x + 0.15)) * std::cos(2.0 * M_PI * x);
    case TestFunction::sim7:
      return std::sin(5.0 * M_PI / (x + 0.1));
  }
  throw std::invalid_argument("evaluate: unknown function id");
}

inline const char* function_name(TestFunction fn) {
  switch (fn) {
    case TestFunction::fig2: return "fig2";
    case TestFunction::fig2_text: return "fig2-text";
    case TestFunction::fig4: return "fig4";
    case TestFunction::fig5: return "fig5";
    case TestFunction::sim7: return "sim7";
  }
  return "?";
}

inline TestFunction parse_function(const std::string& name) {
  if (name == "fig2") return TestFunction::fig2;
  if (name == "fig2-text") return TestFunction::fig2_text;
  if (name == "fig4") return TestFunction::fig4;
  if (name == "fig5") return TestFunction::fig5;
  if (name == "sim7") return TestFunction::sim7;
  throw std::invalid_argument("unknown function id '" + name +
                              "' (expected fig2, fig2-text, fig4, fig5 or sim7)");
}

struct SyntheticSpec {
  TestFunction function = TestFunction::sim7;
  double noise_std = 0.2;
  std::size_t sample_count = 1000;
  std::uint64_t seed = 0;
  int test_point_count = 500;  // evenly spaced over [0, 1]
};

struct Dataset {
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> test_x;
  std::vector<double> test_truth;
};

/// Deterministic synthetic dataset: x ~ U[0,1], y = f(x) + N(0, noise^2),
/// plus the evenly spaced test lattice with true function values.
inline Dataset generate(const SyntheticSpec& spec) {
  Dataset data;
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  data.x.resize(spec.sample_count);
  data.y.resize(spec.sample_count);
  for (auto& v : data.x) v = uniform(rng);
  for (std::size_t i = 0; i < spec.sample_count; ++i) {
    double noise = spec.noise_std > 0.0 ? spec.noise_std * gauss(rng) : 0.0;
    data.y[i] = evaluate(spec.function, data.x[i]) + noise;
  }
  data.test_x.resize(spec.test_point_count);
  data.test_truth.resize(spec.test_point_count);
  for (int i = 0; i < spec.test_point_count; ++i) {
    const double t = spec.test_point_count > 1
                         ? static_cast<double>(i) / (spec.test_point_count - 1)
                         : 0.0;
    data.test_x[i] = t;
    data.test_truth[i] = evaluate(spec.function, t);
  }
  return data;
}

/// On-grid variant: training inputs are the nodes of an evenly spaced grid
/// over [0,1]; only the noise stream is drawn from the seed.
inline Dataset generate_on_grid(const SyntheticSpec& spec) {
  Dataset data;
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const std::size_t n = spec.sample_count;
  data.x.resize(n);
  data.y.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    data.x[i] = n > 1 ? static_cast<double>(i) / (n - 1) : 0.0;
    double noise = spec.noise_std > 0.0 ? spec.noise_std * gauss(rng) : 0.0;
    data.y[i] = evaluate(spec.function, data.x[i]) + noise;
  }
  data.test_x.resize(spec.test_point_count);
  data.test_truth.resize(spec.test_point_count);
  for (int i = 0; i < spec.test_point_count; ++i) {
    const double t = spec.test_point_count > 1
                         ? static_cast<double>(i) / (spec.test_point_count - 1)
                         : 0.0;
    data.test_x[i] = t;
    data.test_truth[i] = evaluate(spec.function, t);
  }
  return data;
}

/// Standardized mean squared error: MSE divided by the population variance
/// of the true values.
inline double smse(std::span<const double> predictions, std::span<const double> truths) {
  if (predictions.size() != truths.size() || truths.size() < 2)
    throw std::invalid_argument("smse: need two equal-length vectors of size >= 2");
  double mean = 0.0;
  for (double t : truths) mean += t;
  mean /= truths.size();
  double var = 0.0, mse = 0.0;
  for (std::size_t i = 0; i < truths.size(); ++i) {
    var += (truths[i] - mean) * (truths[i] - mean);
    mse += (predictions[i] - truths[i]) * (predictions[i] - truths[i]);
  }
  var /= truths.size();
  mse /= truths.size();
  if (var == 0.0) throw std::invalid_argument("smse: truth values have zero variance");
  return mse / var;
}

/// Per-region accuracy over the five equal regions of [0,1].
struct RegionStats {
  std::size_t test_count = 0;
  std::size_t train_count = 0;  // training points falling in the region
  double mse = 0.0;
  double truth_variance = 0.0;
  double smse = 0.0;
};

struct BenchReport {
  std::string method;
  std::string function;
  std::size_t n = 0;
  int grid_size = 0;
  int band_order = 0;
  int order = 0;
  std::uint64_t seed = 0;
  double length_scale = 0.0;
  double signal_variance = 0.0;
  double noise_variance = 0.0;
  double mse = 0.0;
  double truth_variance = 0.0;
  double smse = 0.0;
  std::array<RegionStats, 5> regions{};
  double fit_seconds = 0.0;
  double predict_seconds = 0.0;
  std::size_t variance_clamps = 0;
  std::size_t lambda_floors = 0;
  std::optional<ResidualDiagnostic> diagnostic;
};

struct BenchConfig {
  std::vector<std::string> methods{"lgswd-3"};
  std::vector<std::size_t> n_schedule{1000};
  std::vector<std::uint64_t> seeds{0};
  TestFunction function = TestFunction::sim7;
  int grid_size = 300;         // inducing nodes for the latent-grid methods
  int band_order = 3;          // band for swd-grid
  int order = 1;               // perturbation order for the latent-grid methods
  double signal_std = 0.5;
  double noise_std = 0.2;
  std::optional<double> length_scale;  // default: auto per method
  int test_point_count = 500;
  int repetitions = 3;
  std::size_t exact_cap = 5000;
};

namespace detail {

inline double auto_length_scale(int band_order, int grid_size, double spacing) {
  const double bound = max_length_scale_ratio(band_order, grid_size);
  if (!std::isfinite(bound))
    throw std::invalid_argument("auto length scale: admissibility bound is unbounded");
  return 0.75 * bound * spacing;
}

inline int region_of(double x) { return std::min(4, static_cast<int>(x * 5.0)); }

template <typename F>
double median_seconds(int repetitions, F&& body) {
  std::vector<double> times;
  times.reserve(repetitions);
  for (int r = 0; r < repetitions; ++r) {
    const auto start = std::chrono::steady_clock::now();
    body();
    const auto stop = std::chrono::steady_clock::now();
    times.push_back(std::chrono::duration<double>(stop - start).count());
  }
  std::sort(times.begin(), times.end());
  return times[times.size() / 2];
}

inline void fill_accuracy(BenchReport& report, const Dataset& data,
                          std::span<const double> predictions) {
  const std::size_t t = data.test_truth.size();
  double mean = 0.0;
  for (double v : data.test_truth) mean += v;
  mean /= t;

  std::array<double, 5> sq{}, tsum{}, tsq{};
  std::array<std::size_t, 5> cnt{};
  double total_sq = 0.0, total_var = 0.0;
  for (std::size_t i = 0; i < t; ++i) {
    const int r = region_of(data.test_x[i]);
    const double e = predictions[i] - data.test_truth[i];
    sq[r] += e * e;
    tsum[r] += data.test_truth[i];
    tsq[r] += data.test_truth[i] * data.test_truth[i];
    ++cnt[r];
    total_sq += e * e;
    total_var += (data.test_truth[i] - mean) * (data.test_truth[i] - mean);
  }
  report.mse = total_sq / t;
  report.truth_variance = total_var / t;
  report.smse = report.mse / report.truth_variance;
  for (int r = 0; r < 5; ++r) {
    RegionStats& rs = report.regions[r];
    rs.test_count = cnt[r];
    if (cnt[r] == 0) continue;
    rs.mse = sq[r] / cnt[r];
    const double m = tsum[r] / cnt[r];
    rs.truth_variance = tsq[r] / cnt[r] - m * m;
    rs.smse = rs.truth_variance > 0.0 ? rs.mse / rs.truth_variance : 0.0;
  }
  for (double x : data.x) ++report.regions[region_of(x)].train_count;
}

}  // namespace detail

/// Runs the benchmark protocol: one report per (method, n, seed). Timing is
/// the median over config.repetitions and excludes data generation. Methods:
/// "exact" (capped at exact_cap points), "swd-grid" (training data on an
/// n-node grid), "lgswd-3" and "lgswd-5".
inline std::vector<BenchReport> run_benchmark(const BenchConfig& config) {
  for (const std::string& method : config.methods) {
    if (method != "exact" && method != "swd-grid" && method != "lgswd-3" &&
        method != "lgswd-5")
      throw std::invalid_argument("unknown method '" + method +
                                  "' (expected exact, swd-grid, lgswd-3 or lgswd-5)");
    if (method == "exact")
      for (std::size_t n : config.n_schedule)
        if (n > config.exact_cap)
          throw std::invalid_argument(
              "exact method refused at N = " + std::to_string(n) + ": dense fit is O(N^3), "
              "capped at " + std::to_string(config.exact_cap) + " training points");
  }

  std::vector<BenchReport> reports;
  const double s2 = config.signal_std * config.signal_std;
  const double sn2 = config.noise_std * config.noise_std;

  for (const std::string& method : config.methods) {
    for (std::size_t n : config.n_schedule) {
      for (std::uint64_t seed : config.seeds) {
        SyntheticSpec spec;
        spec.function = config.function;
        spec.noise_std = config.noise_std;
        spec.sample_count = n;
        spec.seed = seed;
        spec.test_point_count = config.test_point_count;

        BenchReport report;
        report.method = method;
        report.function = function_name(config.function);
        report.n = n;
        report.seed = seed;
        report.order = config.order;
        report.signal_variance = s2;
        report.noise_variance = sn2;

        std::vector<double> predictions;

        if (method == "exact") {
          const Dataset data = generate(spec);
          const int m = config.grid_size;
          const double spacing = 1.0 / (m - 1);
          const double ell = config.length_scale
                                 ? *config.length_scale
                                 : detail::auto_length_scale(3, m, spacing);
          report.grid_size = 0;
          report.band_order = 0;
          report.length_scale = ell;
          const KernelParams params = KernelParams::isotropic(s2, ell, 1, sn2);
          std::optional<DenseGPModel> model;
          report.fit_seconds = detail::median_seconds(config.repetitions, [&] {
            model = DenseGPModel::fit(data.x, data.x.size(), data.y, params);
          });
          PredictiveResult result;
          report.predict_seconds = detail::median_seconds(config.repetitions, [&] {
            result = model->predict(data.test_x, data.test_x.size());
          });
          report.variance_clamps = result.clamped_variances;
          predictions = result.mean;
          detail::fill_accuracy(report, data, predictions);
        } else if (method == "swd-grid") {
          const Dataset data = generate_on_grid(spec);
          const GridSpec grid = GridSpec::spanning_1d(0.0, 1.0, static_cast<int>(n));
          const double ell =
              config.length_scale
                  ? *config.length_scale
                  : detail::auto_length_scale(config.band_order, static_cast<int>(n),
                                              grid.axes[0].spacing);
          report.grid_size = static_cast<int>(n);
          report.band_order = config.band_order;
          report.length_scale = ell;
          const KernelParams params = KernelParams::isotropic(s2, ell);
          std::optional<GridGPModel> model;
          report.fit_seconds = detail::median_seconds(config.repetitions, [&] {
            model = grid_fit(grid, data.y, params, config.band_order);
          });
          PredictiveResult result;
          report.predict_seconds = detail::median_seconds(config.repetitions, [&] {
            result = grid_predict_fft(*model, data.test_x, data.test_x.size());
          });
          report.variance_clamps = result.clamped_variances;
          predictions = result.mean;
          detail::fill_accuracy(report, data, predictions);
        } else {
          const int band = method == "lgswd-5" ? 5 : 3;
          const Dataset data = generate(spec);
          const GridSpec grid = GridSpec::spanning_1d(0.0, 1.0, config.grid_size);
          const double ell = config.length_scale
                                 ? *config.length_scale
                                 : detail::auto_length_scale(band, config.grid_size,
                                                             grid.axes[0].spacing);
          report.grid_size = config.grid_size;
          report.band_order = band;
          report.length_scale = ell;
          const KernelParams params = KernelParams::isotropic(s2, ell, 1, sn2);
          std::optional<LatentProjection> model;
          report.fit_seconds = detail::median_seconds(config.repetitions, [&] {
            model = latent_fit(data.x, data.y, grid, params, band, config.order);
          });
          PredictiveResult result;
          report.predict_seconds = detail::median_seconds(config.repetitions, [&] {
            result = latent_predict(*model, data.test_x);
          });
          report.variance_clamps = result.clamped_variances;
          report.lambda_floors = model->lambda_floor_count();
          report.diagnostic = residual_diagnostic(*model);
          predictions = result.mean;
          detail::fill_accuracy(report, data, predictions);
        }

        reports.push_back(std::move(report));
      }
    }
  }
  return reports;
}

}  // namespace swdgp
