#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <swdgp/swdgp.hpp>

namespace {

using nlohmann::json;

constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

struct CommonOptions {
  std::string input;
  std::string output;
  int grid_size = 300;
  int band_order = 3;
  int order = 1;
  double signal_std = 1.0;
  double noise_std = 0.0;
  std::optional<double> length_scale;
  bool auto_length_scale = false;
  int test_points = 500;
  std::uint64_t seed = 0;
  std::string format = "csv";
};

double resolve_length_scale(const CommonOptions& opt, int band, int grid_size,
                            double spacing) {
  if (opt.length_scale) return *opt.length_scale;
  return swdgp::detail::auto_length_scale(band, grid_size, spacing);
}

json config_json(const std::string& subcommand, const CommonOptions& opt, double ell,
                 const swdgp::GridSpec& grid) {
  json j;
  j["subcommand"] = subcommand;
  j["input"] = opt.input;
  j["grid_size"] = grid.axes[0].count;
  j["grid_origin"] = grid.axes[0].origin;
  j["grid_spacing"] = grid.axes[0].spacing;
  j["band"] = opt.band_order;
  j["order"] = opt.order;
  j["length_scale"] = ell;
  j["signal_std"] = opt.signal_std;
  j["noise_std"] = opt.noise_std;
  j["test_points"] = opt.test_points;
  return j;
}

std::vector<double> test_lattice(const swdgp::GridSpec& grid, int count) {
  const auto& ax = grid.axes[0];
  const double lo = ax.origin;
  const double hi = ax.node(ax.count - 1);
  std::vector<double> xs(count);
  for (int i = 0; i < count; ++i)
    xs[i] = count > 1 ? lo + (hi - lo) * i / (count - 1) : lo;
  return xs;
}

void write_predictions(const std::string& path, const std::string& format,
                       const json& config, std::span<const double> xs,
                       const swdgp::PredictiveResult& result) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot open output file '" + path + "'");
  const bool with_fvar = !result.function_variance.empty();
  if (format == "json") {
    json j;
    j["config"] = config;
    j["x"] = xs;
    j["mean"] = result.mean;
    j["variance"] = result.variance;
    if (with_fvar) j["function_variance"] = result.function_variance;
    j["variance_clamps"] = result.clamped_variances;
    out << j.dump(2) << "\n";
    return;
  }
  out << "# config: " << config.dump() << "\n";
  out << "x,mean,variance";
  if (with_fvar) out << ",function_variance";
  out << "\n";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    out << swdgp::format_double(xs[i]) << ',' << swdgp::format_double(result.mean[i]) << ','
        << swdgp::format_double(result.variance[i]);
    if (with_fvar) out << ',' << swdgp::format_double(result.function_variance[i]);
    out << "\n";
  }
}

int run_fit_grid(const CommonOptions& opt, std::optional<double> spacing_flag) {
  swdgp::XYTable table = swdgp::read_xy_csv_file(opt.input);
  if (table.dim != 1)
    throw std::invalid_argument("fit-grid expects one x column, got " +
                                std::to_string(table.dim));
  const int m = opt.grid_size;
  if (static_cast<int>(table.rows) != m)
    throw std::invalid_argument("fit-grid: input has " + std::to_string(table.rows) +
                                " rows but --grid-size is " + std::to_string(m));

  std::vector<std::size_t> order(table.rows);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return table.x[a] < table.x[b]; });

  double spacing;
  double origin = m > 0 ? table.x[order.front()] : 0.0;
  if (m == 1) {
    spacing = spacing_flag.value_or(1.0);
    if (!spacing_flag)
      std::cerr << "warning: single-row grid, assuming --grid-spacing 1.0\n";
  } else {
    spacing = spacing_flag.value_or((table.x[order.back()] - origin) / (m - 1));
  }
  if (spacing <= 0.0) throw std::invalid_argument("fit-grid: grid spacing must be > 0");

  const swdgp::GridSpec grid = swdgp::GridSpec::uniform_1d(origin, spacing, m);
  std::vector<double> y(m);
  for (int j = 0; j < m; ++j) {
    const std::size_t row = order[j];
    const double expected = grid.axes[0].node(j);
    if (std::abs(table.x[row] - expected) > 1e-9 * spacing)
      throw std::invalid_argument(
          "fit-grid: input row " + std::to_string(row + 1) + " (x = " +
          swdgp::format_double(table.x[row]) + ") is off-grid; nearest node at " +
          swdgp::format_double(expected));
    y[j] = table.y[row];
  }

  const double ell = resolve_length_scale(opt, opt.band_order, m, spacing);
  const auto params =
      swdgp::KernelParams::isotropic(opt.signal_std * opt.signal_std, ell);
  const swdgp::GridGPModel model = swdgp::grid_fit(grid, y, params, opt.band_order);
  const std::vector<double> xs = test_lattice(grid, opt.test_points);
  const swdgp::PredictiveResult result = swdgp::grid_predict(model, xs, xs.size());

  write_predictions(opt.output, opt.format, config_json("fit-grid", opt, ell, grid), xs,
                    result);
  return 0;
}

int run_fit_latent(const CommonOptions& opt, std::optional<double> grid_min,
                   std::optional<double> grid_max) {
  swdgp::XYTable table = swdgp::read_xy_csv_file(opt.input);
  if (table.rows > 0 && table.dim != 1)
    throw std::invalid_argument("fit-latent expects one x column, got " +
                                std::to_string(table.dim));
  if (opt.noise_std <= 0.0)
    throw std::invalid_argument(
        "fit-latent: --noise-std must be > 0 (the data projection needs Lambda^-1)");
  if (table.rows == 0)
    std::cerr << "warning: empty input, predictions revert to the prior\n";

  double lo = grid_min.value_or(0.0), hi = grid_max.value_or(1.0);
  if (!grid_min && table.rows >= 2) {
    lo = *std::min_element(table.x.begin(), table.x.end());
    hi = *std::max_element(table.x.begin(), table.x.end());
  }
  if (hi <= lo) throw std::invalid_argument("fit-latent: grid span is empty");
  const swdgp::GridSpec grid = swdgp::GridSpec::spanning_1d(lo, hi, opt.grid_size);

  const double ell =
      resolve_length_scale(opt, opt.band_order, opt.grid_size, grid.axes[0].spacing);
  const auto params = swdgp::KernelParams::isotropic(
      opt.signal_std * opt.signal_std, ell, 1, opt.noise_std * opt.noise_std);
  const swdgp::LatentProjection model =
      swdgp::latent_fit(table.x, table.y, grid, params, opt.band_order, opt.order);
  const std::vector<double> xs = test_lattice(grid, opt.test_points);
  const swdgp::PredictiveResult result = swdgp::latent_predict(model, xs);

  const json config = config_json("fit-latent", opt, ell, grid);
  write_predictions(opt.output, opt.format, config, xs, result);

  json sidecar;
  sidecar["config"] = config;
  sidecar["gbar"] = model.projected_means();
  std::vector<double> chi(opt.grid_size);
  for (int k = 0; k < opt.grid_size; ++k) chi[k] = model.chi(k);
  sidecar["chi"] = chi;
  sidecar["lambda_floor_count"] = model.lambda_floor_count();
  const swdgp::ResidualDiagnostic diag = swdgp::residual_diagnostic(model);
  sidecar["residual_diagnostic"] = {
      {"diag_mean", diag.diag_mean},
      {"offdiag_mean", diag.offdiag_mean},
      {"diag_std_ratio", diag.diag_std_ratio},
      {"offdiag_std_ratio", diag.offdiag_std_ratio},
      {"residual_max", diag.residual_max},
      {"threshold", diag.threshold},
      {"perturbation_valid", diag.perturbation_valid}};
  std::ofstream side(opt.output + ".meta.json");
  if (!side)
    throw std::invalid_argument("cannot open sidecar file '" + opt.output + ".meta.json'");
  side << sidecar.dump(2) << "\n";
  return 0;
}

json report_json(const swdgp::BenchReport& r, bool include_timing) {
  json j;
  j["method"] = r.method;
  j["function"] = r.function;
  j["n"] = r.n;
  j["grid_size"] = r.grid_size;
  j["band_order"] = r.band_order;
  j["order"] = r.order;
  j["seed"] = r.seed;
  j["length_scale"] = r.length_scale;
  j["signal_variance"] = r.signal_variance;
  j["noise_variance"] = r.noise_variance;
  j["smse"] = r.smse;
  j["mse"] = r.mse;
  j["truth_variance"] = r.truth_variance;
  j["regions"] = json::array();
  for (const auto& region : r.regions)
    j["regions"].push_back({{"test_count", region.test_count},
                            {"train_count", region.train_count},
                            {"mse", region.mse},
                            {"truth_variance", region.truth_variance},
                            {"smse", region.smse}});
  j["fit_seconds"] = include_timing ? r.fit_seconds : 0.0;
  j["predict_seconds"] = include_timing ? r.predict_seconds : 0.0;
  j["variance_clamps"] = r.variance_clamps;
  j["lambda_floors"] = r.lambda_floors;
  if (r.diagnostic)
    j["residual_diagnostic"] = {{"diag_mean", r.diagnostic->diag_mean},
                                {"offdiag_mean", r.diagnostic->offdiag_mean},
                                {"diag_std_ratio", r.diagnostic->diag_std_ratio},
                                {"offdiag_std_ratio", r.diagnostic->offdiag_std_ratio},
                                {"residual_max", r.diagnostic->residual_max},
                                {"perturbation_valid", r.diagnostic->perturbation_valid}};
  return j;
}

int run_bench(const swdgp::BenchConfig& config, const std::string& output_csv,
              const std::string& output_json, bool deterministic) {
  const std::vector<swdgp::BenchReport> reports = swdgp::run_benchmark(config);

  json cfg;
  cfg["subcommand"] = "bench";
  cfg["function"] = swdgp::function_name(config.function);
  cfg["methods"] = config.methods;
  cfg["n_schedule"] = config.n_schedule;
  cfg["seeds"] = config.seeds;
  cfg["grid_size"] = config.grid_size;
  cfg["band"] = config.band_order;
  cfg["order"] = config.order;
  cfg["signal_std"] = config.signal_std;
  cfg["noise_std"] = config.noise_std;
  if (config.length_scale) cfg["length_scale"] = *config.length_scale;
  else cfg["length_scale"] = "auto";
  cfg["test_points"] = config.test_point_count;
  cfg["repetitions"] = config.repetitions;
  cfg["deterministic"] = deterministic;

  if (!output_csv.empty()) {
    std::ofstream out(output_csv);
    if (!out) throw std::invalid_argument("cannot open output file '" + output_csv + "'");
    swdgp::write_bench_csv(out, reports, cfg.dump(), !deterministic);
  }
  if (!output_json.empty()) {
    std::ofstream out(output_json);
    if (!out) throw std::invalid_argument("cannot open output file '" + output_json + "'");
    json j;
    j["config"] = cfg;
    j["reports"] = json::array();
    for (const auto& r : reports) j["reports"].push_back(report_json(r, !deterministic));
    out << j.dump(2) << "\n";
  }
  if (output_csv.empty() && output_json.empty())
    swdgp::write_bench_csv(std::cout, reports, cfg.dump(), !deterministic);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Standing-wave-decomposition Gaussian process regression"};
  app.require_subcommand(1);

  CommonOptions opt;
  std::optional<double> grid_spacing, grid_min, grid_max, length_scale_flag;
  bool auto_ell = false;

  auto add_common = [&](CLI::App* cmd, bool needs_io) {
    if (needs_io) {
      cmd->add_option("--input", opt.input, "input CSV of (x, y) rows")->required();
      cmd->add_option("--output", opt.output, "output prediction file")->required();
    }
    cmd->add_option("--grid-size", opt.grid_size, "number of grid nodes M");
    cmd->add_option("--band", opt.band_order, "band order of the kernel approximation")
        ->check(CLI::IsMember({3, 5}));
    auto* ls = cmd->add_option("--length-scale", length_scale_flag, "SE kernel length scale");
    cmd->add_flag("--auto-length-scale", auto_ell,
                  "set the length scale to 0.75x the admissible maximum")
        ->excludes(ls);
    cmd->add_option("--signal-std", opt.signal_std, "SE kernel signal standard deviation");
    cmd->add_option("--noise-std", opt.noise_std, "observation noise standard deviation");
    cmd->add_option("--seed", opt.seed, "random seed");
    cmd->add_option("--test-points", opt.test_points, "number of evenly spaced test points");
    cmd->add_option("--format", opt.format, "output format")
        ->check(CLI::IsMember({"csv", "json"}));
  };

  CLI::App* fit_grid = app.add_subcommand("fit-grid", "fit on-grid data with SWD-GP");
  add_common(fit_grid, true);
  fit_grid->add_option("--grid-spacing", grid_spacing,
                       "grid spacing (default: inferred from the input span)");

  CLI::App* fit_latent =
      app.add_subcommand("fit-latent", "fit arbitrary 1-D data with a latent grid");
  add_common(fit_latent, true);
  fit_latent->add_option("--order", opt.order, "perturbation order")
      ->check(CLI::IsMember({1, 2}));
  fit_latent->add_option("--grid-min", grid_min, "latent grid lower bound");
  fit_latent->add_option("--grid-max", grid_max, "latent grid upper bound");

  swdgp::BenchConfig bench_config;
  std::string bench_function = "sim7";
  std::string bench_csv, bench_json;
  bool deterministic = false;
  CLI::App* bench = app.add_subcommand("bench", "run the synthetic benchmark protocol");
  bench->add_option("--function", bench_function, "target function id")
      ->check(CLI::IsMember({"fig2", "fig2-text", "fig4", "fig5", "sim7"}));
  bench->add_option("--methods", bench_config.methods,
                    "methods: exact, swd-grid, lgswd-3, lgswd-5")
      ->delimiter(',');
  bench->add_option("--n", bench_config.n_schedule, "training set sizes")->delimiter(',');
  bench->add_option("--seeds", bench_config.seeds, "random seeds")->delimiter(',');
  bench->add_option("--grid-size", bench_config.grid_size, "inducing grid size");
  bench->add_option("--band", bench_config.band_order, "band order for swd-grid")
      ->check(CLI::IsMember({3, 5}));
  bench->add_option("--order", bench_config.order, "perturbation order for lgswd methods")
      ->check(CLI::IsMember({1, 2}));
  bench->add_option("--signal-std", bench_config.signal_std, "signal standard deviation");
  bench->add_option("--noise-std", bench_config.noise_std, "noise standard deviation");
  auto* bls = bench->add_option("--length-scale", length_scale_flag, "explicit length scale");
  bench->add_flag("--auto-length-scale", auto_ell, "use the admissibility-based default")
      ->excludes(bls);
  bench->add_option("--test-points", bench_config.test_point_count, "test lattice size");
  bench->add_option("--reps", bench_config.repetitions, "timing repetitions (median)");
  bench->add_option("--output", bench_csv, "CSV report path");
  bench->add_option("--output-json", bench_json, "JSON report path");
  bench->add_flag("--deterministic", deterministic,
                  "zero out wall-clock fields so reruns are byte-identical");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return kExitUsage;
  }

  opt.length_scale = length_scale_flag;
  bench_config.length_scale = length_scale_flag;

  try {
    if (fit_grid->parsed()) return run_fit_grid(opt, grid_spacing);
    if (fit_latent->parsed()) return run_fit_latent(opt, grid_min, grid_max);
    bench_config.function = swdgp::parse_function(bench_function);
    return run_bench(bench_config, bench_csv, bench_json, deterministic);
  } catch (const swdgp::PositivityError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const swdgp::FactorizationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
}
