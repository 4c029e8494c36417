#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "swdgp/bench.hpp"

namespace swdgp {

/// Locale-independent float formatting with 17 significant digits.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace detail {

inline bool parse_double(std::string_view field, double& out) {
  // Trim surrounding spaces; std::from_chars is locale-independent.
  std::size_t b = field.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return false;
  std::size_t e = field.find_last_not_of(" \t\r");
  field = field.substr(b, e - b + 1);
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), out);
  return ec == std::errc() && ptr == field.data() + field.size();
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  fields.push_back(cur);
  return fields;
}

}  // namespace detail

/// A parsed (x columns..., y) table. `dim` is the number of x columns
/// (0 until the first data row fixes the column count).
struct XYTable {
  std::vector<double> x;  // row-major, rows * dim
  std::vector<double> y;
  std::size_t dim = 0;
  std::size_t rows = 0;
};

/// Reads a headered or headerless CSV of x columns followed by one y column.
/// A first line that does not parse entirely as numbers is treated as a
/// header. Lines starting with '#' are skipped.
inline XYTable read_xy_csv(std::istream& in) {
  XYTable table;
  std::string line;
  bool first_content = true;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto fields = detail::split_csv_line(line);
    std::vector<double> values(fields.size());
    bool all_numeric = true;
    for (std::size_t i = 0; i < fields.size(); ++i)
      if (!detail::parse_double(fields[i], values[i])) {
        all_numeric = false;
        break;
      }
    if (first_content) {
      first_content = false;
      if (!all_numeric) continue;  // header row
      if (fields.size() < 2)
        throw std::invalid_argument("CSV: need at least two columns (x..., y)");
      table.dim = fields.size() - 1;
    }
    if (!all_numeric)
      throw std::invalid_argument("CSV line " + std::to_string(line_no) +
                                  ": non-numeric field");
    if (table.dim == 0) {
      if (fields.size() < 2)
        throw std::invalid_argument("CSV: need at least two columns (x..., y)");
      table.dim = fields.size() - 1;
    }
    if (values.size() != table.dim + 1)
      throw std::invalid_argument("CSV line " + std::to_string(line_no) +
                                  ": expected " + std::to_string(table.dim + 1) + " fields");
    for (std::size_t i = 0; i < table.dim; ++i) table.x.push_back(values[i]);
    table.y.push_back(values.back());
    ++table.rows;
  }
  return table;
}

inline XYTable read_xy_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open input file '" + path + "'");
  XYTable t = read_xy_csv(in);
  if (t.dim == 0) t.dim = 1;  // empty file: defaults
  return t;
}

inline void write_bench_csv(std::ostream& out, std::span<const BenchReport> reports,
                            const std::string& config_comment, bool include_timing) {
  out << "# " << config_comment << "\n";
  out << "method,function,n,grid_size,band_order,order,seed,length_scale,"
         "signal_variance,noise_variance,smse,mse,truth_variance";
  for (int r = 0; r < 5; ++r)
    out << ",r" << r << "_smse,r" << r << "_mse,r" << r << "_truth_variance,r" << r
        << "_test_count,r" << r << "_train_count";
  out << ",fit_seconds,predict_seconds,variance_clamps,lambda_floors,diag_mean,"
         "offdiag_mean,diag_std_ratio,offdiag_std_ratio,residual_max,perturbation_valid\n";
  for (const BenchReport& r : reports) {
    out << r.method << ',' << r.function << ',' << r.n << ',' << r.grid_size << ','
        << r.band_order << ',' << r.order << ',' << r.seed << ','
        << format_double(r.length_scale) << ',' << format_double(r.signal_variance) << ','
        << format_double(r.noise_variance) << ',' << format_double(r.smse) << ','
        << format_double(r.mse) << ',' << format_double(r.truth_variance);
    for (const RegionStats& region : r.regions)
      out << ',' << format_double(region.smse) << ',' << format_double(region.mse) << ','
          << format_double(region.truth_variance) << ',' << region.test_count << ','
          << region.train_count;
    out << ',' << format_double(include_timing ? r.fit_seconds : 0.0) << ','
        << format_double(include_timing ? r.predict_seconds : 0.0) << ','
        << r.variance_clamps << ',' << r.lambda_floors;
    if (r.diagnostic) {
      out << ',' << format_double(r.diagnostic->diag_mean) << ','
          << format_double(r.diagnostic->offdiag_mean) << ','
          << format_double(r.diagnostic->diag_std_ratio) << ','
          << format_double(r.diagnostic->offdiag_std_ratio) << ','
          << format_double(r.diagnostic->residual_max) << ','
          << (r.diagnostic->perturbation_valid ? 1 : 0);
    } else {
      out << ",,,,,,";
    }
    out << '\n';
  }
}

}  // namespace swdgp
