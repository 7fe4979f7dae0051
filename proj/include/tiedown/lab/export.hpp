#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tiedown/core/io.hpp"
#include "tiedown/interval_maps.hpp"
#include "tiedown/renewal/convolution.hpp"

namespace tiedown::lab {

/// Writes <stem>.csv with columns (k, m, prob) for every nonzero entry and
/// <stem>.json with {gamma, p, xi, K, M, overflow[]}.
inline void export_table(const ConvolutionTable& table, const std::filesystem::path& dir, const std::string& stem) {
  ensure_directory(dir);
  std::string csv = "k,m,prob\n";
  Json overflow = Json::array();
  for (std::int64_t k = 1; k <= table.K(); ++k) {
    overflow.push_back(table.overflow(k));
    for (std::int64_t m = 0; m <= table.M(); ++m) {
      const double v = table.prob(k, m);
      if (v == 0.0) continue;
      csv += std::to_string(k) + ',' + std::to_string(m) + ',' + format_double(v) + '\n';
    }
  }
  write_text(dir / (stem + ".csv"), csv);
  Json meta = Json::object();
  meta["gamma"] = table.law().gamma();
  meta["p"] = table.law().p();
  meta["xi"] = table.law().xi();
  meta["K"] = table.K();
  meta["M"] = table.M();
  meta["overflow"] = std::move(overflow);
  write_json(dir / (stem + ".json"), meta);
}

inline Json run_metadata(double gamma, std::int64_t bins, std::int64_t iters, std::uint64_t seed) {
  Json meta = Json::object();
  meta["gamma"] = gamma;
  meta["bins"] = bins;
  meta["iters"] = iters;
  meta["seed"] = seed;
  meta["git_describe"] = build_describe();
  return meta;
}

/// (x, value) pairs with a metadata sidecar.
inline void export_profile(const std::vector<double>& x, const std::vector<double>& value,
                           const std::filesystem::path& dir, const std::string& stem, const Json& meta) {
  ensure_directory(dir);
  CsvTable t;
  t.header = {"x", "value"};
  for (std::size_t i = 0; i < x.size(); ++i) t.rows.push_back({x[i], value[i]});
  write_csv(dir / (stem + ".csv"), t);
  write_json(dir / (stem + ".json"), meta);
}

/// Histogram density of samples on [0, hi) with equal-width bins.
inline std::pair<std::vector<double>, std::vector<double>> histogram(const std::vector<double>& samples, double hi,
                                                                     int bins) {
  std::vector<double> centre(static_cast<std::size_t>(bins));
  std::vector<double> dens(static_cast<std::size_t>(bins), 0.0);
  const double w = hi / bins;
  for (int i = 0; i < bins; ++i) centre[static_cast<std::size_t>(i)] = (i + 0.5) * w;
  for (double s : samples) {
    const auto i = static_cast<std::int64_t>(s / w);
    if (i >= 0 && i < bins) dens[static_cast<std::size_t>(i)] += 1.0;
  }
  for (double& d : dens) d /= static_cast<double>(samples.size()) * w;
  return {centre, dens};
}

}  // namespace tiedown::lab
