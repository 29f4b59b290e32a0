#pragma once

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "catenc/table.hpp"

namespace testkit {

inline catenc::Column cat(std::string name, const std::vector<std::string>& labels) {
  std::vector<std::uint8_t> missing(labels.size(), 0);
  for (std::size_t i = 0; i < labels.size(); ++i) missing[i] = labels[i].empty() ? 1 : 0;
  return catenc::Column::categorical(std::move(name), labels, missing);
}

inline catenc::Column num(std::string name, std::vector<double> values) {
  std::vector<std::uint8_t> missing(values.size(), 0);
  for (std::size_t i = 0; i < values.size(); ++i) missing[i] = std::isnan(values[i]) ? 1 : 0;
  return catenc::Column::numeric(std::move(name), std::move(values), missing);
}

/// Table whose last column is the target; task inferred.
inline catenc::DataTable table(std::vector<catenc::Column> cols) {
  const auto t = cols.size() - 1;
  return catenc::DataTable::with_inferred_task(std::move(cols), t);
}

inline std::vector<std::string> labels_from_codes(const std::vector<int>& codes, const std::string& prefix = "L") {
  std::vector<std::string> out;
  for (int c : codes) out.push_back(prefix + std::to_string(c));
  return out;
}

/// Signal data: one categorical feature with `n_levels` levels whose effects
/// are N(0,1), `n_noise` standard normal numeric features, and a binary
/// target 1[effect + N(0, noise_sd^2) > 0].
inline catenc::DataTable signal_dataset(std::uint64_t seed, std::size_t n, int n_levels, double noise_sd,
                                        int n_noise) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> effect(static_cast<std::size_t>(n_levels));
  for (auto& e : effect) e = gauss(rng);
  std::vector<std::string> level(n);
  std::vector<std::string> y(n);
  std::vector<std::vector<double>> noise(static_cast<std::size_t>(n_noise), std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto l = static_cast<std::size_t>(rng() % static_cast<std::uint64_t>(n_levels));
    level[i] = "L" + std::to_string(l);
    for (auto& col : noise) col[i] = gauss(rng);
    y[i] = effect[l] + noise_sd * gauss(rng) > 0 ? "pos" : "neg";
  }
  std::vector<catenc::Column> cols;
  cols.push_back(cat("level", level));
  for (int k = 0; k < n_noise; ++k) cols.push_back(num("x" + std::to_string(k), noise[static_cast<std::size_t>(k)]));
  // Fix the class dictionary order so "pos" is class 1.
  std::vector<std::int32_t> codes(n);
  for (std::size_t i = 0; i < n; ++i) codes[i] = y[i] == "pos" ? 1 : 0;
  cols.push_back(catenc::Column::from_codes("y", {"neg", "pos"}, codes));
  return table(std::move(cols));
}

}  // namespace testkit
