#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "d2ke/objects.hpp"

namespace d2ke {

/// Stratified split: round(train_fraction * n) training samples, apportioned
/// across classes by largest remainder (ties to the lower class index).
/// Both outputs keep the input's relative order.
std::pair<Dataset, Dataset> split_dataset(const Dataset& data, double train_fraction,
                                          std::uint64_t seed);

enum class SyntheticTask { kMotifString, kShiftedSine, kTwoCluster };

std::string_view task_name(SyntheticTask task);
SyntheticTask parse_task(std::string_view name);

// Generator knobs. Defaults are the ones the harness uses.
struct SyntheticParams {
  // motif-string
  std::string alphabet = "abcd";
  std::string motif = "abc";
  std::size_t string_length_min = 8;
  std::size_t string_length_max = 12;
  // shifted-sine
  std::size_t series_length_min = 30;
  std::size_t series_length_max = 50;
  double low_band_min = 1.5, low_band_max = 2.5;    // cycles per series
  double high_band_min = 3.0, high_band_max = 4.0;
  double series_noise = 0.5;
  // two-cluster
  std::size_t set_dim = 2;
  std::size_t set_size_min = 3;
  std::size_t set_size_max = 15;
  double cluster_separation = 0.5;  // centers at +/- separation on the first axis
  double cluster_spread = 1.0;
};

/// Balanced binary task: object i has label i % 2 and is generated from its
/// own derived seed. Parameters are recorded in meta.extra.
Dataset gen_synthetic(SyntheticTask task, std::size_t n, std::uint64_t seed,
                      const SyntheticParams& params = {});
Dataset gen_synthetic(std::string_view task, std::size_t n, std::uint64_t seed);

/// Per-variable standardization fitted on one set of series.
struct SeriesScaler {
  std::vector<double> mean;
  std::vector<double> stddev;

  static SeriesScaler fit(const Dataset& data);
  Dataset apply(const Dataset& data) const;
};

/// Median string length of a string dataset (lower median).
std::size_t median_string_length(const Dataset& data);

}  // namespace d2ke
