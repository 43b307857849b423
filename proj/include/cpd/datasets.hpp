#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "cpd/timeseries.hpp"
#include "cpd/types.hpp"

namespace cpd {

// A series plus the timestamps where its generating distribution changes.
// Ground-truth labels depend on the detector's sample size n, so they are
// derived on demand: label 1 on the union of [t*, t* + 2n).
struct LabeledSeries {
  TimeSeries series;
  std::vector<Index> change_points;

  std::vector<int> labels(Index n) const;
};

struct SyntheticSpec {
  int dataset_id = 1;  // 1, 2, or 3
  int segments = 10;
  Index segment_length = 2000;
  std::uint64_t seed = 0;
};

// Per-segment parameter schedules (index 0 is the first segment).
// Innovation means 0, 1, 2.5, 4.5, ... (difference grows by 0.5 per step).
std::vector<double> mean_schedule(int segments);
// Innovation standard deviations 1, 1.5, 1.75, 2.0, ... (1 + N/4 after the first).
std::vector<double> stddev_schedule(int segments);
// Sine frequencies compound: 1, then each segment multiplies the previous
// frequency by log(e + 0.5N) (natural log), so every jump is >= 31%.
std::vector<double> frequency_schedule(int segments);

// Segmented AR(2) with drifting innovation mean plus an independent pure-noise
// component; 2-D, 10 segments of 2000 steps, change points every 2000.
LabeledSeries gen_dataset1(std::uint64_t seed);
// Same AR(2) with drifting innovation scale instead of mean.
LabeledSeries gen_dataset2(std::uint64_t seed);
// 1-D sine with per-segment frequency plus offset Gaussian noise.
LabeledSeries gen_dataset3(std::uint64_t seed);
LabeledSeries gen_synthetic(const SyntheticSpec& spec);

// 0/1 vector of length total_len: 1 exactly on the union of [t*, t* + 2n)
// clipped to the series; change_points must be strictly increasing in range.
std::vector<int> label_series(Index total_len, const std::vector<Index>& change_points, Index n);

// Parse failure carrying the 1-based offending line.
struct CsvError : std::runtime_error {
  CsvError(const std::string& what, std::size_t line_number);
  std::size_t line = 0;
};

// Comma-separated, '.' decimal, one row per timestamp, LF or CRLF. With
// expect_header the first line is discarded; without it every line must parse.
TimeSeries load_csv(const std::filesystem::path& path, bool expect_header = false);
void save_csv(const TimeSeries& series, const std::filesystem::path& path);

// One integer change point per line.
std::vector<Index> load_labels(const std::filesystem::path& path);
void save_labels(const std::vector<Index>& change_points, const std::filesystem::path& path);

}  // namespace cpd
