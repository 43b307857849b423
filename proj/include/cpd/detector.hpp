#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "cpd/dissimilarity.hpp"
#include "cpd/estimator.hpp"
#include "cpd/timeseries.hpp"
#include "cpd/types.hpp"

namespace cpd {

struct DetectorConfig {
  Index k = 10;       // embedding window length
  Index n = 500;      // embeddings per sliding sample
  int m = 1;          // score-averaging iterations
  Index stride = 1;   // gap between evaluated timestamps
  EstimatorKind estimator = EstimatorKind::KernelRulsif;
  std::optional<ScoreKind> score;  // empty: the estimator's natural score
  double clip_eps = 1e-6;
  EstimatorConfig estimator_config{};
  std::uint64_t seed = 0;
  std::optional<double> threshold;
  int jobs = 1;

  ScoreKind resolved_score() const { return score ? *score : natural_score(estimator); }
  // Earliest timestamp with 2n anchors ending at it: both windows need
  // anchors back to t - 2n + 1, and anchors start at k - 1.
  Index first_t() const { return k - 1 + 2 * n; }
};

struct ScoreSeries {
  std::vector<Index> t;
  Vector d;
  DetectorConfig config;
};

struct AlarmList {
  std::vector<Index> detections;
};

// Slide paired reference/test windows over the series, fit the configured
// estimator on shuffled train halves, and score the held-out halves.
// Deterministic given (series, config); evaluated timestamps are scored
// independently (config.jobs threads).
ScoreSeries detect(const TimeSeries& series, const DetectorConfig& config);

// First timestamp of every maximal run with d >= mu.
AlarmList threshold_alarms(const ScoreSeries& scores, double mu);

}  // namespace cpd
