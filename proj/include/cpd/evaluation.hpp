#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "cpd/detector.hpp"
#include "cpd/types.hpp"

namespace cpd {

// Scores restricted to evaluated timestamps with their ground-truth labels.
struct LabeledRun {
  ScoreSeries scores;
  std::vector<int> labels;
};

struct RunStats {
  double mean = 0.0;
  double stdev = 0.0;      // sample standard deviation (0 for a single run)
  double std_error = 0.0;  // stdev / sqrt(runs)
};

// Probability that a random positive outranks a random negative, ties 1/2
// (rank-sum form). Both classes must be present.
double roc_auc(VectorRef scores, const std::vector<int>& labels);

// Exact integer form: (numerator, denominator) = (2U, 2 * n0 * n1), so
// roc_auc == numerator / denominator without rounding.
std::pair<std::uint64_t, std::uint64_t> roc_auc_exact(VectorRef scores,
                                                      const std::vector<int>& labels);

// Pick full_labels[t] for every evaluated t; the label vector must cover all
// evaluated timestamps.
LabeledRun align(const ScoreSeries& scores, const std::vector<int>& full_labels);

// Mean, sample standard deviation, and standard error of per-run metrics.
RunStats aggregate_runs(const std::vector<double>& values);

}  // namespace cpd
