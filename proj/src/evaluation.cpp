#include "cpd/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace cpd {

std::pair<std::uint64_t, std::uint64_t> roc_auc_exact(VectorRef scores,
                                                      const std::vector<int>& labels) {
  if (static_cast<std::size_t>(scores.size()) != labels.size())
    throw std::invalid_argument("roc_auc: scores and labels must have equal length");
  if (scores.size() == 0) throw std::invalid_argument("roc_auc: empty input");
  if (!scores.allFinite()) throw std::invalid_argument("roc_auc: scores must be finite");
  for (int y : labels)
    if (y != 0 && y != 1) throw std::invalid_argument("roc_auc: labels must be 0 or 1");

  std::vector<Index> order(labels.size());
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return scores(a) < scores(b); });

  // Walk ascending tie groups: each positive beats all negatives strictly
  // below it and half-ties the negatives in its own group.
  std::uint64_t two_u = 0;
  std::uint64_t neg_below = 0;
  std::uint64_t n_pos = 0, n_neg = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    std::uint64_t group_pos = 0, group_neg = 0;
    while (j < order.size() && scores(order[j]) == scores(order[i])) {
      if (labels[static_cast<std::size_t>(order[j])] == 1)
        ++group_pos;
      else
        ++group_neg;
      ++j;
    }
    two_u += group_pos * (2 * neg_below + group_neg);
    neg_below += group_neg;
    n_pos += group_pos;
    n_neg += group_neg;
    i = j;
  }
  if (n_pos == 0 || n_neg == 0)
    throw std::invalid_argument("roc_auc: labels contain a single class; AUC is undefined");
  return {two_u, 2 * n_pos * n_neg};
}

double roc_auc(VectorRef scores, const std::vector<int>& labels) {
  const auto [num, den] = roc_auc_exact(scores, labels);
  return static_cast<double>(num) / static_cast<double>(den);
}

LabeledRun align(const ScoreSeries& scores, const std::vector<int>& full_labels) {
  LabeledRun run;
  run.scores = scores;
  run.labels.reserve(scores.t.size());
  for (Index t : scores.t) {
    if (t < 0 || static_cast<std::size_t>(t) >= full_labels.size())
      throw std::out_of_range("align: label vector does not cover evaluated timestamp " +
                              std::to_string(t));
    run.labels.push_back(full_labels[static_cast<std::size_t>(t)]);
  }
  return run;
}

RunStats aggregate_runs(const std::vector<double>& values) {
  if (values.empty()) throw std::invalid_argument("aggregate_runs: empty value list");
  RunStats stats;
  const double n = static_cast<double>(values.size());
  stats.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - stats.mean) * (v - stats.mean);
    stats.stdev = std::sqrt(ss / (n - 1.0));
    stats.std_error = stats.stdev / std::sqrt(n);
  }
  return stats;
}

}  // namespace cpd
