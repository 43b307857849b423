#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cpd/detector.hpp"
#include "cpd/estimator.hpp"
#include "cpd/evaluation.hpp"

namespace cpd {

struct BenchmarkSpec {
  std::vector<int> datasets = {1, 2, 3};
  std::vector<EstimatorKind> estimators = {EstimatorKind::KernelRulsif, EstimatorKind::GbdtRulsif,
                                           EstimatorKind::NnRulsif, EstimatorKind::GbdtClassifier,
                                           EstimatorKind::NnClassifier};
  int runs = 10;
  std::uint64_t seed = 0;
  // Window geometry, stride, score, and estimator settings for every cell;
  // the per-cell estimator and seed fields are overridden.
  DetectorConfig base{};
  int jobs = 1;
};

struct BenchmarkCell {
  EstimatorKind estimator = EstimatorKind::KernelRulsif;
  int dataset = 1;
  RunStats auc;
  std::vector<double> per_run_auc;
};

struct BenchmarkTable {
  BenchmarkSpec spec;
  std::vector<BenchmarkCell> cells;  // grouped by estimator, then dataset
};

// Full matrix: per dataset, `runs` fresh instances (shared across all
// estimators of that run), each scored by ROC AUC against labels built from
// the base sample size n.
BenchmarkTable run_benchmark(const BenchmarkSpec& spec);

// Deterministic fixed-precision table; identical spec -> identical bytes.
std::string benchmark_csv(const BenchmarkTable& table);
void write_benchmark_csv(const BenchmarkTable& table, const std::filesystem::path& path);

}  // namespace cpd
