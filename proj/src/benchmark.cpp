#include "cpd/benchmark.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "cpd/datasets.hpp"
#include "cpd/io_util.hpp"
#include "cpd/rng.hpp"

namespace cpd {

namespace {

// Sub-seed tags, disjoint from the detector's per-t tags by construction
// (different derivation depth and first argument role).
enum SeedTag : std::uint64_t {
  kTagInstance = 101,
  kTagDetect = 102,
};

void check_spec(const BenchmarkSpec& spec) {
  if (spec.datasets.empty() || spec.estimators.empty())
    throw std::invalid_argument("benchmark: datasets and estimators must be non-empty");
  for (int d : spec.datasets)
    if (d < 1 || d > 3) throw std::invalid_argument("benchmark: dataset ids must be 1..3");
  if (spec.runs < 1) throw std::invalid_argument("benchmark: runs must be >= 1");
  if (spec.jobs < 1) throw std::invalid_argument("benchmark: jobs must be >= 1");
}

std::string format_fixed(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", value);
  return buf;
}

}  // namespace

BenchmarkTable run_benchmark(const BenchmarkSpec& spec) {
  check_spec(spec);
  const std::size_t n_data = spec.datasets.size();
  const std::size_t n_est = spec.estimators.size();
  const std::size_t n_runs = static_cast<std::size_t>(spec.runs);

  // One instance per (dataset, run), shared by every estimator of that run.
  std::vector<LabeledSeries> instances;
  instances.reserve(n_data * n_runs);
  for (std::size_t di = 0; di < n_data; ++di)
    for (std::size_t r = 0; r < n_runs; ++r) {
      SyntheticSpec synth;
      synth.dataset_id = spec.datasets[di];
      synth.seed = derive_seed(spec.seed, kTagInstance,
                               static_cast<std::uint64_t>(spec.datasets[di]),
                               static_cast<std::uint64_t>(r));
      instances.push_back(gen_synthetic(synth));
    }

  std::vector<double> aucs(n_data * n_est * n_runs, 0.0);
  const std::size_t total = aucs.size();
  auto run_cell = [&](std::size_t flat) {
    const std::size_t di = flat / (n_est * n_runs);
    const std::size_t ei = flat / n_runs % n_est;
    const std::size_t r = flat % n_runs;
    const LabeledSeries& instance = instances[di * n_runs + r];
    DetectorConfig config = spec.base;
    config.estimator = spec.estimators[ei];
    config.seed = derive_seed(spec.seed, kTagDetect, static_cast<std::uint64_t>(spec.datasets[di]),
                              static_cast<std::uint64_t>(r), static_cast<std::uint64_t>(ei));
    config.jobs = 1;
    const ScoreSeries scores = detect(instance.series, config);
    const LabeledRun labeled = align(scores, instance.labels(config.n));
    aucs[flat] = roc_auc(labeled.scores.d, labeled.labels);
  };

  std::size_t workers = static_cast<std::size_t>(spec.jobs);
  const unsigned hw = std::thread::hardware_concurrency();
  if (hw > 0) workers = std::min<std::size_t>(workers, hw);
  workers = std::min(std::max<std::size_t>(workers, 1), total);
  if (workers <= 1) {
    for (std::size_t flat = 0; flat < total; ++flat) run_cell(flat);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto work = [&] {
      for (;;) {
        const std::size_t flat = next.fetch_add(1);
        if (flat >= total) return;
        try {
          run_cell(flat);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          return;
        }
      }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (std::thread& th : pool) th.join();
    if (error) std::rethrow_exception(error);
  }

  BenchmarkTable table;
  table.spec = spec;
  for (std::size_t ei = 0; ei < n_est; ++ei)
    for (std::size_t di = 0; di < n_data; ++di) {
      BenchmarkCell cell;
      cell.estimator = spec.estimators[ei];
      cell.dataset = spec.datasets[di];
      const std::size_t base = di * n_est * n_runs + ei * n_runs;
      cell.per_run_auc.assign(aucs.begin() + static_cast<std::ptrdiff_t>(base),
                              aucs.begin() + static_cast<std::ptrdiff_t>(base + n_runs));
      cell.auc = aggregate_runs(cell.per_run_auc);
      table.cells.push_back(std::move(cell));
    }
  return table;
}

std::string benchmark_csv(const BenchmarkTable& table) {
  std::string out = "algorithm,dataset,mean_auc,std_auc,stderr,runs,dt,seed\n";
  for (const BenchmarkCell& cell : table.cells) {
    out += to_string(cell.estimator);
    out += ',';
    out += std::to_string(cell.dataset);
    out += ',';
    out += format_fixed(cell.auc.mean);
    out += ',';
    out += format_fixed(cell.auc.stdev);
    out += ',';
    out += format_fixed(cell.auc.std_error);
    out += ',';
    out += std::to_string(table.spec.runs);
    out += ',';
    out += std::to_string(table.spec.base.stride);
    out += ',';
    out += std::to_string(table.spec.seed);
    out += '\n';
  }
  return out;
}

void write_benchmark_csv(const BenchmarkTable& table, const std::filesystem::path& path) {
  write_text_atomically(path, benchmark_csv(table));
}

}  // namespace cpd
