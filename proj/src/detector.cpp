#include "cpd/detector.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "cpd/rng.hpp"

namespace cpd {

namespace {

// Sub-seed stream tags; every random decision hangs off (seed, tag, t [, i]).
enum SeedTag : std::uint64_t {
  kTagRefSplit = 1,
  kTagTestSplit = 2,
  kTagFit = 3,
  kTagFitSwapped = 4,
  kTagKernelCv = 5,
};

void check_config(const DetectorConfig& config) {
  if (config.k < 1) throw std::invalid_argument("detect: k must be >= 1");
  if (config.n < 4) throw std::invalid_argument("detect: n must be >= 4");
  if (config.m < 1) throw std::invalid_argument("detect: m must be >= 1");
  if (config.stride < 1) throw std::invalid_argument("detect: stride must be >= 1");
  if (config.jobs < 1) throw std::invalid_argument("detect: jobs must be >= 1");
  if (!(config.clip_eps > 0.0 && config.clip_eps < 0.5))
    throw std::invalid_argument("detect: clip_eps must lie in (0, 0.5)");
}

double score_at(const TimeSeries& series, const DetectorConfig& config, Index t) {
  const ScoreKind kind = config.resolved_score();
  const EstimatorConfig& est_cfg = config.estimator_config;
  const SequenceSample ref_sample = make_sample(series, t - config.n, config.k, config.n);
  const SequenceSample test_sample = make_sample(series, t, config.k, config.n);

  std::optional<KernelChoice> kernel;
  double total = 0.0;
  for (int i = 0; i < config.m; ++i) {
    const SplitPair ref = random_split(
        ref_sample, 0.5, derive_seed(config.seed, kTagRefSplit, static_cast<std::uint64_t>(t),
                                     static_cast<std::uint64_t>(i)));
    const SplitPair test = random_split(
        test_sample, 0.5, derive_seed(config.seed, kTagTestSplit, static_cast<std::uint64_t>(t),
                                      static_cast<std::uint64_t>(i)));
    if (config.estimator == EstimatorKind::KernelRulsif && !kernel)
      kernel = select_kernel_width(est_cfg, ref.train, test.train,
                                   derive_seed(config.seed, kTagKernelCv,
                                               static_cast<std::uint64_t>(t)));

    const FittedModel direct = fit_estimator(
        config.estimator, est_cfg, ref.train, test.train,
        derive_seed(config.seed, kTagFit, static_cast<std::uint64_t>(t),
                    static_cast<std::uint64_t>(i)),
        kernel);
    if (kind == ScoreKind::PearsonSymmetric) {
      const FittedModel swapped = fit_estimator(
          config.estimator, est_cfg, test.train, ref.train,
          derive_seed(config.seed, kTagFitSwapped, static_cast<std::uint64_t>(t),
                      static_cast<std::uint64_t>(i)),
          kernel);
      total += pe_score(direct.predict_ratio(test.valid, config.clip_eps),
                        swapped.predict_ratio(ref.valid, config.clip_eps));
    } else {
      total += kl_score(direct.predict_proba(test.valid), direct.predict_proba(ref.valid),
                        config.clip_eps);
    }
  }
  return total / static_cast<double>(config.m);
}

}  // namespace

ScoreSeries detect(const TimeSeries& series, const DetectorConfig& config) {
  check_config(config);
  const Index needed = config.k + 2 * config.n;
  if (series.length() < needed)
    throw std::out_of_range("detect: series length " + std::to_string(series.length()) +
                            " is shorter than k + 2n = " + std::to_string(needed));

  ScoreSeries out;
  out.config = config;
  for (Index t = config.first_t(); t < series.length(); t += config.stride) out.t.push_back(t);
  out.d.resize(static_cast<Index>(out.t.size()));

  const std::size_t count = out.t.size();
  const unsigned hw = std::thread::hardware_concurrency();
  std::size_t workers = static_cast<std::size_t>(config.jobs);
  if (hw > 0) workers = std::min<std::size_t>(workers, hw);
  workers = std::min(std::max<std::size_t>(workers, 1), count);

  if (workers <= 1) {
    for (std::size_t idx = 0; idx < count; ++idx)
      out.d(static_cast<Index>(idx)) = score_at(series, config, out.t[idx]);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto work = [&] {
      for (;;) {
        const std::size_t idx = next.fetch_add(1);
        if (idx >= count) return;
        try {
          out.d(static_cast<Index>(idx)) = score_at(series, config, out.t[idx]);
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

  if (!out.d.allFinite()) throw std::runtime_error("detect: non-finite dissimilarity score");
  return out;
}

AlarmList threshold_alarms(const ScoreSeries& scores, double mu) {
  if (!std::isfinite(mu)) throw std::invalid_argument("threshold_alarms: mu must be finite");
  AlarmList alarms;
  bool above = false;
  for (std::size_t i = 0; i < scores.t.size(); ++i) {
    const bool now = scores.d(static_cast<Index>(i)) >= mu;
    if (now && !above) alarms.detections.push_back(scores.t[i]);
    above = now;
  }
  return alarms;
}

}  // namespace cpd
