#pragma once

#include <cstdint>
#include <vector>

#include "cpd/tree.hpp"
#include "cpd/types.hpp"

namespace cpd {

enum class EnsembleKind { Ratio, Classifier };

// Per-row negative-gradient targets for one boosting round.
using GradientTargets = Vector;

struct BoostOptions {
  int rounds = 100;  // M
  double learning_rate = 0.2;
  int max_depth = 6;
  int min_leaf = 5;
  double alpha = 0.1;       // ratio kind only
  double subsample = 1.0;   // per-sample fraction drawn without replacement each round
  double init_noise_sigma = 0.1;  // stddev of the w0 = 1 + eps symmetry-breaking noise
  bool record_loss = false;

  static BoostOptions ratio_defaults() { return {}; }
  static BoostOptions classifier_defaults() {
    BoostOptions o;
    o.learning_rate = 0.1;
    return o;
  }
};

struct BoostedEnsemble {
  std::vector<RegressionTree> trees;
  double learning_rate = 0.2;
  // Prediction-time offset: 1 for the ratio kind, the base log-odds for the
  // classifier kind. The per-row fitting noise never leaves the fit.
  double base_value = 1.0;
  EnsembleKind kind = EnsembleKind::Ratio;
  double alpha = 0.1;
  double subsample = 1.0;

  // Fit diagnostics. train_loss holds the training objective before boosting
  // and after each round when record_loss was set; train_values the tracked
  // per-row model values at the end of the fit (reference rows first).
  std::vector<double> train_loss;
  Vector train_values;
};

// Negative gradient of the relative-ratio objective at the current w.
inline double rulsif_gradient_target(double w, bool in_test, double alpha) {
  return in_test ? 1.0 - alpha * w : -(1.0 - alpha) * w;
}

// Functional-gradient boosting of the relative-ratio objective: least-squares
// trees on the negative gradient, w_m = w_{m-1} + nu * h_m, started from
// w_0 = 1 + eps with eps ~ N(0, init_noise_sigma).
BoostedEnsemble fit_gbdt_rulsif(MatrixRef ref_rows, MatrixRef test_rows, const BoostOptions& opts,
                                std::uint64_t seed);

// Logit boosting with binary cross-entropy: residual targets y - p, Newton
// leaf values, labels 0 for reference rows and 1 for test rows.
BoostedEnsemble fit_gbdt_classifier(MatrixRef ref_rows, MatrixRef test_rows,
                                    const BoostOptions& opts, std::uint64_t seed);

// Ratio kind: base + nu * sum of trees (may be negative). Classifier kind:
// sigmoid of the boosted logit, in (0, 1).
double predict_ensemble(const BoostedEnsemble& model, VectorRef x);
Vector predict_ensemble(const BoostedEnsemble& model, MatrixRef rows);

}  // namespace cpd
