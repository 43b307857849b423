#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>

#include "cpd/boosting.hpp"
#include "cpd/dissimilarity.hpp"
#include "cpd/kernel_rulsif.hpp"
#include "cpd/mlp.hpp"
#include "cpd/types.hpp"

namespace cpd {

enum class EstimatorKind { KernelRulsif, GbdtRulsif, NnRulsif, GbdtClassifier, NnClassifier };

inline constexpr EstimatorKind kAllEstimators[] = {
    EstimatorKind::KernelRulsif, EstimatorKind::GbdtRulsif, EstimatorKind::NnRulsif,
    EstimatorKind::GbdtClassifier, EstimatorKind::NnClassifier};

std::string to_string(EstimatorKind kind);
EstimatorKind parse_estimator(const std::string& name);

// Classifiers predict P(test | x); the others predict the relative ratio.
bool is_classifier(EstimatorKind kind);

// The score each estimator family was designed around: Pearson for ratio
// models, symmetric KL for classifiers.
ScoreKind natural_score(EstimatorKind kind);

struct EstimatorConfig {
  double alpha = 0.1;  // relative-ratio mixing weight, shared by all ratio fits
  int kernel_centers = 10;
  CvGrid cv_grid{};
  BoostOptions gbdt_ratio = BoostOptions::ratio_defaults();
  BoostOptions gbdt_classifier = BoostOptions::classifier_defaults();
  int nn_hidden = 10;
  AdamConfig adam{};
};

// A cross-validated kernel width/penalty choice, cacheable across repeated
// fits on the same window.
struct KernelChoice {
  double sigma = 1.0;
  double lambda = 1e-3;
};

struct FittedModel {
  EstimatorKind kind = EstimatorKind::KernelRulsif;
  std::variant<KernelModel, BoostedEnsemble, Mlp> model;

  // Relative-ratio view: native output for ratio models, clipped odds
  // f/(1-f) for classifiers.
  Vector predict_ratio(MatrixRef rows, double clip_eps = 1e-6) const;
  // Probability view: native output for classifiers, w/(1+w) for ratio models.
  Vector predict_proba(MatrixRef rows) const;
};

// Run the kernel cross-validation grid on the given samples.
KernelChoice select_kernel_width(const EstimatorConfig& cfg, MatrixRef ref_rows,
                                 MatrixRef test_rows, std::uint64_t seed);

// Fit the chosen estimator on (ref_rows, test_rows). For the kernel model a
// precomputed KernelChoice skips cross-validation; the other estimators
// ignore it.
FittedModel fit_estimator(EstimatorKind kind, const EstimatorConfig& cfg, MatrixRef ref_rows,
                          MatrixRef test_rows, std::uint64_t seed,
                          const std::optional<KernelChoice>& kernel = std::nullopt);

}  // namespace cpd
