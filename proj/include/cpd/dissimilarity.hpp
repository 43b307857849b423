#pragma once

#include "cpd/types.hpp"

namespace cpd {

enum class ScoreKind { PearsonSymmetric, KlSymmetric };

// Bayes-odds conversion f -> f/(1-f) under equal sample sizes; f is clipped
// to [clip_eps, 1-clip_eps] first. f outside [0, 1] is an error.
double ratio_from_proba(double f, double clip_eps = 1e-6);
Vector ratio_from_proba(VectorRef f, double clip_eps = 1e-6);

// Inverse map w -> w/(1+w), flooring negative ratios at 0 so the result is a
// valid probability in [0, 1).
double proba_from_ratio(double w);
Vector proba_from_ratio(VectorRef w);

// Symmetric Pearson-divergence score from two fits: the (ref, test) model
// evaluated on held-out test rows and the role-swapped model evaluated on
// held-out reference rows. Negative predictions are floored at 0 before
// averaging, so the result is >= -2.
double pe_score(VectorRef w_on_test, VectorRef w_swapped_on_ref);

// Symmetric Kullback-Leibler score from one classifier fit: mean log-odds on
// test rows plus mean negated log-odds on reference rows, natural log,
// probabilities clipped to [clip_eps, 1-clip_eps]. Entries must be in [0, 1].
double kl_score(VectorRef f_on_test, VectorRef f_on_ref, double clip_eps = 1e-6);

}  // namespace cpd
