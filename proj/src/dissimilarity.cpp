#include "cpd/dissimilarity.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cpd {

namespace {

void check_clip_eps(double clip_eps) {
  if (!(clip_eps > 0.0 && clip_eps < 0.5))
    throw std::invalid_argument("clip_eps must lie in (0, 0.5)");
}

double clip_proba(double f, double clip_eps) {
  return std::clamp(f, clip_eps, 1.0 - clip_eps);
}

}  // namespace

double ratio_from_proba(double f, double clip_eps) {
  check_clip_eps(clip_eps);
  if (!(f >= 0.0 && f <= 1.0))
    throw std::invalid_argument("ratio_from_proba: probability outside [0, 1]");
  const double c = clip_proba(f, clip_eps);
  return c / (1.0 - c);
}

Vector ratio_from_proba(VectorRef f, double clip_eps) {
  Vector out(f.size());
  for (Index i = 0; i < f.size(); ++i) out(i) = ratio_from_proba(f(i), clip_eps);
  return out;
}

double proba_from_ratio(double w) {
  const double nonneg = std::max(w, 0.0);
  return nonneg / (1.0 + nonneg);
}

Vector proba_from_ratio(VectorRef w) {
  Vector out(w.size());
  for (Index i = 0; i < w.size(); ++i) out(i) = proba_from_ratio(w(i));
  return out;
}

double pe_score(VectorRef w_on_test, VectorRef w_swapped_on_ref) {
  if (w_on_test.size() == 0 || w_swapped_on_ref.size() == 0)
    throw std::invalid_argument("pe_score: prediction lists must be non-empty");
  return w_on_test.array().max(0.0).mean() + w_swapped_on_ref.array().max(0.0).mean() - 2.0;
}

double kl_score(VectorRef f_on_test, VectorRef f_on_ref, double clip_eps) {
  check_clip_eps(clip_eps);
  if (f_on_test.size() == 0 || f_on_ref.size() == 0)
    throw std::invalid_argument("kl_score: probability lists must be non-empty");
  auto logit_mean = [clip_eps](VectorRef f, double sign) {
    double total = 0.0;
    for (Index i = 0; i < f.size(); ++i) {
      if (!(f(i) >= 0.0 && f(i) <= 1.0))
        throw std::invalid_argument("kl_score: probability outside [0, 1]");
      const double c = clip_proba(f(i), clip_eps);
      total += sign * (std::log(c) - std::log(1.0 - c));
    }
    return total / static_cast<double>(f.size());
  };
  return logit_mean(f_on_test, 1.0) + logit_mean(f_on_ref, -1.0);
}

}  // namespace cpd
