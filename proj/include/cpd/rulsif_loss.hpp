#pragma once

#include <stdexcept>

#include "cpd/types.hpp"

namespace cpd {

// Empirical relative-ratio least-squares objective, without its constant term:
//   (1-a)/(2 n_rf) sum w_rf^2 + a/(2 n_te) sum w_te^2 - (1/n_te) sum w_te
// Shared by the kernel solver, the boosted-tree fit, the network fit and the
// cross-validation objective.
inline double rulsif_loss(VectorRef w_ref, VectorRef w_test, double alpha) {
  if (w_ref.size() == 0 || w_test.size() == 0)
    throw std::invalid_argument("rulsif_loss: empty prediction vector");
  const double n_rf = static_cast<double>(w_ref.size());
  const double n_te = static_cast<double>(w_test.size());
  return (1.0 - alpha) / (2.0 * n_rf) * w_ref.squaredNorm() +
         alpha / (2.0 * n_te) * w_test.squaredNorm() - w_test.sum() / n_te;
}

}  // namespace cpd
