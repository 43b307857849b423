#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "cpd/timeseries.hpp"
#include "cpd/types.hpp"

namespace cpd {

// Gaussian-kernel linear ratio model w(x) = sum_i theta_i K(x, c_i), fit by
// regularized least squares on the relative-ratio objective.
struct KernelModel {
  Matrix centers;  // n_kr x D, drawn from the test sample
  Vector theta;
  double sigma = 1.0;
  double alpha = 0.0;
  double lambda = 0.0;
};

struct CvGrid {
  // With scale_by_median set, sigma candidates are multiples of the median
  // pairwise distance of the pooled samples, so every candidate sits at the
  // data's own scale regardless of dimension or units; with it unset they are
  // absolute widths.
  std::vector<double> sigmas = {0.6, 0.8, 1.0, 1.2, 1.4};
  std::vector<double> lambdas = {1e-3, 1e-2, 1e-1, 1.0, 1e1};
  int folds = 5;
  bool scale_by_median = true;
};

// The median-scaled grid above; kept as a function for call sites that want
// a fresh copy after mutating a shared instance.
CvGrid default_cv_grid();

// Median Euclidean distance over all row pairs (upper median for even pair
// counts). Needs at least 2 rows.
double median_pairwise_distance(MatrixRef rows);

// exp(-|x - c|^2 / (2 sigma^2)), in (0, 1].
double gaussian_kernel(VectorRef x, VectorRef center, double sigma);

// n x m matrix of kernel values between each row and each center.
Matrix kernel_matrix(MatrixRef rows, MatrixRef centers, double sigma);

// Solves (H + lambda I) theta = h, the normal equations of the penalized
// objective, with H = (1-a)/n_rf Phi_rf' Phi_rf + a/n_te Phi_te' Phi_te and
// h the mean test-kernel vector. Centers are drawn from the test rows without
// replacement (with replacement if fewer test rows than centers).
KernelModel fit_closed_form(MatrixRef ref_rows, MatrixRef test_rows, double sigma, double lambda,
                            double alpha, Index n_centers, std::uint64_t seed);

// Grid search minimizing the mean held-out objective over k folds; ties break
// toward larger lambda, then larger sigma. Returns (sigma, lambda) with sigma
// already scaled when the grid is median-relative.
std::pair<double, double> cross_validate(MatrixRef ref_rows, MatrixRef test_rows, const CvGrid& grid,
                                         double alpha, Index n_centers, std::uint64_t seed);

// May be negative; the score layer decides how to clip.
double predict(const KernelModel& model, VectorRef x);
Vector predict(const KernelModel& model, MatrixRef rows);

}  // namespace cpd
