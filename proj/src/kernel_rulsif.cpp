#include "cpd/kernel_rulsif.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "cpd/rng.hpp"
#include "cpd/rulsif_loss.hpp"

namespace cpd {

namespace {

Matrix draw_centers(MatrixRef test_rows, Index n_centers, std::uint64_t seed) {
  const Index n_te = test_rows.rows();
  Rng rng(seed);
  Matrix centers(n_centers, test_rows.cols());
  if (n_te >= n_centers) {
    // Partial Fisher-Yates: first n_centers entries of a shuffled index range.
    std::vector<Index> idx(static_cast<std::size_t>(n_te));
    std::iota(idx.begin(), idx.end(), Index{0});
    for (Index i = 0; i < n_centers; ++i) {
      const Index j = i + static_cast<Index>(rng.uniform_int(static_cast<std::uint64_t>(n_te - i)));
      std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
      centers.row(i) = test_rows.row(idx[static_cast<std::size_t>(i)]);
    }
  } else {
    for (Index i = 0; i < n_centers; ++i)
      centers.row(i) = test_rows.row(static_cast<Index>(rng.uniform_int(static_cast<std::uint64_t>(n_te))));
  }
  return centers;
}

Vector solve_normal_equations(const Matrix& gram, const Vector& rhs, double lambda) {
  Matrix system = gram;
  system.diagonal().array() += lambda;
  if (lambda > 0.0) return Eigen::LDLT<Matrix>(system).solve(rhs);
  Eigen::FullPivLU<Matrix> lu(system);
  if (!lu.isInvertible())
    throw std::runtime_error("fit_closed_form: singular kernel system; use lambda > 0");
  return lu.solve(rhs);
}

void check_fit_args(MatrixRef ref_rows, MatrixRef test_rows, double sigma, double lambda,
                    double alpha, Index n_centers) {
  if (ref_rows.rows() == 0 || test_rows.rows() == 0)
    throw std::invalid_argument("kernel fit: samples must be non-empty");
  if (ref_rows.cols() != test_rows.cols())
    throw std::invalid_argument("kernel fit: reference/test feature dimensions differ");
  if (sigma <= 0.0) throw std::invalid_argument("kernel fit: sigma must be positive");
  if (lambda < 0.0) throw std::invalid_argument("kernel fit: lambda must be non-negative");
  if (!(alpha >= 0.0 && alpha < 1.0)) throw std::invalid_argument("kernel fit: alpha must be in [0, 1)");
  if (n_centers < 1) throw std::invalid_argument("kernel fit: need at least one center");
}

}  // namespace

CvGrid default_cv_grid() { return CvGrid{}; }

double gaussian_kernel(VectorRef x, VectorRef center, double sigma) {
  if (x.size() != center.size())
    throw std::invalid_argument("gaussian_kernel: vector lengths differ");
  if (sigma <= 0.0) throw std::invalid_argument("gaussian_kernel: sigma must be positive");
  return std::exp(-(x - center).squaredNorm() / (2.0 * sigma * sigma));
}

Matrix kernel_matrix(MatrixRef rows, MatrixRef centers, double sigma) {
  // Squared distances via |x|^2 + |c|^2 - 2 x.c, clamped against roundoff.
  Matrix sq = -2.0 * (rows * centers.transpose());
  sq.colwise() += rows.rowwise().squaredNorm();
  sq.rowwise() += centers.rowwise().squaredNorm().transpose();
  return (-sq.cwiseMax(0.0) / (2.0 * sigma * sigma)).array().exp();
}

double median_pairwise_distance(MatrixRef rows) {
  const Index n = rows.rows();
  if (n < 2) throw std::invalid_argument("median_pairwise_distance: need at least 2 rows");
  std::vector<double> dist;
  dist.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(n - 1) / 2);
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) dist.push_back((rows.row(i) - rows.row(j)).norm());
  const std::size_t mid = dist.size() / 2;  // upper median for even counts
  std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(mid), dist.end());
  return dist[mid];
}

KernelModel fit_closed_form(MatrixRef ref_rows, MatrixRef test_rows, double sigma, double lambda,
                            double alpha, Index n_centers, std::uint64_t seed) {
  check_fit_args(ref_rows, test_rows, sigma, lambda, alpha, n_centers);

  KernelModel model;
  model.centers = draw_centers(test_rows, n_centers, seed);
  model.sigma = sigma;
  model.alpha = alpha;
  model.lambda = lambda;

  const Matrix phi_rf = kernel_matrix(ref_rows, model.centers, sigma);
  const Matrix phi_te = kernel_matrix(test_rows, model.centers, sigma);
  const double n_rf = static_cast<double>(ref_rows.rows());
  const double n_te = static_cast<double>(test_rows.rows());

  const Matrix gram = (1.0 - alpha) / n_rf * phi_rf.transpose() * phi_rf +
                      alpha / n_te * phi_te.transpose() * phi_te;
  const Vector rhs = phi_te.colwise().mean();
  model.theta = solve_normal_equations(gram, rhs, lambda);
  return model;
}

std::pair<double, double> cross_validate(MatrixRef ref_rows, MatrixRef test_rows, const CvGrid& grid,
                                         double alpha, Index n_centers, std::uint64_t seed) {
  if (grid.sigmas.empty() || grid.lambdas.empty())
    throw std::invalid_argument("cross_validate: empty hyperparameter grid");
  if (grid.folds < 2) throw std::invalid_argument("cross_validate: need at least 2 folds");
  const Index n_rf = ref_rows.rows();
  const Index n_te = test_rows.rows();
  if (n_rf < grid.folds || n_te < grid.folds)
    throw std::invalid_argument("cross_validate: samples smaller than the fold count");

  // Centers are drawn once from the full test sample and shared by all folds.
  const Matrix centers = draw_centers(test_rows, n_centers, derive_seed(seed, 1));

  const auto fold_chunks = [&](Index n, std::uint64_t s) {
    std::vector<Index> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), Index{0});
    Rng rng(s);
    rng.shuffle(idx);
    std::vector<std::vector<Index>> chunks(static_cast<std::size_t>(grid.folds));
    for (std::size_t i = 0; i < idx.size(); ++i) chunks[i % static_cast<std::size_t>(grid.folds)].push_back(idx[i]);
    return chunks;
  };
  const auto rf_chunks = fold_chunks(n_rf, derive_seed(seed, 2));
  const auto te_chunks = fold_chunks(n_te, derive_seed(seed, 3));

  std::vector<double> sigma_values = grid.sigmas;
  if (grid.scale_by_median) {
    Matrix pooled(n_rf + n_te, ref_rows.cols());
    pooled.topRows(n_rf) = ref_rows;
    pooled.bottomRows(n_te) = test_rows;
    const double med = median_pairwise_distance(pooled);
    const double scale = med > 0.0 ? med : 1.0;  // all-identical rows: leave candidates as-is
    for (double& s : sigma_values) s *= scale;
  }

  // Mean held-out loss per grid point; infinity marks points whose system was
  // singular on some fold.
  Matrix mean_loss = Matrix::Zero(static_cast<Index>(sigma_values.size()),
                                  static_cast<Index>(grid.lambdas.size()));

  for (std::size_t si = 0; si < sigma_values.size(); ++si) {
    const double sigma = sigma_values[si];
    const Matrix phi_rf = kernel_matrix(ref_rows, centers, sigma);
    const Matrix phi_te = kernel_matrix(test_rows, centers, sigma);

    // Train-side Gram pieces come from totals minus the held-out chunk.
    const Matrix gram_rf_total = phi_rf.transpose() * phi_rf;
    const Matrix gram_te_total = phi_te.transpose() * phi_te;
    const Vector sum_te_total = phi_te.colwise().sum();

    for (int f = 0; f < grid.folds; ++f) {
      const auto& rf_held = rf_chunks[static_cast<std::size_t>(f)];
      const auto& te_held = te_chunks[static_cast<std::size_t>(f)];
      Matrix gram_rf_held = Matrix::Zero(n_centers, n_centers);
      Matrix gram_te_held = Matrix::Zero(n_centers, n_centers);
      Vector sum_te_held = Vector::Zero(n_centers);
      for (const Index r : rf_held) gram_rf_held.noalias() += phi_rf.row(r).transpose() * phi_rf.row(r);
      for (const Index r : te_held) {
        gram_te_held.noalias() += phi_te.row(r).transpose() * phi_te.row(r);
        sum_te_held += phi_te.row(r).transpose();
      }
      const double ntr_rf = static_cast<double>(n_rf - static_cast<Index>(rf_held.size()));
      const double ntr_te = static_cast<double>(n_te - static_cast<Index>(te_held.size()));
      const Matrix gram_train = (1.0 - alpha) / ntr_rf * (gram_rf_total - gram_rf_held) +
                                alpha / ntr_te * (gram_te_total - gram_te_held);
      const Vector rhs_train = (sum_te_total - sum_te_held) / ntr_te;

      for (std::size_t li = 0; li < grid.lambdas.size(); ++li) {
        Vector theta;
        try {
          theta = solve_normal_equations(gram_train, rhs_train, grid.lambdas[li]);
        } catch (const std::runtime_error&) {
          mean_loss(static_cast<Index>(si), static_cast<Index>(li)) =
              std::numeric_limits<double>::infinity();
          continue;
        }
        Vector w_rf_held(static_cast<Index>(rf_held.size()));
        Vector w_te_held(static_cast<Index>(te_held.size()));
        Index pos = 0;
        for (const Index r : rf_held) w_rf_held(pos++) = phi_rf.row(r).dot(theta);
        pos = 0;
        for (const Index r : te_held) w_te_held(pos++) = phi_te.row(r).dot(theta);
        mean_loss(static_cast<Index>(si), static_cast<Index>(li)) +=
            rulsif_loss(w_rf_held, w_te_held, alpha) / grid.folds;
      }
    }
  }

  double best_loss = std::numeric_limits<double>::infinity();
  double best_sigma = sigma_values.front();
  double best_lambda = grid.lambdas.front();
  for (std::size_t si = 0; si < sigma_values.size(); ++si) {
    for (std::size_t li = 0; li < grid.lambdas.size(); ++li) {
      const double loss = mean_loss(static_cast<Index>(si), static_cast<Index>(li));
      const bool better =
          loss < best_loss ||
          (loss == best_loss && (grid.lambdas[li] > best_lambda ||
                                 (grid.lambdas[li] == best_lambda && sigma_values[si] > best_sigma)));
      if (better) {
        best_loss = loss;
        best_sigma = sigma_values[si];
        best_lambda = grid.lambdas[li];
      }
    }
  }
  if (!std::isfinite(best_loss))
    throw std::runtime_error("cross_validate: every grid point produced a singular system");
  return {best_sigma, best_lambda};
}

double predict(const KernelModel& model, VectorRef x) {
  if (x.size() != model.centers.cols())
    throw std::invalid_argument("predict: embedding dimension mismatch");
  double acc = 0.0;
  for (Index i = 0; i < model.centers.rows(); ++i)
    acc += model.theta(i) * gaussian_kernel(x, model.centers.row(i).transpose(), model.sigma);
  return acc;
}

Vector predict(const KernelModel& model, MatrixRef rows) {
  if (rows.cols() != model.centers.cols())
    throw std::invalid_argument("predict: embedding dimension mismatch");
  return kernel_matrix(rows, model.centers, model.sigma) * model.theta;
}

}  // namespace cpd
