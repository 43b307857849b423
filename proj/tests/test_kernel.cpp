#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "cpd/kernel_rulsif.hpp"
#include "cpd/rng.hpp"

using namespace cpd;

namespace {

Matrix gaussian_rows(Index n, Index d, double shift, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(n, d);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < d; ++j) m(i, j) = rng.normal(shift, 1.0);
  return m;
}

// Penalized objective evaluated from first principles: every kernel value and
// sum is recomputed with plain loops so the oracle shares no linear algebra
// with the closed-form solver.
double penalized_objective(const Vector& theta, const Matrix& ref, const Matrix& test,
                           const Matrix& centers, double sigma, double lambda, double alpha) {
  auto w_at = [&](const Matrix& rows, Index i) {
    double w = 0.0;
    for (Index l = 0; l < centers.rows(); ++l) {
      double sq = 0.0;
      for (Index j = 0; j < rows.cols(); ++j) {
        const double diff = rows(i, j) - centers(l, j);
        sq += diff * diff;
      }
      w += theta(l) * std::exp(-sq / (2.0 * sigma * sigma));
    }
    return w;
  };
  double ref_sq = 0.0, test_sq = 0.0, test_sum = 0.0;
  for (Index i = 0; i < ref.rows(); ++i) {
    const double w = w_at(ref, i);
    ref_sq += w * w;
  }
  for (Index i = 0; i < test.rows(); ++i) {
    const double w = w_at(test, i);
    test_sq += w * w;
    test_sum += w;
  }
  const double n_rf = static_cast<double>(ref.rows());
  const double n_te = static_cast<double>(test.rows());
  return (1.0 - alpha) / (2.0 * n_rf) * ref_sq + alpha / (2.0 * n_te) * test_sq -
         test_sum / n_te + 0.5 * lambda * theta.squaredNorm();
}

// Coordinate descent with parabolic-vertex steps. The objective is exactly
// quadratic in each coordinate, so the vertex of the parabola through three
// probes is the exact 1-D minimizer; sweeping to a fixed point solves the
// full problem without touching the normal equations.
Vector minimize_numerically(const Matrix& ref, const Matrix& test, const Matrix& centers,
                            double sigma, double lambda, double alpha) {
  Vector theta = Vector::Zero(centers.rows());
  const double h = 0.5;
  for (int sweep = 0; sweep < 400; ++sweep) {
    double max_move = 0.0;
    for (Index l = 0; l < theta.size(); ++l) {
      Vector probe = theta;
      probe(l) = theta(l) - h;
      const double f_lo = penalized_objective(probe, ref, test, centers, sigma, lambda, alpha);
      probe(l) = theta(l) + h;
      const double f_hi = penalized_objective(probe, ref, test, centers, sigma, lambda, alpha);
      probe(l) = theta(l);
      const double f_mid = penalized_objective(probe, ref, test, centers, sigma, lambda, alpha);
      const double curvature = f_hi - 2.0 * f_mid + f_lo;
      REQUIRE(curvature > 0.0);  // ridge keeps every coordinate strictly convex
      const double step = -h * (f_hi - f_lo) / (2.0 * curvature);
      theta(l) += step;
      max_move = std::max(max_move, std::abs(step));
    }
    if (max_move < 1e-13) break;
  }
  return theta;
}

}  // namespace

TEST_CASE("gaussian_kernel hand values") {
  Vector x(2), c(2);
  x << 1.0, 0.0;
  c << 0.0, 1.0;
  CHECK(gaussian_kernel(x, x, 0.7) == doctest::Approx(1.0).epsilon(1e-15));
  // |x - c|^2 = 2, sigma = 1: exp(-2 / 2) = exp(-1).
  CHECK(gaussian_kernel(x, c, 1.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
  // sigma = 2: exp(-2 / 8).
  CHECK(gaussian_kernel(x, c, 2.0) == doctest::Approx(std::exp(-0.25)).epsilon(1e-14));
}

TEST_CASE("kernel_matrix matches the scalar kernel entry-wise") {
  const Matrix rows = gaussian_rows(5, 3, 0.0, 11);
  const Matrix centers = gaussian_rows(4, 3, 1.0, 12);
  const Matrix k = kernel_matrix(rows, centers, 0.9);
  REQUIRE(k.rows() == 5);
  REQUIRE(k.cols() == 4);
  for (Index i = 0; i < 5; ++i)
    for (Index j = 0; j < 4; ++j)
      CHECK(k(i, j) == doctest::Approx(gaussian_kernel(rows.row(i), centers.row(j), 0.9))
                           .epsilon(1e-14));
}

TEST_CASE("closed form matches independent numeric minimization") {
  struct Instance {
    double sigma, lambda, alpha;
    std::uint64_t seed;
  };
  const Instance instances[] = {
      {0.8, 0.1, 0.1, 101},
      {1.5, 1.0, 0.1, 102},
      {0.6, 0.05, 0.0, 103},  // plain (non-relative) ratio
      {1.0, 0.5, 0.5, 104},
  };
  for (const Instance& in : instances) {
    CAPTURE(in.seed);
    const Matrix ref = gaussian_rows(9, 2, 0.0, in.seed);
    const Matrix test = gaussian_rows(8, 2, 0.7, in.seed + 50);
    const KernelModel model =
        fit_closed_form(ref, test, in.sigma, in.lambda, in.alpha, 3, in.seed + 99);
    REQUIRE(model.theta.size() == 3);
    const Vector oracle =
        minimize_numerically(ref, test, model.centers, in.sigma, in.lambda, in.alpha);
    for (Index l = 0; l < 3; ++l) CHECK(model.theta(l) == doctest::Approx(oracle(l)).epsilon(1e-6));
    CHECK(model.sigma == in.sigma);
    CHECK(model.lambda == in.lambda);
    CHECK(model.alpha == in.alpha);
  }
}

TEST_CASE("fitted theta is a stationary point of the penalized objective") {
  const Matrix ref = gaussian_rows(10, 2, 0.0, 7);
  const Matrix test = gaussian_rows(10, 2, 1.0, 8);
  const KernelModel model = fit_closed_form(ref, test, 1.0, 0.2, 0.1, 3, 9);
  const double at = penalized_objective(model.theta, ref, test, model.centers, 1.0, 0.2, 0.1);
  // Central differences of the objective vanish at the minimizer.
  for (Index l = 0; l < model.theta.size(); ++l) {
    Vector probe = model.theta;
    const double h = 1e-5;
    probe(l) += h;
    const double up = penalized_objective(probe, ref, test, model.centers, 1.0, 0.2, 0.1);
    probe(l) -= 2.0 * h;
    const double down = penalized_objective(probe, ref, test, model.centers, 1.0, 0.2, 0.1);
    CHECK(std::abs((up - down) / (2.0 * h)) < 1e-7);
    CHECK(up >= at);
    CHECK(down >= at);
  }
}

TEST_CASE("predict applies the kernel expansion; batch equals scalar") {
  const Matrix ref = gaussian_rows(8, 2, 0.0, 21);
  const Matrix test = gaussian_rows(8, 2, 0.5, 22);
  const KernelModel model = fit_closed_form(ref, test, 0.9, 0.1, 0.1, 3, 23);
  const Matrix probes = gaussian_rows(6, 2, 0.2, 24);
  const Vector batch = predict(model, MatrixRef(probes));
  REQUIRE(batch.size() == 6);
  for (Index i = 0; i < 6; ++i) {
    const Vector x = probes.row(i).transpose();
    CHECK(batch(i) == doctest::Approx(predict(model, VectorRef(x))).epsilon(1e-14));
    double manual = 0.0;
    for (Index l = 0; l < model.centers.rows(); ++l)
      manual += model.theta(l) * gaussian_kernel(probes.row(i), model.centers.row(l), model.sigma);
    CHECK(batch(i) == doctest::Approx(manual).epsilon(1e-13));
  }
}

TEST_CASE("centers are drawn from the test sample") {
  const Matrix ref = gaussian_rows(12, 2, 0.0, 31);
  const Matrix test = gaussian_rows(12, 2, 2.0, 32);
  const KernelModel model = fit_closed_form(ref, test, 1.0, 0.1, 0.1, 5, 33);
  REQUIRE(model.centers.rows() == 5);
  for (Index l = 0; l < model.centers.rows(); ++l) {
    bool found = false;
    for (Index i = 0; i < test.rows() && !found; ++i)
      found = (model.centers.row(l) - test.row(i)).norm() == 0.0;
    CHECK(found);
  }
}

TEST_CASE("unpenalized fit on a singular design is rejected") {
  // Identical test rows give identical centers and a rank-1 normal matrix.
  Matrix ref = gaussian_rows(6, 2, 0.0, 41);
  Matrix test(6, 2);
  for (Index i = 0; i < 6; ++i) test.row(i) << 1.0, -1.0;
  CHECK_THROWS_AS(fit_closed_form(ref, test, 1.0, 0.0, 0.1, 3, 42), std::runtime_error);
  // The same design with a ridge is fine.
  CHECK_NOTHROW(fit_closed_form(ref, test, 1.0, 0.1, 0.1, 3, 42));
}

TEST_CASE("median_pairwise_distance hand values") {
  // Collinear points 0, 1, 3: distances {1, 2, 3}, median 2.
  Matrix odd(3, 1);
  odd << 0.0, 1.0, 3.0;
  CHECK(median_pairwise_distance(odd) == 2.0);
  // Points 0, 1, 3, 6: distances {1, 3, 6, 2, 5, 3} -> sorted {1,2,3,3,5,6};
  // even count takes the upper median, 3.
  Matrix even(4, 1);
  even << 0.0, 1.0, 3.0, 6.0;
  CHECK(median_pairwise_distance(even) == 3.0);
  // Distances use the euclidean row norm: a 3-4-5 right triangle gives
  // distances {3, 4, 5}, median 4.
  Matrix triangle(3, 2);
  triangle << 0.0, 0.0, 3.0, 0.0, 0.0, 4.0;
  CHECK(median_pairwise_distance(triangle) == 4.0);
  Matrix single(1, 2);
  single << 0.0, 0.0;
  CHECK_THROWS_AS(median_pairwise_distance(single), std::invalid_argument);
}

TEST_CASE("cross_validate scales sigma candidates by the pooled median distance") {
  const Matrix ref = gaussian_rows(40, 2, 0.0, 51);
  const Matrix test = gaussian_rows(40, 2, 1.5, 52);
  const CvGrid grid = default_cv_grid();
  REQUIRE(grid.sigmas.size() == 5);
  REQUIRE(grid.lambdas.size() == 5);
  REQUIRE(grid.scale_by_median);
  // Recompute the candidate widths the CV loop derives: grid multiples of the
  // median pairwise distance of the stacked reference + test rows.
  Matrix pooled(ref.rows() + test.rows(), ref.cols());
  pooled.topRows(ref.rows()) = ref;
  pooled.bottomRows(test.rows()) = test;
  const double med = median_pairwise_distance(pooled);
  REQUIRE(med > 0.0);
  std::vector<double> candidates;
  for (const double s : grid.sigmas) candidates.push_back(s * med);
  const auto [sigma, lambda] = cross_validate(ref, test, grid, 0.1, 10, 53);
  CHECK(std::count(candidates.begin(), candidates.end(), sigma) == 1);
  CHECK(std::count(grid.lambdas.begin(), grid.lambdas.end(), lambda) == 1);
  const auto again = cross_validate(ref, test, grid, 0.1, 10, 53);
  CHECK(again.first == sigma);
  CHECK(again.second == lambda);
}

TEST_CASE("cross_validate with absolute widths returns grid members") {
  const Matrix ref = gaussian_rows(40, 2, 0.0, 51);
  const Matrix test = gaussian_rows(40, 2, 1.5, 52);
  CvGrid grid;
  grid.sigmas = {0.3, 1.0, 3.0, 10.0};
  grid.scale_by_median = false;
  const auto [sigma, lambda] = cross_validate(ref, test, grid, 0.1, 10, 53);
  CHECK(std::count(grid.sigmas.begin(), grid.sigmas.end(), sigma) == 1);
  CHECK(std::count(grid.lambdas.begin(), grid.lambdas.end(), lambda) == 1);
}

TEST_CASE("cross_validate rejects an empty grid") {
  const Matrix ref = gaussian_rows(10, 2, 0.0, 61);
  const Matrix test = gaussian_rows(10, 2, 0.0, 62);
  CvGrid empty;
  empty.sigmas.clear();
  CHECK_THROWS_AS(cross_validate(ref, test, empty, 0.1, 5, 63), std::invalid_argument);
}
