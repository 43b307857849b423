#include "cpd/boosting.hpp"

#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <utility>
#include <vector>

#include "cpd/rng.hpp"
#include "cpd/rulsif_loss.hpp"

namespace cpd {

namespace {

void check_boost_args(MatrixRef ref_rows, MatrixRef test_rows, const BoostOptions& opts) {
  if (ref_rows.rows() == 0 || test_rows.rows() == 0)
    throw std::invalid_argument("boosting: both samples must be non-empty");
  if (ref_rows.cols() != test_rows.cols())
    throw std::invalid_argument("boosting: samples must share the feature dimension");
  if (opts.rounds < 0) throw std::invalid_argument("boosting: rounds must be >= 0");
  if (!(opts.learning_rate > 0.0))
    throw std::invalid_argument("boosting: learning_rate must be > 0");
  if (!(opts.alpha >= 0.0 && opts.alpha < 1.0))
    throw std::invalid_argument("boosting: alpha must lie in [0, 1)");
  if (!(opts.subsample > 0.0 && opts.subsample <= 1.0))
    throw std::invalid_argument("boosting: subsample must lie in (0, 1]");
  if (!(opts.init_noise_sigma >= 0.0))
    throw std::invalid_argument("boosting: init_noise_sigma must be >= 0");
}

Matrix stack_rows(MatrixRef ref_rows, MatrixRef test_rows) {
  Matrix rows(ref_rows.rows() + test_rows.rows(), ref_rows.cols());
  rows.topRows(ref_rows.rows()) = ref_rows;
  rows.bottomRows(test_rows.rows()) = test_rows;
  return rows;
}

// Draw a without-replacement row subset as include flags; empty means all rows.
std::vector<char> draw_subset(Index n, double fraction, Rng& rng) {
  if (fraction >= 1.0) return {};
  Index want = static_cast<Index>(std::llround(fraction * static_cast<double>(n)));
  if (want < 1) want = 1;
  if (want > n) want = n;
  std::vector<Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Index{0});
  std::vector<char> include(static_cast<std::size_t>(n), 0);
  for (Index i = 0; i < want; ++i) {
    const auto j = i + static_cast<Index>(rng.uniform_int(static_cast<std::uint64_t>(n - i)));
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
    include[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])] = 1;
  }
  return include;
}

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

double sigmoid(double x) {
  if (x >= 0.0) {
    const double z = std::exp(-x);
    return 1.0 / (1.0 + z);
  }
  const double z = std::exp(x);
  return z / (1.0 + z);
}

double bce_loss(VectorRef logits, Index n_ref) {
  double total = 0.0;
  for (Index i = 0; i < logits.size(); ++i) {
    const bool in_test = i >= n_ref;
    total += in_test ? softplus(-logits(i)) : softplus(logits(i));
  }
  return total / static_cast<double>(logits.size());
}

}  // namespace

BoostedEnsemble fit_gbdt_rulsif(MatrixRef ref_rows, MatrixRef test_rows, const BoostOptions& opts,
                                std::uint64_t seed) {
  check_boost_args(ref_rows, test_rows, opts);
  const Index n_rf = ref_rows.rows();
  const Index n_te = test_rows.rows();
  const Index n = n_rf + n_te;
  const Matrix rows = stack_rows(ref_rows, test_rows);
  const ColumnOrder order = ColumnOrder::of(rows);
  TreeOptions tree_opts{opts.max_depth, opts.min_leaf};
  Rng rng(seed);

  Vector w = Vector::Ones(n);
  for (Index i = 0; i < n; ++i) w(i) += rng.normal(0.0, opts.init_noise_sigma);

  BoostedEnsemble model;
  model.learning_rate = opts.learning_rate;
  model.base_value = 1.0;
  model.kind = EnsembleKind::Ratio;
  model.alpha = opts.alpha;
  model.subsample = opts.subsample;
  model.trees.reserve(static_cast<std::size_t>(opts.rounds));
  if (opts.record_loss)
    model.train_loss.push_back(rulsif_loss(w.head(n_rf), w.tail(n_te), opts.alpha));

  Vector z(n);
  for (int m = 0; m < opts.rounds; ++m) {
    for (Index i = 0; i < n; ++i) z(i) = rulsif_gradient_target(w(i), i >= n_rf, opts.alpha);
    const std::vector<char> include = draw_subset(n, opts.subsample, rng);
    RegressionTree tree = include.empty()
                              ? fit_tree_presorted(rows, order, z, tree_opts)
                              : fit_tree_presorted(rows, order.subset(include), z, tree_opts);
    for (Index i = 0; i < n; ++i) w(i) += opts.learning_rate * tree.predict_row(rows, i);
    model.trees.push_back(std::move(tree));
    if (opts.record_loss)
      model.train_loss.push_back(rulsif_loss(w.head(n_rf), w.tail(n_te), opts.alpha));
  }
  model.train_values = std::move(w);
  return model;
}

BoostedEnsemble fit_gbdt_classifier(MatrixRef ref_rows, MatrixRef test_rows,
                                    const BoostOptions& opts, std::uint64_t seed) {
  check_boost_args(ref_rows, test_rows, opts);
  const Index n_rf = ref_rows.rows();
  const Index n_te = test_rows.rows();
  const Index n = n_rf + n_te;
  const Matrix rows = stack_rows(ref_rows, test_rows);
  const ColumnOrder order = ColumnOrder::of(rows);
  TreeOptions tree_opts{opts.max_depth, opts.min_leaf};
  Rng rng(seed);

  const double base_rate = static_cast<double>(n_te) / static_cast<double>(n);
  const double base_logit = std::log(base_rate / (1.0 - base_rate));

  BoostedEnsemble model;
  model.learning_rate = opts.learning_rate;
  model.base_value = base_logit;
  model.kind = EnsembleKind::Classifier;
  model.alpha = opts.alpha;
  model.subsample = opts.subsample;
  model.trees.reserve(static_cast<std::size_t>(opts.rounds));

  Vector logits = Vector::Constant(n, base_logit);
  if (opts.record_loss) model.train_loss.push_back(bce_loss(logits, n_rf));

  Vector grad(n), hess(n);
  for (int m = 0; m < opts.rounds; ++m) {
    for (Index i = 0; i < n; ++i) {
      const double p = sigmoid(logits(i));
      const double y = i >= n_rf ? 1.0 : 0.0;
      grad(i) = y - p;
      hess(i) = p * (1.0 - p);
    }
    const std::vector<char> include = draw_subset(n, opts.subsample, rng);
    RegressionTree tree =
        include.empty()
            ? fit_tree_presorted_newton(rows, order, grad, hess, tree_opts)
            : fit_tree_presorted_newton(rows, order.subset(include), grad, hess, tree_opts);
    for (Index i = 0; i < n; ++i) logits(i) += opts.learning_rate * tree.predict_row(rows, i);
    model.trees.push_back(std::move(tree));
    if (opts.record_loss) model.train_loss.push_back(bce_loss(logits, n_rf));
  }
  model.train_values = std::move(logits);
  return model;
}

double predict_ensemble(const BoostedEnsemble& model, VectorRef x) {
  double acc = model.base_value;
  for (const RegressionTree& tree : model.trees) acc += model.learning_rate * tree.predict(x);
  return model.kind == EnsembleKind::Classifier ? sigmoid(acc) : acc;
}

Vector predict_ensemble(const BoostedEnsemble& model, MatrixRef rows) {
  Vector out = Vector::Constant(rows.rows(), model.base_value);
  for (const RegressionTree& tree : model.trees)
    for (Index r = 0; r < rows.rows(); ++r)
      out(r) += model.learning_rate * tree.predict_row(rows, r);
  if (model.kind == EnsembleKind::Classifier)
    for (Index r = 0; r < out.size(); ++r) out(r) = sigmoid(out(r));
  return out;
}

}  // namespace cpd
