#include "cpd/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace cpd {

namespace {

// Newton leaves: small ridge on the hessian sum and a magnitude cap keep
// near-saturated leaves from producing huge logit jumps.
constexpr double kNewtonRidge = 1e-3;
constexpr double kMaxNewtonLeaf = 4.0;

// A split must beat this to count as strictly reducing the SSE; relative to
// the node's raw second moment so constant-target nodes stay leaves.
double min_gain(double sumsq) { return 1e-10 * std::max(1.0, sumsq); }

struct BestSplit {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
  int left_count = 0;
};

// Exact greedy CART on presorted feature orders. The orders live in one flat
// buffer (a [begin, end) slice per node, one segment per feature) with the
// feature values carried alongside, so split scans are sequential reads and a
// node's children are produced by a stable in-place partition with shared
// scratch; nothing allocates per node.
class TreeBuilder {
 public:
  TreeBuilder(MatrixRef rows, VectorRef grad, const Vector* hess, const TreeOptions& opts)
      : rows_(rows), grad_(grad), hess_(hess), opts_(opts) {}

  RegressionTree build(const std::vector<std::vector<int>>& orders) {
    n_ = static_cast<int>(orders.front().size());
    const std::size_t features = orders.size();
    idx_.resize(features * static_cast<std::size_t>(n_));
    val_.resize(idx_.size());
    gval_.resize(idx_.size());
    hval_.resize(hess_ ? idx_.size() : 0);
    for (std::size_t j = 0; j < features; ++j) {
      int* ids = ids_of(static_cast<int>(j));
      double* vals = vals_of(static_cast<int>(j));
      double* gvals = gvals_of(static_cast<int>(j));
      for (int pos = 0; pos < n_; ++pos) {
        ids[pos] = orders[j][static_cast<std::size_t>(pos)];
        vals[pos] = rows_(ids[pos], static_cast<Index>(j));
        gvals[pos] = grad_(ids[pos]);
      }
      if (hess_ != nullptr) {
        double* hvals = hvals_of(static_cast<int>(j));
        for (int pos = 0; pos < n_; ++pos) hvals[pos] = (*hess_)(ids[pos]);
      }
    }
    go_left_.assign(static_cast<std::size_t>(rows_.rows()), 0);
    tmp_idx_.resize(static_cast<std::size_t>(n_));
    tmp_val_.resize(static_cast<std::size_t>(n_));
    tmp_gval_.resize(static_cast<std::size_t>(n_));
    tmp_hval_.resize(hess_ ? static_cast<std::size_t>(n_) : 0);
    tree_.nodes.clear();
    grow(0, n_, 0);
    return std::move(tree_);
  }

 private:
  double leaf_value(double sum_g, double sum_h, int count) const {
    if (hess_ == nullptr) return sum_g / count;
    const double v = sum_g / (sum_h + kNewtonRidge);
    return std::clamp(v, -kMaxNewtonLeaf, kMaxNewtonLeaf);
  }

  int* ids_of(int feature) { return idx_.data() + static_cast<std::size_t>(feature) * n_; }
  double* vals_of(int feature) { return val_.data() + static_cast<std::size_t>(feature) * n_; }
  double* gvals_of(int feature) { return gval_.data() + static_cast<std::size_t>(feature) * n_; }
  double* hvals_of(int feature) { return hval_.data() + static_cast<std::size_t>(feature) * n_; }

  // Appends the subtree for slice [begin, end); returns its node index.
  int grow(int begin, int end, int depth) {
    const int count = end - begin;
    const double* gvals = gvals_of(0) + begin;
    double sum_g = 0.0, sumsq_g = 0.0, sum_h = 0.0;
    for (int pos = 0; pos < count; ++pos) {
      const double g = gvals[pos];
      sum_g += g;
      sumsq_g += g * g;
    }
    if (hess_ != nullptr) {
      const double* hvals = hvals_of(0) + begin;
      for (int pos = 0; pos < count; ++pos) sum_h += hvals[pos];
    }

    const int node_id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    tree_.nodes[node_id].value = leaf_value(sum_g, sum_h, count);

    if (depth >= opts_.max_depth || count < 2 * opts_.min_leaf) return node_id;

    const BestSplit best = find_split(begin, end, sum_g, sumsq_g, count);
    if (best.feature < 0) return node_id;

    partition(begin, end, best);

    tree_.nodes[node_id].feature = best.feature;
    tree_.nodes[node_id].threshold = best.threshold;
    const int l = grow(begin, begin + best.left_count, depth + 1);
    tree_.nodes[node_id].left = l;
    const int r = grow(begin + best.left_count, end, depth + 1);
    tree_.nodes[node_id].right = r;
    return node_id;
  }

  BestSplit find_split(int begin, int end, double sum_g, double sumsq_g, int count) {
    BestSplit best;
    best.gain = min_gain(sumsq_g);
    const double parent_score = sum_g * sum_g / count;

    for (Index j = 0; j < rows_.cols(); ++j) {
      const double* vals = vals_of(static_cast<int>(j)) + begin;
      const double* gvals = gvals_of(static_cast<int>(j)) + begin;
      double left_sum = 0.0;
      for (int pos = 0; pos + 1 < count; ++pos) {
        left_sum += gvals[pos];
        const int nl = pos + 1;
        const int nr = count - nl;
        if (nr < opts_.min_leaf) break;
        const double v = vals[pos];
        const double vn = vals[pos + 1];
        if (v == vn || nl < opts_.min_leaf) continue;
        const double right_sum = sum_g - left_sum;
        const double gain =
            left_sum * left_sum / nl + right_sum * right_sum / nr - parent_score;
        if (gain > best.gain) {
          double thr = v + (vn - v) / 2.0;
          if (thr <= v) thr = vn;  // midpoint rounded down to v between adjacent doubles
          best.feature = static_cast<int>(j);
          best.threshold = thr;
          best.gain = gain;
          best.left_count = nl;
        }
      }
    }
    return best;
  }

  // Stable-partition every feature's slice by the split predicate. The split
  // feature's slice is sorted, so its left rows are exactly the first
  // left_count entries.
  void partition(int begin, int end, const BestSplit& best) {
    const int* split_ids = ids_of(best.feature) + begin;
    for (int pos = 0; pos < best.left_count; ++pos) go_left_[split_ids[pos]] = 1;

    const int count = end - begin;
    for (Index j = 0; j < rows_.cols(); ++j) {
      if (static_cast<int>(j) == best.feature) continue;
      int* ids = ids_of(static_cast<int>(j)) + begin;
      double* vals = vals_of(static_cast<int>(j)) + begin;
      double* gvals = gvals_of(static_cast<int>(j)) + begin;
      double* hvals = hess_ ? hvals_of(static_cast<int>(j)) + begin : nullptr;
      int nl = 0, nr = 0;
      for (int pos = 0; pos < count; ++pos) {
        if (go_left_[ids[pos]]) {
          ids[nl] = ids[pos];
          vals[nl] = vals[pos];
          gvals[nl] = gvals[pos];
          if (hvals != nullptr) hvals[nl] = hvals[pos];
          ++nl;
        } else {
          tmp_idx_[nr] = ids[pos];
          tmp_val_[nr] = vals[pos];
          tmp_gval_[nr] = gvals[pos];
          if (hvals != nullptr) tmp_hval_[nr] = hvals[pos];
          ++nr;
        }
      }
      std::copy(tmp_idx_.begin(), tmp_idx_.begin() + nr, ids + nl);
      std::copy(tmp_val_.begin(), tmp_val_.begin() + nr, vals + nl);
      std::copy(tmp_gval_.begin(), tmp_gval_.begin() + nr, gvals + nl);
      if (hvals != nullptr) std::copy(tmp_hval_.begin(), tmp_hval_.begin() + nr, hvals + nl);
    }

    split_ids = ids_of(best.feature) + begin;
    for (int pos = 0; pos < best.left_count; ++pos) go_left_[split_ids[pos]] = 0;
  }

  MatrixRef rows_;
  VectorRef grad_;
  const Vector* hess_;
  TreeOptions opts_;
  RegressionTree tree_;
  int n_ = 0;
  std::vector<int> idx_;
  std::vector<double> val_;
  std::vector<double> gval_;
  std::vector<double> hval_;
  std::vector<char> go_left_;
  std::vector<int> tmp_idx_;
  std::vector<double> tmp_val_;
  std::vector<double> tmp_gval_;
  std::vector<double> tmp_hval_;
};

void check_tree_args(MatrixRef rows, VectorRef targets, const TreeOptions& opts) {
  if (rows.rows() == 0 || rows.cols() == 0) throw std::invalid_argument("fit_tree: empty row matrix");
  if (targets.size() != rows.rows())
    throw std::invalid_argument("fit_tree: targets length must match row count");
  if (!targets.allFinite()) throw std::invalid_argument("fit_tree: targets must be finite");
  if (opts.max_depth < 0 || opts.min_leaf < 1)
    throw std::invalid_argument("fit_tree: invalid tree options");
}

}  // namespace

double RegressionTree::predict(VectorRef x) const {
  int node = 0;
  while (nodes[static_cast<std::size_t>(node)].feature >= 0) {
    const TreeNode& nd = nodes[static_cast<std::size_t>(node)];
    node = x(nd.feature) < nd.threshold ? nd.left : nd.right;
  }
  return nodes[static_cast<std::size_t>(node)].value;
}

double RegressionTree::predict_row(MatrixRef rows, Index r) const {
  int node = 0;
  while (nodes[static_cast<std::size_t>(node)].feature >= 0) {
    const TreeNode& nd = nodes[static_cast<std::size_t>(node)];
    node = rows(r, nd.feature) < nd.threshold ? nd.left : nd.right;
  }
  return nodes[static_cast<std::size_t>(node)].value;
}

int RegressionTree::depth() const {
  // Depth of the flat representation by walking from each leaf is overkill;
  // recurse instead.
  struct Walk {
    const std::vector<TreeNode>& nodes;
    int at(int id) const {
      const TreeNode& nd = nodes[static_cast<std::size_t>(id)];
      if (nd.feature < 0) return 0;
      return 1 + std::max(at(nd.left), at(nd.right));
    }
  };
  return Walk{nodes}.at(0);
}

ColumnOrder ColumnOrder::of(MatrixRef rows) {
  ColumnOrder out;
  out.per_feature.resize(static_cast<std::size_t>(rows.cols()));
  std::vector<int> base(static_cast<std::size_t>(rows.rows()));
  std::iota(base.begin(), base.end(), 0);
  for (Index j = 0; j < rows.cols(); ++j) {
    auto& ord = out.per_feature[static_cast<std::size_t>(j)];
    ord = base;
    std::stable_sort(ord.begin(), ord.end(),
                     [&rows, j](int a, int b) { return rows(a, j) < rows(b, j); });
  }
  return out;
}

ColumnOrder ColumnOrder::subset(const std::vector<char>& include) const {
  ColumnOrder out;
  out.per_feature.resize(per_feature.size());
  for (std::size_t j = 0; j < per_feature.size(); ++j) {
    auto& dst = out.per_feature[j];
    dst.reserve(per_feature[j].size());
    for (const int i : per_feature[j])
      if (include[static_cast<std::size_t>(i)]) dst.push_back(i);
  }
  return out;
}

RegressionTree fit_tree(MatrixRef rows, VectorRef targets, const TreeOptions& opts) {
  check_tree_args(rows, targets, opts);
  return TreeBuilder(rows, targets, nullptr, opts).build(ColumnOrder::of(rows).per_feature);
}

RegressionTree fit_tree_newton(MatrixRef rows, VectorRef grad, VectorRef hess,
                               const TreeOptions& opts) {
  check_tree_args(rows, grad, opts);
  if (hess.size() != grad.size())
    throw std::invalid_argument("fit_tree_newton: gradient/hessian length mismatch");
  const Vector h = hess;
  return TreeBuilder(rows, grad, &h, opts).build(ColumnOrder::of(rows).per_feature);
}

RegressionTree fit_tree_presorted(MatrixRef rows, const ColumnOrder& order, VectorRef targets,
                                  const TreeOptions& opts) {
  return TreeBuilder(rows, targets, nullptr, opts).build(order.per_feature);
}

RegressionTree fit_tree_presorted_newton(MatrixRef rows, const ColumnOrder& order, VectorRef grad,
                                         VectorRef hess, const TreeOptions& opts) {
  const Vector h = hess;
  return TreeBuilder(rows, grad, &h, opts).build(order.per_feature);
}

}  // namespace cpd
