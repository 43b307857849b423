#pragma once

#include <vector>

#include "cpd/types.hpp"

namespace cpd {

struct TreeOptions {
  int max_depth = 6;
  int min_leaf = 5;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;
};

// Axis-aligned binary regression tree. Nodes are stored in a flat vector with
// the root at index 0.
struct RegressionTree {
  std::vector<TreeNode> nodes;

  double predict(VectorRef x) const;
  double predict_row(MatrixRef rows, Index r) const;
  int depth() const;
};

// Row orders sorted per feature column. Computing this once per matrix lets a
// boosting loop grow many trees without re-sorting.
struct ColumnOrder {
  std::vector<std::vector<int>> per_feature;

  static ColumnOrder of(MatrixRef rows);
  // Keeps only rows with include[row] != 0, preserving sort order.
  ColumnOrder subset(const std::vector<char>& include) const;
};

// Exact greedy least-squares CART: split thresholds are midpoints between
// distinct sorted values, a split must strictly reduce the sum of squared
// errors and leave min_leaf rows on each side, leaves predict the target mean.
RegressionTree fit_tree(MatrixRef rows, VectorRef targets, const TreeOptions& opts = {});

// Same split search on the gradient; leaf values take one Newton step,
// sum(grad) / (sum(hess) + ridge), clipped to a fixed magnitude.
RegressionTree fit_tree_newton(MatrixRef rows, VectorRef grad, VectorRef hess,
                               const TreeOptions& opts = {});

// Presorted variants for boosting loops. Targets are indexed by the row ids
// stored in `order`, which may cover a subset of rows.
RegressionTree fit_tree_presorted(MatrixRef rows, const ColumnOrder& order, VectorRef targets,
                                  const TreeOptions& opts);
RegressionTree fit_tree_presorted_newton(MatrixRef rows, const ColumnOrder& order, VectorRef grad,
                                         VectorRef hess, const TreeOptions& opts);

}  // namespace cpd
