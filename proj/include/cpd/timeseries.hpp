#pragma once

#include <cstdint>

#include "cpd/types.hpp"

namespace cpd {

// Regularly sampled d-dimensional series; row t is the observation x(t).
class TimeSeries {
 public:
  TimeSeries() = default;
  // Throws std::invalid_argument on empty or non-finite input.
  explicit TimeSeries(Matrix values);

  Index length() const { return values_.rows(); }
  Index dim() const { return values_.cols(); }
  const Matrix& values() const { return values_; }

 private:
  Matrix values_;
};

// One lagged window, laid out as [x(t), x(t-1), ..., x(t-k+1)] concatenated.
struct SequenceEmbedding {
  Vector vector;
  Index anchor_time = 0;
  Index window_len = 0;
};

// n embeddings with consecutive descending anchors t, t-1, ..., t-n+1.
// Row i of rows() is the embedding anchored at anchor_time - i.
class SequenceSample {
 public:
  SequenceSample(Matrix rows, Index anchor_time, Index window_len);

  Index size() const { return rows_.rows(); }
  Index feature_dim() const { return rows_.cols(); }
  const Matrix& rows() const { return rows_; }
  Index anchor_time() const { return anchor_time_; }
  Index window_len() const { return window_len_; }

 private:
  Matrix rows_;
  Index anchor_time_ = 0;
  Index window_len_ = 0;
};

// Disjoint, exhaustive row partition of a sample; order within parts follows
// the shuffle, not the original anchors.
struct SplitPair {
  Matrix train;
  Matrix valid;
  std::uint64_t seed = 0;
};

// Embedding at time t with window k; requires k-1 <= t < series length.
SequenceEmbedding embed(const TimeSeries& series, Index t, Index k);

// Sample of n embeddings anchored at t, t-1, ..., t-n+1.
SequenceSample make_sample(const TimeSeries& series, Index t, Index k, Index n);

// Seed-deterministic uniform partition. The train part gets
// ceil(fraction * n) rows, clamped so both parts are non-empty.
SplitPair random_split(const SequenceSample& sample, double fraction, std::uint64_t seed);
SplitPair random_split(MatrixRef rows, double fraction, std::uint64_t seed);

}  // namespace cpd
