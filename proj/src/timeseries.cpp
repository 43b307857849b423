#include "cpd/timeseries.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "cpd/rng.hpp"

namespace cpd {

TimeSeries::TimeSeries(Matrix values) : values_(std::move(values)) {
  if (values_.rows() < 1 || values_.cols() < 1)
    throw std::invalid_argument("TimeSeries: need at least one row and one column");
  if (!values_.allFinite())
    throw std::invalid_argument("TimeSeries: values must be finite");
}

SequenceSample::SequenceSample(Matrix rows, Index anchor_time, Index window_len)
    : rows_(std::move(rows)), anchor_time_(anchor_time), window_len_(window_len) {
  if (rows_.rows() < 2) throw std::invalid_argument("SequenceSample: size must be >= 2");
}

SequenceEmbedding embed(const TimeSeries& series, Index t, Index k) {
  if (k < 1) throw std::out_of_range("embed: window length must be >= 1");
  if (t < k - 1 || t >= series.length())
    throw std::out_of_range("embed: need k-1 <= t < series length, got t=" + std::to_string(t) +
                            ", k=" + std::to_string(k) + ", T=" + std::to_string(series.length()));
  const Index d = series.dim();
  SequenceEmbedding e;
  e.anchor_time = t;
  e.window_len = k;
  e.vector.resize(k * d);
  for (Index j = 0; j < k; ++j) e.vector.segment(j * d, d) = series.values().row(t - j);
  return e;
}

SequenceSample make_sample(const TimeSeries& series, Index t, Index k, Index n) {
  if (n < 2) throw std::out_of_range("make_sample: sample size must be >= 2");
  if (t - n + 1 < k - 1 || t >= series.length())
    throw std::out_of_range("make_sample: insufficient history for t=" + std::to_string(t) +
                            ", k=" + std::to_string(k) + ", n=" + std::to_string(n));
  const Index d = series.dim();
  Matrix rows(n, k * d);
  for (Index i = 0; i < n; ++i) {
    const Index anchor = t - i;
    for (Index j = 0; j < k; ++j) rows.row(i).segment(j * d, d) = series.values().row(anchor - j);
  }
  return SequenceSample(std::move(rows), t, k);
}

SplitPair random_split(MatrixRef rows, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0))
    throw std::invalid_argument("random_split: fraction must lie in (0, 1)");
  const Index n = rows.rows();
  if (n < 2) throw std::invalid_argument("random_split: need at least 2 rows");

  std::vector<Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Index{0});
  Rng rng(seed);
  rng.shuffle(idx);

  Index train_size = static_cast<Index>(std::ceil(fraction * static_cast<double>(n)));
  train_size = std::max<Index>(1, std::min<Index>(n - 1, train_size));

  SplitPair out;
  out.seed = seed;
  out.train.resize(train_size, rows.cols());
  out.valid.resize(n - train_size, rows.cols());
  for (Index i = 0; i < train_size; ++i) out.train.row(i) = rows.row(idx[static_cast<std::size_t>(i)]);
  for (Index i = train_size; i < n; ++i)
    out.valid.row(i - train_size) = rows.row(idx[static_cast<std::size_t>(i)]);
  return out;
}

SplitPair random_split(const SequenceSample& sample, double fraction, std::uint64_t seed) {
  return random_split(MatrixRef(sample.rows()), fraction, seed);
}

}  // namespace cpd
