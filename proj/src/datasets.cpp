#include "cpd/datasets.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <system_error>

#include "cpd/io_util.hpp"
#include "cpd/rng.hpp"

namespace cpd {

namespace {

constexpr Index kBurnIn = 200;
constexpr double kAr1 = 0.6;
constexpr double kAr2 = -0.5;

std::vector<Index> every_segment_boundary(const SyntheticSpec& spec) {
  std::vector<Index> points;
  for (int s = 1; s < spec.segments; ++s)
    points.push_back(static_cast<Index>(s) * spec.segment_length);
  return points;
}

}  // namespace

std::vector<int> LabeledSeries::labels(Index n) const {
  return label_series(series.length(), change_points, n);
}

std::vector<double> mean_schedule(int segments) {
  if (segments < 1) throw std::invalid_argument("mean_schedule: segments must be >= 1");
  std::vector<double> mu(static_cast<std::size_t>(segments));
  mu[0] = 0.0;
  for (int s = 2; s <= segments; ++s)
    mu[static_cast<std::size_t>(s - 1)] = mu[static_cast<std::size_t>(s - 2)] + 0.5 * s;
  return mu;
}

std::vector<double> stddev_schedule(int segments) {
  if (segments < 1) throw std::invalid_argument("stddev_schedule: segments must be >= 1");
  std::vector<double> sigma(static_cast<std::size_t>(segments));
  sigma[0] = 1.0;
  for (int s = 2; s <= segments; ++s)
    sigma[static_cast<std::size_t>(s - 1)] = 1.0 + 0.25 * s;
  return sigma;
}

std::vector<double> frequency_schedule(int segments) {
  if (segments < 1) throw std::invalid_argument("frequency_schedule: segments must be >= 1");
  std::vector<double> omega(static_cast<std::size_t>(segments));
  omega[0] = 1.0;
  for (int s = 2; s <= segments; ++s)
    omega[static_cast<std::size_t>(s - 1)] =
        omega[static_cast<std::size_t>(s - 2)] * std::log(std::exp(1.0) + 0.5 * s);
  return omega;
}

LabeledSeries gen_dataset1(std::uint64_t seed) {
  return gen_synthetic({1, 10, 2000, seed});
}

LabeledSeries gen_dataset2(std::uint64_t seed) {
  return gen_synthetic({2, 10, 2000, seed});
}

LabeledSeries gen_dataset3(std::uint64_t seed) {
  return gen_synthetic({3, 10, 2000, seed});
}

LabeledSeries gen_synthetic(const SyntheticSpec& spec) {
  if (spec.dataset_id < 1 || spec.dataset_id > 3)
    throw std::invalid_argument("gen_synthetic: dataset id must be 1, 2, or 3");
  if (spec.segments < 1 || spec.segment_length < 1)
    throw std::invalid_argument("gen_synthetic: segments and segment_length must be >= 1");
  const Index total = static_cast<Index>(spec.segments) * spec.segment_length;
  Rng rng(spec.seed);
  Matrix values;

  if (spec.dataset_id == 3) {
    const std::vector<double> omega = frequency_schedule(spec.segments);
    values.resize(total, 1);
    for (Index t = 0; t < total; ++t) {
      const std::size_t seg = static_cast<std::size_t>(t / spec.segment_length);
      values(t, 0) = std::sin(omega[seg] * static_cast<double>(t)) + rng.normal(0.5, 1.0);
    }
  } else {
    std::vector<double> means(static_cast<std::size_t>(spec.segments), 0.0);
    std::vector<double> stddevs(static_cast<std::size_t>(spec.segments), 1.0);
    if (spec.dataset_id == 1)
      means = mean_schedule(spec.segments);
    else
      stddevs = stddev_schedule(spec.segments);
    // Interleaved draw order per timestamp: AR innovation, then the
    // independent second component.
    values.resize(total, 2);
    double prev1 = 0.0, prev2 = 0.0;
    for (Index t = 0; t < kBurnIn; ++t) {
      const double value = kAr1 * prev1 + kAr2 * prev2 + rng.normal(means[0], stddevs[0]);
      prev2 = prev1;
      prev1 = value;
    }
    for (Index t = 0; t < total; ++t) {
      const std::size_t seg = static_cast<std::size_t>(t / spec.segment_length);
      const double value = kAr1 * prev1 + kAr2 * prev2 + rng.normal(means[seg], stddevs[seg]);
      prev2 = prev1;
      prev1 = value;
      values(t, 0) = value;
      values(t, 1) = rng.normal(0.0, 5.0);
    }
  }

  LabeledSeries out{TimeSeries(std::move(values)), every_segment_boundary(spec)};
  return out;
}

std::vector<int> label_series(Index total_len, const std::vector<Index>& change_points, Index n) {
  if (total_len < 0) throw std::invalid_argument("label_series: negative length");
  if (n < 0) throw std::invalid_argument("label_series: negative n");
  for (std::size_t i = 0; i < change_points.size(); ++i) {
    if (change_points[i] < 0 || change_points[i] >= total_len)
      throw std::invalid_argument("label_series: change point out of range");
    if (i > 0 && change_points[i] <= change_points[i - 1])
      throw std::invalid_argument("label_series: change points must be strictly increasing");
  }
  std::vector<int> labels(static_cast<std::size_t>(total_len), 0);
  for (Index cp : change_points) {
    const Index end = std::min(total_len, cp + 2 * n);
    for (Index t = cp; t < end; ++t) labels[static_cast<std::size_t>(t)] = 1;
  }
  return labels;
}

CsvError::CsvError(const std::string& what, std::size_t line_number)
    : std::runtime_error(what + " (line " + std::to_string(line_number) + ")"),
      line(line_number) {}

namespace {

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

double parse_cell(const std::string& cell, std::size_t line_number) {
  double value = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last)
    throw CsvError("non-numeric cell '" + cell + "'", line_number);
  return value;
}

std::vector<double> parse_row(const std::string& line, std::size_t line_number) {
  std::vector<double> cells;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    const std::string cell =
        comma == std::string::npos ? line.substr(start) : line.substr(start, comma - start);
    cells.push_back(parse_cell(cell, line_number));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return cells;
}

}  // namespace

TimeSeries load_csv(const std::filesystem::path& path, bool expect_header) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_number = 0;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++line_number;
    strip_cr(line);
    if (line.empty() && in.peek() == std::char_traits<char>::eof()) break;
    if (expect_header && line_number == 1) continue;
    std::vector<double> cells = parse_row(line, line_number);
    if (width == 0)
      width = cells.size();
    else if (cells.size() != width)
      throw CsvError("expected " + std::to_string(width) + " cells, got " +
                         std::to_string(cells.size()),
                     line_number);
    rows.push_back(std::move(cells));
  }
  if (rows.empty()) throw CsvError("no data rows in " + path.string(), line_number);
  Matrix values(static_cast<Index>(rows.size()), static_cast<Index>(width));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < width; ++c)
      values(static_cast<Index>(r), static_cast<Index>(c)) = rows[r][c];
  return TimeSeries(std::move(values));
}

namespace {

std::string format_value(double value) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc{}) throw std::runtime_error("value formatting failed");
  return std::string(buf, ptr);
}

}  // namespace

void save_csv(const TimeSeries& series, const std::filesystem::path& path) {
  std::string content;
  content.reserve(static_cast<std::size_t>(series.length()) * 16);
  for (Index t = 0; t < series.length(); ++t) {
    for (Index c = 0; c < series.dim(); ++c) {
      if (c > 0) content += ',';
      content += format_value(series.values()(t, c));
    }
    content += '\n';
  }
  write_text_atomically(path, content);
}

std::vector<Index> load_labels(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<Index> points;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    strip_cr(line);
    if (line.empty()) continue;
    long long value = 0;
    const auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), value);
    if (ec != std::errc{} || ptr != line.data() + line.size())
      throw CsvError("non-integer change point '" + line + "'", line_number);
    points.push_back(static_cast<Index>(value));
  }
  return points;
}

void save_labels(const std::vector<Index>& change_points, const std::filesystem::path& path) {
  std::string content;
  for (Index cp : change_points) {
    content += std::to_string(cp);
    content += '\n';
  }
  write_text_atomically(path, content);
}

}  // namespace cpd
