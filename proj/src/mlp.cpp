#include "cpd/mlp.hpp"

#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "cpd/rng.hpp"

namespace cpd {

namespace {

void check_fit_args(MatrixRef ref_rows, MatrixRef test_rows, int hidden, const AdamConfig& cfg) {
  if (ref_rows.rows() == 0 || test_rows.rows() == 0)
    throw std::invalid_argument("mlp: both samples must be non-empty");
  if (ref_rows.cols() != test_rows.cols() || ref_rows.cols() == 0)
    throw std::invalid_argument("mlp: samples must share a positive feature dimension");
  if (hidden < 1) throw std::invalid_argument("mlp: hidden units must be >= 1");
  if (!(cfg.learning_rate > 0.0) || cfg.batch_size < 1 || cfg.epochs < 0)
    throw std::invalid_argument("mlp: invalid optimiser config");
  if (!(cfg.beta1 >= 0.0 && cfg.beta1 < 1.0) || !(cfg.beta2 >= 0.0 && cfg.beta2 < 1.0) ||
      !(cfg.epsilon > 0.0))
    throw std::invalid_argument("mlp: invalid Adam moment config");
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double z = std::exp(x);
  return z / (1.0 + z);
}

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

// A = tanh(X W1^T + b1), o = A w2 + b2 (pre-sigmoid for classifier heads).
void forward(const Mlp& net, MatrixRef x, Matrix& activations, Vector& out) {
  activations = ((x * net.w1.transpose()).rowwise() + net.b1.transpose()).array().tanh();
  out = activations * net.w2;
  out.array() += net.b2;
}

// Accumulate parameter gradients for d(loss)/d(out) = delta.
void backprop(const Mlp& net, MatrixRef x, const Matrix& activations, const Vector& delta,
              MlpGradients& grads) {
  grads.w2.noalias() += activations.transpose() * delta;
  grads.b2 += delta.sum();
  const Matrix pre = (delta * net.w2.transpose()).array() * (1.0 - activations.array().square());
  grads.w1.noalias() += pre.transpose() * x;
  grads.b1 += pre.colwise().sum().transpose();
}

// delta for the relative-ratio objective at the given sample sizes.
void rulsif_deltas(const Vector& out_ref, const Vector& out_test, double alpha, Vector& delta_ref,
                   Vector& delta_test) {
  const double n_rf = static_cast<double>(out_ref.size());
  const double n_te = static_cast<double>(out_test.size());
  delta_ref = (1.0 - alpha) / n_rf * out_ref;
  delta_test = alpha / n_te * out_test;
  delta_test.array() -= 1.0 / n_te;
}

double rulsif_value(const Vector& out_ref, const Vector& out_test, double alpha) {
  const double n_rf = static_cast<double>(out_ref.size());
  const double n_te = static_cast<double>(out_test.size());
  return (1.0 - alpha) / (2.0 * n_rf) * out_ref.squaredNorm() +
         alpha / (2.0 * n_te) * out_test.squaredNorm() - out_test.sum() / n_te;
}

double bce_value(const Vector& logits, const Vector& labels) {
  double total = 0.0;
  for (Index i = 0; i < logits.size(); ++i)
    total += labels(i) > 0.5 ? softplus(-logits(i)) : softplus(logits(i));
  return total / static_cast<double>(logits.size());
}

Mlp init_mlp(Index input, Index hidden, OutputKind output, Rng& rng) {
  Mlp net;
  net.w1.resize(hidden, input);
  net.b1 = Vector::Zero(hidden);
  net.w2.resize(hidden);
  net.b2 = 0.0;
  net.output = output;
  const double limit1 = std::sqrt(6.0 / static_cast<double>(input + hidden));
  for (Index h = 0; h < hidden; ++h)
    for (Index j = 0; j < input; ++j) net.w1(h, j) = limit1 * (2.0 * rng.uniform() - 1.0);
  const double limit2 = std::sqrt(6.0 / static_cast<double>(hidden + 1));
  for (Index h = 0; h < hidden; ++h) net.w2(h) = limit2 * (2.0 * rng.uniform() - 1.0);
  return net;
}

struct AdamState {
  MlpGradients m;
  MlpGradients v;
  long step = 0;

  AdamState(Index input, Index hidden)
      : m(MlpGradients::zeros(input, hidden)), v(MlpGradients::zeros(input, hidden)) {}
};

void adam_update(Mlp& net, const MlpGradients& grads, AdamState& st, const AdamConfig& cfg) {
  ++st.step;
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(st.step));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(st.step));
  auto apply = [&](auto& param, auto& m, auto& v, const auto& g) {
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
    v = (cfg.beta2 * v.array() + (1.0 - cfg.beta2) * g.array().square()).matrix();
    param.array() -= cfg.learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + cfg.epsilon);
  };
  apply(net.w1, st.m.w1, st.v.w1, grads.w1);
  apply(net.b1, st.m.b1, st.v.b1, grads.b1);
  apply(net.w2, st.m.w2, st.v.w2, grads.w2);
  st.m.b2 = cfg.beta1 * st.m.b2 + (1.0 - cfg.beta1) * grads.b2;
  st.v.b2 = cfg.beta2 * st.v.b2 + (1.0 - cfg.beta2) * grads.b2 * grads.b2;
  net.b2 -= cfg.learning_rate * (st.m.b2 / c1) / (std::sqrt(st.v.b2 / c2) + cfg.epsilon);
}

Matrix gather_rows(MatrixRef rows, const std::vector<Index>& order, std::size_t start,
                   std::size_t len) {
  Matrix out(static_cast<Index>(len), rows.cols());
  for (std::size_t j = 0; j < len; ++j)
    out.row(static_cast<Index>(j)) = rows.row(order[(start + j) % order.size()]);
  return out;
}

}  // namespace

MlpGradients MlpGradients::zeros(Index input, Index hidden) {
  MlpGradients g;
  g.w1 = Matrix::Zero(hidden, input);
  g.b1 = Vector::Zero(hidden);
  g.w2 = Vector::Zero(hidden);
  g.b2 = 0.0;
  return g;
}

double predict_mlp(const Mlp& net, VectorRef x) {
  if (x.size() != net.input_dim())
    throw std::invalid_argument("predict_mlp: input length does not match the network");
  const Vector a = (net.w1 * x + net.b1).array().tanh();
  const double o = net.w2.dot(a) + net.b2;
  return net.output == OutputKind::Sigmoid ? sigmoid(o) : o;
}

Vector predict_mlp(const Mlp& net, MatrixRef rows) {
  if (rows.cols() != net.input_dim())
    throw std::invalid_argument("predict_mlp: input width does not match the network");
  Matrix a;
  Vector o;
  forward(net, rows, a, o);
  if (net.output == OutputKind::Sigmoid)
    for (Index i = 0; i < o.size(); ++i) o(i) = sigmoid(o(i));
  return o;
}

double mlp_rulsif_objective(const Mlp& net, MatrixRef ref_rows, MatrixRef test_rows, double alpha) {
  Matrix a;
  Vector out_ref, out_test;
  forward(net, ref_rows, a, out_ref);
  forward(net, test_rows, a, out_test);
  return rulsif_value(out_ref, out_test, alpha);
}

MlpGradients mlp_rulsif_gradients(const Mlp& net, MatrixRef ref_rows, MatrixRef test_rows,
                                  double alpha) {
  Matrix a_ref, a_test;
  Vector out_ref, out_test;
  forward(net, ref_rows, a_ref, out_ref);
  forward(net, test_rows, a_test, out_test);
  Vector delta_ref, delta_test;
  rulsif_deltas(out_ref, out_test, alpha, delta_ref, delta_test);
  MlpGradients grads = MlpGradients::zeros(net.input_dim(), net.hidden_dim());
  backprop(net, ref_rows, a_ref, delta_ref, grads);
  backprop(net, test_rows, a_test, delta_test, grads);
  return grads;
}

double mlp_bce_objective(const Mlp& net, MatrixRef ref_rows, MatrixRef test_rows) {
  Matrix a;
  Vector out_ref, out_test;
  forward(net, ref_rows, a, out_ref);
  forward(net, test_rows, a, out_test);
  Vector logits(out_ref.size() + out_test.size());
  logits << out_ref, out_test;
  Vector labels = Vector::Zero(logits.size());
  labels.tail(out_test.size()).setOnes();
  return bce_value(logits, labels);
}

MlpGradients mlp_bce_gradients(const Mlp& net, MatrixRef ref_rows, MatrixRef test_rows) {
  Matrix a_ref, a_test;
  Vector out_ref, out_test;
  forward(net, ref_rows, a_ref, out_ref);
  forward(net, test_rows, a_test, out_test);
  const double n = static_cast<double>(out_ref.size() + out_test.size());
  Vector delta_ref(out_ref.size()), delta_test(out_test.size());
  for (Index i = 0; i < out_ref.size(); ++i) delta_ref(i) = sigmoid(out_ref(i)) / n;
  for (Index i = 0; i < out_test.size(); ++i) delta_test(i) = (sigmoid(out_test(i)) - 1.0) / n;
  MlpGradients grads = MlpGradients::zeros(net.input_dim(), net.hidden_dim());
  backprop(net, ref_rows, a_ref, delta_ref, grads);
  backprop(net, test_rows, a_test, delta_test, grads);
  return grads;
}

Mlp fit_nn_rulsif(MatrixRef ref_rows, MatrixRef test_rows, int hidden, double alpha,
                  const AdamConfig& cfg, std::uint64_t seed) {
  check_fit_args(ref_rows, test_rows, hidden, cfg);
  if (!(alpha >= 0.0 && alpha < 1.0)) throw std::invalid_argument("mlp: alpha must lie in [0, 1)");
  Rng rng(seed);
  Mlp net = init_mlp(ref_rows.cols(), hidden, OutputKind::Linear, rng);
  AdamState st(ref_rows.cols(), hidden);

  std::vector<Index> ref_idx(static_cast<std::size_t>(ref_rows.rows()));
  std::vector<Index> test_idx(static_cast<std::size_t>(test_rows.rows()));
  std::iota(ref_idx.begin(), ref_idx.end(), Index{0});
  std::iota(test_idx.begin(), test_idx.end(), Index{0});
  const std::size_t batch = static_cast<std::size_t>(cfg.batch_size);
  const std::size_t longest = std::max(ref_idx.size(), test_idx.size());
  const std::size_t steps = (longest + batch - 1) / batch;

  net.train_loss.push_back(mlp_rulsif_objective(net, ref_rows, test_rows, alpha));
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(ref_idx);
    rng.shuffle(test_idx);
    for (std::size_t s = 0; s < steps; ++s) {
      const std::size_t len = std::min(batch, longest - s * batch);
      const Matrix xr = gather_rows(ref_rows, ref_idx, s * batch, len);
      const Matrix xt = gather_rows(test_rows, test_idx, s * batch, len);
      Matrix a_ref, a_test;
      Vector out_ref, out_test;
      forward(net, xr, a_ref, out_ref);
      forward(net, xt, a_test, out_test);
      Vector delta_ref, delta_test;
      rulsif_deltas(out_ref, out_test, alpha, delta_ref, delta_test);
      MlpGradients grads = MlpGradients::zeros(net.input_dim(), net.hidden_dim());
      backprop(net, xr, a_ref, delta_ref, grads);
      backprop(net, xt, a_test, delta_test, grads);
      adam_update(net, grads, st, cfg);
    }
    net.train_loss.push_back(mlp_rulsif_objective(net, ref_rows, test_rows, alpha));
  }
  return net;
}

Mlp fit_nn_classifier(MatrixRef ref_rows, MatrixRef test_rows, int hidden, const AdamConfig& cfg,
                      std::uint64_t seed) {
  check_fit_args(ref_rows, test_rows, hidden, cfg);
  Rng rng(seed);
  Mlp net = init_mlp(ref_rows.cols(), hidden, OutputKind::Sigmoid, rng);
  AdamState st(ref_rows.cols(), hidden);

  const Index n_rf = ref_rows.rows();
  const Index n = n_rf + test_rows.rows();
  Matrix rows(n, ref_rows.cols());
  rows.topRows(n_rf) = ref_rows;
  rows.bottomRows(test_rows.rows()) = test_rows;
  Vector labels = Vector::Zero(n);
  labels.tail(test_rows.rows()).setOnes();

  std::vector<Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Index{0});
  const std::size_t batch = static_cast<std::size_t>(cfg.batch_size);

  net.train_loss.push_back(mlp_bce_objective(net, ref_rows, test_rows));
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(idx);
    for (std::size_t start = 0; start < idx.size(); start += batch) {
      const std::size_t len = std::min(batch, idx.size() - start);
      const Matrix x = gather_rows(rows, idx, start, len);
      Vector y(static_cast<Index>(len));
      for (std::size_t j = 0; j < len; ++j) y(static_cast<Index>(j)) = labels(idx[start + j]);
      Matrix a;
      Vector out;
      forward(net, x, a, out);
      Vector delta(out.size());
      for (Index i = 0; i < out.size(); ++i)
        delta(i) = (sigmoid(out(i)) - y(i)) / static_cast<double>(len);
      MlpGradients grads = MlpGradients::zeros(net.input_dim(), net.hidden_dim());
      backprop(net, x, a, delta, grads);
      adam_update(net, grads, st, cfg);
    }
    net.train_loss.push_back(mlp_bce_objective(net, ref_rows, test_rows));
  }
  return net;
}

}  // namespace cpd
