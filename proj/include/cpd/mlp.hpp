#pragma once

#include <cstdint>
#include <vector>

#include "cpd/types.hpp"

namespace cpd {

enum class OutputKind { Linear, Sigmoid };

struct AdamConfig {
  double learning_rate = 0.1;
  double beta1 = 0.0;
  double beta2 = 0.9;
  double epsilon = 1e-8;
  int batch_size = 32;
  int epochs = 20;
};

// One-hidden-layer perceptron with tanh units and a scalar output head.
struct Mlp {
  Matrix w1;  // hidden x input
  Vector b1;  // hidden
  Vector w2;  // hidden
  double b2 = 0.0;
  OutputKind output = OutputKind::Linear;

  // Full-sample training objective before the first update and after each
  // epoch, recorded by the fit functions.
  std::vector<double> train_loss;

  Index input_dim() const { return w1.cols(); }
  Index hidden_dim() const { return w1.rows(); }
};

struct MlpGradients {
  Matrix w1;
  Vector b1;
  Vector w2;
  double b2 = 0.0;

  static MlpGradients zeros(Index input, Index hidden);
};

// Raw network output: unbounded for Linear, in (0, 1) for Sigmoid.
double predict_mlp(const Mlp& net, VectorRef x);
Vector predict_mlp(const Mlp& net, MatrixRef rows);

// Relative-ratio objective of the network outputs over full samples, and its
// exact parameter gradients; both drive the fit and the gradient checks.
double mlp_rulsif_objective(const Mlp& net, MatrixRef ref_rows, MatrixRef test_rows, double alpha);
MlpGradients mlp_rulsif_gradients(const Mlp& net, MatrixRef ref_rows, MatrixRef test_rows,
                                  double alpha);

// Mean binary cross-entropy with labels 0 on reference rows, 1 on test rows.
double mlp_bce_objective(const Mlp& net, MatrixRef ref_rows, MatrixRef test_rows);
MlpGradients mlp_bce_gradients(const Mlp& net, MatrixRef ref_rows, MatrixRef test_rows);

// Minimise the relative-ratio objective with Adam on paired mini-batches: each
// step draws one batch from the reference sample and one from the test sample
// and treats the pair as the two-sample objective at batch scale.
Mlp fit_nn_rulsif(MatrixRef ref_rows, MatrixRef test_rows, int hidden, double alpha,
                  const AdamConfig& cfg, std::uint64_t seed);

// Minimise binary cross-entropy with Adam over the shuffled union of both
// samples (sigmoid output head).
Mlp fit_nn_classifier(MatrixRef ref_rows, MatrixRef test_rows, int hidden, const AdamConfig& cfg,
                      std::uint64_t seed);

}  // namespace cpd
