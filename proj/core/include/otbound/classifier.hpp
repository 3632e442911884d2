#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "otbound/encoders.hpp"
#include "otbound/split.hpp"

namespace otb {

// Score-based classifier: 1, 2 or 4 affine layers with ReLU in between.
struct MlpClassifier {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;

  int num_layers() const { return static_cast<int>(weights.size()); }
  // Row-wise scores f(z) for each embedding row, N x K.
  Eigen::MatrixXd scores(const Eigen::MatrixXd& z) const;
};

MlpClassifier train_classifier(const Eigen::MatrixXd& z_train, const std::vector<int>& y_train,
                               int num_classes, int layers, int hidden, int epochs, double lr,
                               std::uint64_t seed);

// Scores plus per-node margins rho_i = f_{y_i}(z_i) - max_{y != y_i} f_y(z_i).
struct MarginTable {
  Eigen::MatrixXd scores;       // N x K
  Eigen::VectorXd margins;      // under the labels supplied to margins()
};

// Margin of score row s under class y.
double margin_of(const Eigen::RowVectorXd& s, int y);

// labels_for_margin may be hypothetical labels, not ground truth.
MarginTable margins(const MlpClassifier& f, const Embeddings& z,
                    const std::vector<int>& labels_for_margin);

// Fraction of test nodes with margin <= 0 (margins under ground truth).
double zero_one_test_loss(const MarginTable& table, const Split& split);

// Fraction of train nodes with margin <= gamma.
double margin_train_loss(const MarginTable& table, const Split& split, double gamma);

// quantile-q value of the positive train margins (lower-interpolation rule),
// clamped below by 1e-6. Throws if no train margin is positive.
double select_gamma(const MarginTable& table, const Split& split, double quantile);

// Loss and gradients at fixed parameters (exposed for gradient checks).
// params alternates W0, b0(as 1 x dim matrix), W1, b1, ...
double mlp_loss_and_grads(const Eigen::MatrixXd& z, const std::vector<int>& labels,
                          int num_classes, const std::vector<Eigen::MatrixXd>& params,
                          std::vector<Eigen::MatrixXd>* grads);

}  // namespace otb
