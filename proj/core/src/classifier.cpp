#include "otbound/classifier.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "optim.hpp"
#include "otbound/rng.hpp"
#include "otbound/util.hpp"

namespace otb {

namespace {

Eigen::MatrixXd glorot_uniform(int rows, int cols, Rng& rng) {
  const double limit = std::sqrt(6.0 / (rows + cols));
  Eigen::MatrixXd w(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) w(i, j) = (2.0 * rng.uniform() - 1.0) * limit;
  return w;
}

}  // namespace

Eigen::MatrixXd MlpClassifier::scores(const Eigen::MatrixXd& z) const {
  Eigen::MatrixXd h = z;
  for (int t = 0; t < num_layers(); ++t) {
    h = (h * weights[t]).rowwise() + biases[t].transpose();
    if (t + 1 < num_layers()) h = h.cwiseMax(0.0);
  }
  return h;
}

double mlp_loss_and_grads(const Eigen::MatrixXd& z, const std::vector<int>& labels,
                          int num_classes, const std::vector<Eigen::MatrixXd>& params,
                          std::vector<Eigen::MatrixXd>* grads) {
  const int num_layers = static_cast<int>(params.size()) / 2;
  std::vector<Eigen::MatrixXd> acts;  // post-activation per layer, acts[0] = z
  acts.push_back(z);
  for (int t = 0; t < num_layers; ++t) {
    Eigen::MatrixXd h = (acts.back() * params[2 * t]).rowwise() + params[2 * t + 1].row(0);
    if (t + 1 < num_layers) h = h.cwiseMax(0.0);
    acts.push_back(std::move(h));
  }

  const Eigen::MatrixXd& scores = acts.back();
  const int n = static_cast<int>(z.rows());
  double loss = 0.0;
  Eigen::MatrixXd dscores;
  if (grads) dscores.setZero(n, num_classes);
  const double inv = 1.0 / n;
  for (int i = 0; i < n; ++i) {
    const Eigen::RowVectorXd s = scores.row(i);
    const double mx = s.maxCoeff();
    const Eigen::RowVectorXd e = (s.array() - mx).exp();
    const double zsum = e.sum();
    loss += -(s[labels[i]] - mx - std::log(zsum)) * inv;
    if (grads) {
      dscores.row(i) = (e / zsum) * inv;
      dscores(i, labels[i]) -= inv;
    }
  }
  if (!grads) return loss;

  grads->assign(params.size(), Eigen::MatrixXd());
  Eigen::MatrixXd h = dscores;
  for (int t = num_layers - 1; t >= 0; --t) {
    (*grads)[2 * t] = acts[t].transpose() * h;
    (*grads)[2 * t + 1] = h.colwise().sum();
    if (t > 0) {
      h = h * params[2 * t].transpose();
      h = h.cwiseProduct((acts[t].array() > 0.0).cast<double>().matrix());
    }
  }
  return loss;
}

MlpClassifier train_classifier(const Eigen::MatrixXd& z_train, const std::vector<int>& y_train,
                               int num_classes, int layers, int hidden, int epochs, double lr,
                               std::uint64_t seed) {
  if (layers != 1 && layers != 2 && layers != 4)
    throw std::invalid_argument("train_classifier: layers must be 1, 2 or 4");
  if (z_train.rows() < num_classes)
    throw std::invalid_argument("train_classifier: fewer rows than classes");
  for (int y : y_train)
    if (y < 0 || y >= num_classes) throw std::invalid_argument("train_classifier: bad label");

  Rng rng(seed);
  std::vector<Eigen::MatrixXd> params;
  int in_dim = static_cast<int>(z_train.cols());
  for (int t = 0; t < layers; ++t) {
    const int out_dim = t + 1 == layers ? num_classes : hidden;
    params.push_back(glorot_uniform(in_dim, out_dim, rng));
    params.push_back(Eigen::MatrixXd::Zero(1, out_dim));
    in_dim = out_dim;
  }

  detail::Adam opt(params, lr);
  std::vector<Eigen::MatrixXd> grads;
  for (int epoch = 0; epoch < epochs; ++epoch) {
    const double loss = mlp_loss_and_grads(z_train, y_train, num_classes, params, &grads);
    if (!std::isfinite(loss))
      throw std::runtime_error("train_classifier: non-finite loss at epoch " +
                               std::to_string(epoch));
    opt.step(params, grads);
  }

  MlpClassifier f;
  for (int t = 0; t < layers; ++t) {
    f.weights.push_back(params[2 * t]);
    f.biases.push_back(params[2 * t + 1].row(0).transpose());
  }
  return f;
}

double margin_of(const Eigen::RowVectorXd& s, int y) {
  double best_other = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < s.size(); ++k)
    if (k != y) best_other = std::max(best_other, s[k]);
  return s[y] - best_other;
}

MarginTable margins(const MlpClassifier& f, const Embeddings& z,
                    const std::vector<int>& labels_for_margin) {
  MarginTable t;
  t.scores = f.scores(z.z);
  const int k = static_cast<int>(t.scores.cols());
  if (k < 2) throw std::invalid_argument("margins: undefined for a single class");
  if (labels_for_margin.size() != static_cast<std::size_t>(t.scores.rows()))
    throw std::invalid_argument("margins: label count mismatch");
  t.margins.resize(t.scores.rows());
  for (int i = 0; i < t.scores.rows(); ++i) {
    const int y = labels_for_margin[i];
    if (y < 0 || y >= k) throw std::invalid_argument("margins: label out of range");
    t.margins[i] = margin_of(t.scores.row(i), y);
  }
  return t;
}

double zero_one_test_loss(const MarginTable& table, const Split& split) {
  int errs = 0;
  for (int i : split.test_indices)
    if (table.margins[i] <= 0.0) ++errs;
  return static_cast<double>(errs) / split.u;
}

double margin_train_loss(const MarginTable& table, const Split& split, double gamma) {
  if (gamma <= 0.0) throw std::invalid_argument("margin_train_loss: gamma must be positive");
  int count = 0;
  for (int i : split.train_indices)
    if (table.margins[i] <= gamma) ++count;
  return static_cast<double>(count) / split.m;
}

double select_gamma(const MarginTable& table, const Split& split, double quantile) {
  std::vector<double> positive;
  for (int i : split.train_indices)
    if (table.margins[i] > 0.0) positive.push_back(table.margins[i]);
  if (positive.empty()) throw std::runtime_error("select_gamma: no positive train margin");
  return std::max(1e-6, lower_quantile(std::move(positive), quantile));
}

}  // namespace otb
