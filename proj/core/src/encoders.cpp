#include "otbound/encoders.hpp"

#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <stdexcept>

#include "optim.hpp"
#include "otbound/rng.hpp"

namespace otb {

namespace {

Eigen::MatrixXd glorot_uniform(int rows, int cols, Rng& rng) {
  const double limit = std::sqrt(6.0 / (rows + cols));
  Eigen::MatrixXd w(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) w(i, j) = (2.0 * rng.uniform() - 1.0) * limit;
  return w;
}

// Mean softmax cross-entropy over the given rows; fills dscores (full size,
// zero outside the given rows) when requested.
double softmax_cross_entropy(const Eigen::MatrixXd& scores, const std::vector<int>& labels,
                             const std::vector<int>& rows, Eigen::MatrixXd* dscores) {
  if (dscores) dscores->setZero(scores.rows(), scores.cols());
  double loss = 0.0;
  const double inv = 1.0 / static_cast<double>(rows.size());
  for (int i : rows) {
    const Eigen::RowVectorXd s = scores.row(i);
    const double mx = s.maxCoeff();
    const Eigen::RowVectorXd e = (s.array() - mx).exp();
    const double z = e.sum();
    loss += -(s[labels[i]] - mx - std::log(z)) * inv;
    if (dscores) {
      dscores->row(i) = (e / z) * inv;
      (*dscores)(i, labels[i]) -= inv;
    }
  }
  return loss;
}

}  // namespace

std::string encoder_name(EncoderKind kind) {
  switch (kind) {
    case EncoderKind::Raw: return "raw";
    case EncoderKind::Sgc: return "sgc";
    case EncoderKind::Gcn: return "gcn";
  }
  throw std::logic_error("unreachable");
}

EncoderKind parse_encoder(const std::string& name) {
  if (name == "raw") return EncoderKind::Raw;
  if (name == "sgc") return EncoderKind::Sgc;
  if (name == "gcn") return EncoderKind::Gcn;
  throw std::invalid_argument("unknown encoder: " + name);
}

Embeddings sgc_embed(const CsrMatrix& adj, const Eigen::MatrixXd& x, int depth) {
  if (x.rows() != adj.n) throw std::invalid_argument("sgc_embed: dimension mismatch");
  if (depth < 0) throw std::invalid_argument("sgc_embed: negative depth");
  Embeddings e;
  e.kind = EncoderKind::Sgc;
  e.depth = depth;
  e.z = x;
  for (int l = 0; l < depth; ++l) e.z = adj.multiply(e.z);
  return e;
}

std::vector<Eigen::MatrixXd> gcn_forward(const CsrMatrix& adj, const Eigen::MatrixXd& x,
                                         const GcnModel& model) {
  if (x.rows() != adj.n) throw std::invalid_argument("gcn_forward: dimension mismatch");
  std::vector<Eigen::MatrixXd> layers;
  layers.push_back(x);
  for (const auto& w : model.weights) {
    if (layers.back().cols() != w.rows())
      throw std::invalid_argument("gcn_forward: weight shape mismatch");
    layers.push_back((adj.multiply(layers.back()) * w).cwiseMax(0.0));
  }
  return layers;
}

double gcn_loss_and_grads(const CsrMatrix& adj, const Eigen::MatrixXd& x,
                          const std::vector<int>& labels, const std::vector<int>& train_idx,
                          int num_classes, const std::vector<Eigen::MatrixXd>& params,
                          std::vector<Eigen::MatrixXd>* grads) {
  const int num_enc = static_cast<int>(params.size()) - 1;  // last is the readout
  GcnModel enc;
  enc.weights.assign(params.begin(), params.begin() + num_enc);
  const auto layers = gcn_forward(adj, x, enc);
  const Eigen::MatrixXd& readout = params.back();
  const Eigen::MatrixXd scores = layers.back() * readout;
  (void)num_classes;

  Eigen::MatrixXd dscores;
  const double loss =
      softmax_cross_entropy(scores, labels, train_idx, grads ? &dscores : nullptr);
  if (!grads) return loss;

  grads->assign(params.size(), Eigen::MatrixXd());
  (*grads)[num_enc] = layers.back().transpose() * dscores;
  Eigen::MatrixXd h = dscores * readout.transpose();
  for (int t = num_enc - 1; t >= 0; --t) {
    h = h.cwiseProduct((layers[t + 1].array() > 0.0).cast<double>().matrix());
    const Eigen::MatrixXd ax = adj.multiply(layers[t]);
    (*grads)[t] = ax.transpose() * h;
    if (t > 0) h = adj.multiply((h * params[t].transpose()).eval());
  }
  return loss;
}

GcnModel train_gcn(const Graph& g, const CsrMatrix& adj, const Split& split, int layers,
                   int hidden, int epochs, double lr, std::uint64_t seed) {
  if (layers < 1) throw std::invalid_argument("train_gcn: need at least one layer");
  Rng rng(seed);
  std::vector<Eigen::MatrixXd> params;
  int in_dim = g.feature_dim();
  for (int t = 0; t < layers; ++t) {
    params.push_back(glorot_uniform(in_dim, hidden, rng));
    in_dim = hidden;
  }
  params.push_back(glorot_uniform(in_dim, g.num_classes, rng));  // readout

  detail::Adam opt(params, lr);
  std::vector<Eigen::MatrixXd> grads;
  for (int epoch = 0; epoch < epochs; ++epoch) {
    const double loss =
        gcn_loss_and_grads(adj, g.features, g.labels, split.train_indices, g.num_classes,
                           params, &grads);
    if (!std::isfinite(loss))
      throw std::runtime_error("train_gcn: non-finite loss at epoch " + std::to_string(epoch));
    opt.step(params, grads);
  }

  GcnModel model;
  model.weights.assign(params.begin(), params.end() - 1);  // readout discarded
  return model;
}

double weight_spectral_norm(const Eigen::MatrixXd& w, int iters, double tol) {
  if (!w.allFinite()) throw std::invalid_argument("weight_spectral_norm: non-finite matrix");
  if (w.size() == 0) return 0.0;
  const Eigen::MatrixXd gram = w.transpose() * w;
  Eigen::VectorXd v = Eigen::VectorXd::Ones(gram.rows());
  v.normalize();
  double lambda = 0.0;
  for (int it = 0; it < iters; ++it) {
    Eigen::VectorXd next = gram * v;
    const double norm = next.norm();
    if (norm == 0.0) return 0.0;
    next /= norm;
    const double estimate = next.dot(gram * next);
    if (it > 0 && std::abs(estimate - lambda) <= tol * std::max(1.0, std::abs(estimate))) {
      lambda = estimate;
      break;
    }
    lambda = estimate;
    v = next;
  }
  return std::sqrt(std::max(0.0, lambda));
}

double gcn_beta(const GcnModel& model) {
  double beta = 0.0;
  for (const auto& w : model.weights) beta = std::max(beta, weight_spectral_norm(w));
  return beta;
}

void GcnModel::save(const std::filesystem::path& path) const {
  nlohmann::json j;
  j["format"] = "otbound-gcn-v1";
  j["layers"] = nlohmann::json::array();
  for (const auto& w : weights) {
    // stored row-major
    std::vector<double> row_major;
    row_major.reserve(w.size());
    for (int i = 0; i < w.rows(); ++i)
      for (int c = 0; c < w.cols(); ++c) row_major.push_back(w(i, c));
    j["layers"].push_back({{"rows", w.rows()}, {"cols", w.cols()}, {"values", row_major}});
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path.string());
  out << j.dump() << '\n';
}

GcnModel GcnModel::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path.string());
  nlohmann::json j;
  in >> j;
  if (j.value("format", "") != "otbound-gcn-v1")
    throw std::runtime_error("unsupported checkpoint format in " + path.string());
  GcnModel model;
  for (const auto& layer : j.at("layers")) {
    const int rows = layer.at("rows").get<int>();
    const int cols = layer.at("cols").get<int>();
    const auto vals = layer.at("values").get<std::vector<double>>();
    if (static_cast<int>(vals.size()) != rows * cols)
      throw std::runtime_error("checkpoint shape mismatch in " + path.string());
    Eigen::MatrixXd w(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int c = 0; c < cols; ++c) w(i, c) = vals[i * cols + c];
    model.weights.push_back(std::move(w));
  }
  return model;
}

}  // namespace otb
