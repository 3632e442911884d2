#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "otbound/graph.hpp"
#include "otbound/sparse.hpp"
#include "otbound/split.hpp"

namespace otb {

enum class EncoderKind { Raw, Sgc, Gcn };

std::string encoder_name(EncoderKind kind);
EncoderKind parse_encoder(const std::string& name);

// Depth-l node embeddings, one row per node in graph order.
struct Embeddings {
  Eigen::MatrixXd z;
  int depth = 0;
  EncoderKind kind = EncoderKind::Raw;
};

// Z = A_hat^depth X. Depth 0 returns X unchanged.
Embeddings sgc_embed(const CsrMatrix& adj, const Eigen::MatrixXd& x, int depth);

// Stack of bias-free graph convolutions X^{t+1} = ReLU(A_hat X^t W^t).
struct GcnModel {
  std::vector<Eigen::MatrixXd> weights;
  int num_layers() const { return static_cast<int>(weights.size()); }

  void save(const std::filesystem::path& path) const;
  static GcnModel load(const std::filesystem::path& path);
};

// Returns X^{(0)} .. X^{(L)}.
std::vector<Eigen::MatrixXd> gcn_forward(const CsrMatrix& adj, const Eigen::MatrixXd& x,
                                         const GcnModel& model);

// Full-batch training with Adam and a discardable linear softmax readout;
// cross-entropy on train nodes only. Manual backprop, deterministic per seed.
GcnModel train_gcn(const Graph& g, const CsrMatrix& adj, const Split& split, int layers,
                   int hidden, int epochs, double lr, std::uint64_t seed);

// Largest singular value by power iteration on W^T W.
double weight_spectral_norm(const Eigen::MatrixXd& w, int iters = 1000, double tol = 1e-12);

// max_t ||W^(t)||_2, the beta of the GCN depth envelope.
double gcn_beta(const GcnModel& model);

// Loss and parameter gradients at fixed weights (exposed for gradient checks).
double gcn_loss_and_grads(const CsrMatrix& adj, const Eigen::MatrixXd& x,
                          const std::vector<int>& labels, const std::vector<int>& train_idx,
                          int num_classes, const std::vector<Eigen::MatrixXd>& params,
                          std::vector<Eigen::MatrixXd>* grads);

}  // namespace otb
