#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "otbound/encoders.hpp"
#include "otbound/graph.hpp"
#include "otbound/ot.hpp"
#include "otbound/sparse.hpp"
#include "otbound/split.hpp"

namespace otb {

// Spectral quantities of A_hat driving the depth envelopes.
struct SpectralSummary {
  double rho_perp = 0.0;   // max_{k>=2} |lambda_k(A_hat)|
  Eigen::VectorXd u1;      // D~^{1/2} 1, the eigenvalue-1 eigenvector
  double c1 = 0.0;         // ||X||_F / ||u1||_2
  double c2 = 0.0;         // ||P_{U_perp} X||_F
  bool disconnected = false;
};

struct RhoPerpResult {
  double value = 0.0;
  bool disconnected = false;
};

// Largest absolute eigenvalue orthogonal to u1. Dense eigendecomposition
// for n <= 2000, deflated power iteration probing both spectral ends above.
RhoPerpResult rho_perp(const CsrMatrix& adj, double tol = 1e-8, bool force_iterative = false);

SpectralSummary depth_constants(const CsrMatrix& adj, const Eigen::MatrixXd& x);

// C1 * W1(degree stats) + C2 * rho_perp^depth.
double sgc_depth_envelope(const SpectralSummary& summary, double w1_degree, int depth);

// (C1 * W1(degree stats) + C2 * rho_perp^depth) * beta^depth.
double gcn_depth_envelope(const SpectralSummary& summary, double w1_degree, int depth,
                          double beta);

// Per-depth Wasserstein diagnostics: train-vs-test (w_g), expected
// class-conditional (w_c, averaged over classes and T resampled splits),
// and minimum inter-class separation (w_s).
struct DepthDiagnosticsRow {
  int depth = 0;
  double w_g = 0.0;
  double w_c = 0.0;
  double w_s = 0.0;
  double envelope = 0.0;
  double beta = 1.0;
};

struct DepthDiagnostics {
  std::vector<DepthDiagnosticsRow> rows;
  SpectralSummary summary;
  double w1_degree = 0.0;
};

DepthDiagnostics depth_diagnostics(const Graph& g, const CsrMatrix& adj, EncoderKind kind,
                                   const std::vector<int>& depths, const Split& split,
                                   int num_resample, std::uint64_t seed,
                                   int gcn_hidden = 64, int gcn_epochs = 500,
                                   double gcn_lr = 0.01);

}  // namespace otb
