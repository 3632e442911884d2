#include "otbound/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "otbound/bounds.hpp"
#include "otbound/rng.hpp"

namespace otb {

namespace {

constexpr int kDenseThreshold = 2000;

Eigen::VectorXd principal_vector(const CsrMatrix& adj) {
  // u1 = D~^{1/2} 1 recovered from the diagonal: A_hat_ii = 1/d~_i
  Eigen::VectorXd u1(adj.n);
  for (int i = 0; i < adj.n; ++i) {
    double diag = 0.0;
    for (std::int64_t k = adj.row_offsets[i]; k < adj.row_offsets[i + 1]; ++k)
      if (adj.col_indices[k] == i) diag = adj.values[k];
    if (diag <= 0.0) throw std::invalid_argument("rho_perp: missing self-loop entry");
    u1[i] = 1.0 / std::sqrt(diag);
  }
  return u1;
}

// Rayleigh estimate of the A_hat eigenvalue that dominates the shifted
// operator A_hat + shift*I on the complement of span(u1). shift = +1 favors
// the largest remaining eigenvalue, shift = -1 the most negative one.
double deflated_power_eig(const CsrMatrix& adj, const Eigen::VectorXd& u1, double shift,
                          double tol, int max_iters = 20000) {
  const double u1_sq = u1.squaredNorm();
  Rng rng(12345);
  Eigen::VectorXd v(adj.n);
  for (int i = 0; i < adj.n; ++i) v[i] = rng.normal();
  v -= u1 * (u1.dot(v) / u1_sq);
  v.normalize();
  double lambda = 0.0;
  for (int it = 0; it < max_iters; ++it) {
    Eigen::VectorXd w = adj.multiply(v) + shift * v;
    w -= u1 * (u1.dot(w) / u1_sq);
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    w /= norm;
    Eigen::VectorXd aw = adj.multiply(w);
    aw -= u1 * (u1.dot(aw) / u1_sq);
    lambda = w.dot(aw);
    // for a symmetric operator the eigenvalue error is bounded by this residual
    if ((aw - lambda * w).norm() <= tol) break;
    v = w;
  }
  return lambda;
}

}  // namespace

RhoPerpResult rho_perp(const CsrMatrix& adj, double tol, bool force_iterative) {
  if (!adj.symmetric) throw std::invalid_argument("rho_perp: matrix must be symmetric");
  RhoPerpResult res;
  if (adj.n == 1) {
    res.value = 0.0;
    return res;
  }
  if (adj.n <= kDenseThreshold && !force_iterative) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(adj.to_dense());
    const Eigen::VectorXd& ev = solver.eigenvalues();  // ascending
    const int n = adj.n;
    // drop one eigenvalue 1 for u1; the rest are the orthogonal spectrum
    res.value = std::max(std::abs(ev[0]), std::abs(ev[n - 2]));
    res.disconnected = ev[n - 2] >= 1.0 - tol;
  } else {
    const Eigen::VectorXd u1 = principal_vector(adj);
    // probe both spectral ends: +1 shift targets the largest remaining
    // eigenvalue, -1 shift the most negative
    const double top = deflated_power_eig(adj, u1, 1.0, tol);
    const double bottom = deflated_power_eig(adj, u1, -1.0, tol);
    res.value = std::max(std::abs(top), std::abs(bottom));
    res.disconnected = top >= 1.0 - tol;
  }
  res.value = std::min(res.value, 1.0);
  return res;
}

SpectralSummary depth_constants(const CsrMatrix& adj, const Eigen::MatrixXd& x) {
  if (x.rows() != adj.n) throw std::invalid_argument("depth_constants: dimension mismatch");
  SpectralSummary s;
  s.u1 = principal_vector(adj);
  const auto rho = rho_perp(adj);
  s.rho_perp = rho.value;
  s.disconnected = rho.disconnected;
  const double u1_norm = s.u1.norm();
  s.c1 = x.norm() / u1_norm;
  const Eigen::MatrixXd x_perp = x - s.u1 * (s.u1.transpose() * x) / (u1_norm * u1_norm);
  s.c2 = x_perp.norm();
  return s;
}

double sgc_depth_envelope(const SpectralSummary& summary, double w1_degree, int depth) {
  if (depth < 0) throw std::invalid_argument("sgc_depth_envelope: negative depth");
  return summary.c1 * w1_degree + summary.c2 * std::pow(summary.rho_perp, depth);
}

double gcn_depth_envelope(const SpectralSummary& summary, double w1_degree, int depth,
                          double beta) {
  if (beta < 0.0) throw std::invalid_argument("gcn_depth_envelope: beta must be >= 0");
  return sgc_depth_envelope(summary, w1_degree, depth) * std::pow(beta, depth);
}

DepthDiagnostics depth_diagnostics(const Graph& g, const CsrMatrix& adj, EncoderKind kind,
                                   const std::vector<int>& depths, const Split& split,
                                   int num_resample, std::uint64_t seed, int gcn_hidden,
                                   int gcn_epochs, double gcn_lr) {
  if (depths.empty()) throw std::invalid_argument("depth_diagnostics: empty depth list");
  DepthDiagnostics out;
  out.summary = depth_constants(adj, g.features);

  const auto dstat = degree_statistic(g);
  std::vector<double> d_train, d_test;
  for (int i : split.train_indices) d_train.push_back(dstat[i]);
  for (int i : split.test_indices) d_test.push_back(dstat[i]);
  out.w1_degree = wasserstein1_1d(d_train, d_test);

  std::vector<std::vector<int>> class_members(g.num_classes);
  for (int i = 0; i < g.num_nodes; ++i) class_members[g.labels[i]].push_back(i);

  const double fraction = static_cast<double>(split.m) / g.num_nodes;
  std::vector<Split> resampled;
  for (int t = 0; t < num_resample; ++t)
    resampled.push_back(sample_split(g.num_nodes, fraction, derive_seed(seed, t)));

  for (int depth : depths) {
    DepthDiagnosticsRow row;
    row.depth = depth;

    Eigen::MatrixXd z;
    if (kind == EncoderKind::Gcn) {
      const GcnModel model = train_gcn(g, adj, split, depth, gcn_hidden, gcn_epochs, gcn_lr,
                                       derive_seed(seed, 1000 + depth));
      z = gcn_forward(adj, g.features, model).back();
      row.beta = gcn_beta(model);
      row.envelope = gcn_depth_envelope(out.summary, out.w1_degree, depth, row.beta);
    } else {
      z = sgc_embed(adj, g.features, kind == EncoderKind::Raw ? 0 : depth).z;
      row.envelope = sgc_depth_envelope(out.summary, out.w1_degree, depth);
    }

    row.w_g = subset_wasserstein(z, split.train_indices, split.test_indices);

    // W_C: average over classes of E_pi'[(m_c/m) W(train_c, test_c)]
    double wc = 0.0;
    for (int c = 0; c < g.num_classes; ++c) {
      double acc = 0.0;
      for (const auto& pi : resampled) {
        const auto view = class_split_view(pi, g.labels, g.num_classes);
        if (view.train_by_class[c].empty() || view.test_by_class[c].empty()) continue;
        const double w = subset_wasserstein(z, view.train_by_class[c], view.test_by_class[c]);
        acc += (static_cast<double>(view.m_c[c]) / pi.m) * w;
      }
      wc += acc / num_resample;
    }
    row.w_c = wc / g.num_classes;

    // W_S: minimum inter-class distance over full class embedding sets
    double ws = std::numeric_limits<double>::infinity();
    for (int c1 = 0; c1 < g.num_classes; ++c1)
      for (int c2 = c1 + 1; c2 < g.num_classes; ++c2)
        ws = std::min(ws, subset_wasserstein(z, class_members[c1], class_members[c2]));
    row.w_s = g.num_classes > 1 ? ws : 0.0;

    out.rows.push_back(row);
  }
  return out;
}

}  // namespace otb
