#include "otbound/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace otb {

Eigen::MatrixXd CsrMatrix::multiply(const Eigen::MatrixXd& dense) const {
  if (dense.rows() != n) throw std::invalid_argument("csr multiply: dimension mismatch");
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, dense.cols());
  for (int i = 0; i < n; ++i) {
    // fixed accumulation order: entries are sorted by column within the row
    for (std::int64_t k = row_offsets[i]; k < row_offsets[i + 1]; ++k)
      out.row(i) += values[k] * dense.row(col_indices[k]);
  }
  return out;
}

Eigen::VectorXd CsrMatrix::multiply(const Eigen::VectorXd& v) const {
  if (v.size() != n) throw std::invalid_argument("csr multiply: dimension mismatch");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::int64_t k = row_offsets[i]; k < row_offsets[i + 1]; ++k)
      acc += values[k] * v[col_indices[k]];
    out[i] = acc;
  }
  return out;
}

Eigen::MatrixXd CsrMatrix::to_dense() const {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (std::int64_t k = row_offsets[i]; k < row_offsets[i + 1]; ++k)
      out(i, col_indices[k]) = values[k];
  return out;
}

CsrMatrix build_normalized_adjacency(const Graph& g) {
  const int n = g.num_nodes;
  std::vector<double> deg(n, 1.0);  // self-loop contributes 1
  for (const auto& [a, b] : g.edges) {
    deg[a] += 1.0;
    deg[b] += 1.0;
  }

  // adjacency lists including the self-loop, sorted by column
  std::vector<std::vector<int>> nbrs(n);
  for (int i = 0; i < n; ++i) nbrs[i].push_back(i);
  for (const auto& [a, b] : g.edges) {
    nbrs[a].push_back(b);
    nbrs[b].push_back(a);
  }

  CsrMatrix m;
  m.n = n;
  m.symmetric = true;
  m.row_offsets.assign(n + 1, 0);
  for (int i = 0; i < n; ++i) {
    std::sort(nbrs[i].begin(), nbrs[i].end());
    m.row_offsets[i + 1] = m.row_offsets[i] + static_cast<std::int64_t>(nbrs[i].size());
  }
  m.col_indices.reserve(m.row_offsets[n]);
  m.values.reserve(m.row_offsets[n]);
  for (int i = 0; i < n; ++i)
    for (int j : nbrs[i]) {
      m.col_indices.push_back(j);
      m.values.push_back(1.0 / std::sqrt(deg[i] * deg[j]));
    }
  return m;
}

}  // namespace otb
