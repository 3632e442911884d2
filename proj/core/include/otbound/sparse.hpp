#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "otbound/graph.hpp"

namespace otb {

// Square sparse matrix in compressed-row form. Products accumulate in
// row-major column order, so results are bit-reproducible.
struct CsrMatrix {
  int n = 0;
  std::vector<std::int64_t> row_offsets;  // size n + 1, nondecreasing
  std::vector<int> col_indices;           // sorted within each row
  std::vector<double> values;
  bool symmetric = false;

  Eigen::MatrixXd multiply(const Eigen::MatrixXd& dense) const;
  Eigen::VectorXd multiply(const Eigen::VectorXd& v) const;
  Eigen::MatrixXd to_dense() const;
};

// Symmetrically normalized self-loop-augmented adjacency
// A_hat = D~^{-1/2} (A + I) D~^{-1/2}.
CsrMatrix build_normalized_adjacency(const Graph& g);

}  // namespace otb
