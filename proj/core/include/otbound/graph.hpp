#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

namespace otb {

// Undirected attributed graph. Edges are stored once per unordered pair
// (u < v), with no self-loops; normalization adds the self-loops.
struct Graph {
  int num_nodes = 0;
  int num_classes = 0;
  std::vector<std::pair<int, int>> edges;  // u < v, deduplicated
  Eigen::MatrixXd features;                // num_nodes x F
  std::vector<int> labels;                 // values in [0, num_classes)

  int feature_dim() const { return static_cast<int>(features.cols()); }

  // Throws std::invalid_argument on any violated invariant.
  void validate() const;
};

// Per-node degree statistic sqrt(deg(i) + 1), i.e. sqrt of the
// self-loop-augmented degree.
std::vector<double> degree_statistic(const Graph& g);

}  // namespace otb
