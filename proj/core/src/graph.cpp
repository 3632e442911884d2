#include "otbound/graph.hpp"

#include <cmath>
#include <set>
#include <stdexcept>
#include <string>

namespace otb {

void Graph::validate() const {
  if (num_nodes <= 0) throw std::invalid_argument("graph: num_nodes must be positive");
  if (num_classes <= 0) throw std::invalid_argument("graph: num_classes must be positive");
  if (features.rows() != num_nodes)
    throw std::invalid_argument("graph: feature rows do not match num_nodes");
  if (static_cast<int>(labels.size()) != num_nodes)
    throw std::invalid_argument("graph: label count does not match num_nodes");

  std::set<std::pair<int, int>> seen;
  for (const auto& [a, b] : edges) {
    if (a < 0 || b < 0 || a >= num_nodes || b >= num_nodes)
      throw std::invalid_argument("graph: edge endpoint out of range");
    if (a == b) throw std::invalid_argument("graph: self-loop stored");
    if (a >= b) throw std::invalid_argument("graph: edge not stored as (u, v) with u < v");
    if (!seen.insert({a, b}).second) throw std::invalid_argument("graph: duplicate edge");
  }

  std::vector<int> class_count(num_classes, 0);
  for (int y : labels) {
    if (y < 0 || y >= num_classes) throw std::invalid_argument("graph: label out of range");
    ++class_count[y];
  }
  for (int c = 0; c < num_classes; ++c)
    if (class_count[c] == 0)
      throw std::invalid_argument("graph: class " + std::to_string(c) + " has no node");

  if (!features.allFinite()) throw std::invalid_argument("graph: non-finite feature entry");
}

std::vector<double> degree_statistic(const Graph& g) {
  std::vector<int> deg(g.num_nodes, 0);
  for (const auto& [a, b] : g.edges) {
    ++deg[a];
    ++deg[b];
  }
  std::vector<double> d(g.num_nodes);
  for (int i = 0; i < g.num_nodes; ++i) d[i] = std::sqrt(static_cast<double>(deg[i] + 1));
  return d;
}

}  // namespace otb
