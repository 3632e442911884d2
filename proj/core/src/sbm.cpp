#include "otbound/sbm.hpp"

#include <stdexcept>

#include "otbound/rng.hpp"

namespace otb {

Graph generate_sbm(const std::vector<int>& blocks, double p_in, double p_out,
                   int feature_dim, double feature_shift, std::uint64_t seed) {
  if (blocks.empty()) throw std::invalid_argument("generate_sbm: empty block list");
  for (int b : blocks)
    if (b <= 0) throw std::invalid_argument("generate_sbm: block sizes must be positive");
  if (p_in < 0.0 || p_in > 1.0 || p_out < 0.0 || p_out > 1.0)
    throw std::invalid_argument("generate_sbm: probabilities must be in [0, 1]");
  if (feature_dim < static_cast<int>(blocks.size()))
    throw std::invalid_argument("generate_sbm: feature_dim must cover one coordinate per block");

  Graph g;
  g.num_classes = static_cast<int>(blocks.size());
  std::vector<int> block_of;
  for (int c = 0; c < g.num_classes; ++c)
    for (int k = 0; k < blocks[c]; ++k) block_of.push_back(c);
  g.num_nodes = static_cast<int>(block_of.size());
  g.labels = block_of;

  Rng rng(seed);
  for (int i = 0; i < g.num_nodes; ++i)
    for (int j = i + 1; j < g.num_nodes; ++j) {
      const double p = block_of[i] == block_of[j] ? p_in : p_out;
      if (rng.uniform() < p) g.edges.emplace_back(i, j);
    }

  g.features.resize(g.num_nodes, feature_dim);
  for (int i = 0; i < g.num_nodes; ++i)
    for (int d = 0; d < feature_dim; ++d) g.features(i, d) = rng.normal();
  for (int i = 0; i < g.num_nodes; ++i) g.features(i, block_of[i]) += feature_shift;

  g.validate();
  return g;
}

}  // namespace otb
