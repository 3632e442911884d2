#pragma once

#include <cstdint>
#include <vector>

#include "otbound/graph.hpp"

namespace otb {

// Stochastic block model generator. Labels equal block ids; features are
// standard-normal draws with coordinate c shifted by feature_shift for
// block c. Deterministic for a fixed seed.
Graph generate_sbm(const std::vector<int>& blocks, double p_in, double p_out,
                   int feature_dim, double feature_shift, std::uint64_t seed);

}  // namespace otb
