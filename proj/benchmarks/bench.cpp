#include <benchmark/benchmark.h>

#include "otbound/bounds.hpp"
#include "otbound/encoders.hpp"
#include "otbound/ot.hpp"
#include "otbound/rng.hpp"
#include "otbound/sbm.hpp"
#include "otbound/sparse.hpp"

namespace {

Eigen::MatrixXd random_points(int n, int dim, std::uint64_t seed) {
  otb::Rng rng(seed);
  Eigen::MatrixXd m(n, dim);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < dim; ++j) m(i, j) = rng.normal();
  return m;
}

void BM_WassersteinExact(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto a = random_points(n, 8, 1);
  const auto b = random_points(n + n / 3, 8, 2);
  for (auto _ : state) benchmark::DoNotOptimize(otb::wasserstein1_exact(a, b).cost);
}
BENCHMARK(BM_WassersteinExact)->Arg(32)->Arg(128)->Arg(512);

void BM_Sinkhorn(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto a = random_points(n, 8, 1);
  const auto b = random_points(n, 8, 2);
  for (auto _ : state)
    benchmark::DoNotOptimize(otb::wasserstein1_sinkhorn(a, b, 0.05, 2000, 1e-6).cost);
}
BENCHMARK(BM_Sinkhorn)->Arg(128)->Arg(512);

void BM_SgcEmbed(benchmark::State& state) {
  const auto g = otb::generate_sbm({100, 100, 100}, 0.2, 0.02, 32, 1.0, 7);
  const auto adj = otb::build_normalized_adjacency(g);
  for (auto _ : state)
    benchmark::DoNotOptimize(otb::sgc_embed(adj, g.features, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_SgcEmbed)->Arg(2)->Arg(8)->Arg(32);

}  // namespace

BENCHMARK_MAIN();
