#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <vector>

#include "otbound/encoders.hpp"
#include "otbound/graph.hpp"
#include "otbound/rng.hpp"
#include "otbound/sparse.hpp"
#include "otbound/split.hpp"

using namespace otb;

namespace {

Graph path2() {
  Graph g;
  g.num_nodes = 2;
  g.num_classes = 2;
  g.edges = {{0, 1}};
  g.features = Eigen::MatrixXd::Zero(2, 1);
  g.features << 1.0, 0.0;
  g.labels = {0, 1};
  return g;
}

Graph ring(int n, int feature_dim, std::uint64_t seed) {
  Graph g;
  g.num_nodes = n;
  g.num_classes = 2;
  for (int i = 0; i + 1 < n; ++i) g.edges.push_back({i, i + 1});
  g.edges.push_back({0, n - 1});
  g.features = Eigen::MatrixXd(n, feature_dim);
  Rng rng(seed);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < feature_dim; ++j) g.features(i, j) = rng.normal();
  g.labels.resize(n);
  for (int i = 0; i < n; ++i) g.labels[i] = i % 2;
  return g;
}

double max_abs_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("sgc depth 0 is the identity") {
  const auto g = ring(8, 3, 1);
  const auto adj = build_normalized_adjacency(g);
  const auto z = sgc_embed(adj, g.features, 0);
  CHECK(max_abs_diff(z.z, g.features) == 0.0);
  CHECK(z.depth == 0);
  CHECK(z.kind == EncoderKind::Sgc);
}

TEST_CASE("sgc on the two-node path averages features") {
  const auto g = path2();
  const auto adj = build_normalized_adjacency(g);
  // A_hat is the rank-one averaging matrix [[.5,.5],[.5,.5]], so one hop
  // already lands on the fixed point.
  const auto z1 = sgc_embed(adj, g.features, 1);
  CHECK(z1.z(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(z1.z(1, 0) == doctest::Approx(0.5).epsilon(1e-12));
  const auto z5 = sgc_embed(adj, g.features, 5);
  CHECK(max_abs_diff(z5.z, z1.z) <= 1e-12);
}

TEST_CASE("sgc depths compose: embed(d1+d2) == embed(d2) of embed(d1)") {
  const auto g = ring(12, 4, 7);
  const auto adj = build_normalized_adjacency(g);
  for (int d1 : {0, 1, 3})
    for (int d2 : {1, 2, 5}) {
      const auto whole = sgc_embed(adj, g.features, d1 + d2);
      const auto stage = sgc_embed(adj, sgc_embed(adj, g.features, d1).z, d2);
      CHECK(max_abs_diff(whole.z, stage.z) <= 1e-12);
    }
}

TEST_CASE("features in the span of u1 are fixed by propagation") {
  const auto g = ring(10, 1, 3);
  const auto adj = build_normalized_adjacency(g);
  Eigen::MatrixXd x(g.num_nodes, 1);
  const auto ds = degree_statistic(g);
  for (int i = 0; i < g.num_nodes; ++i) x(i, 0) = 2.5 * ds[i];
  const auto z = sgc_embed(adj, x, 20);
  CHECK(max_abs_diff(z.z, x) <= 1e-9);
}

TEST_CASE("gcn_forward with identity weights applies ReLU(A_hat x)") {
  const auto g = path2();
  const auto adj = build_normalized_adjacency(g);
  GcnModel model;
  model.weights = {Eigen::MatrixXd::Identity(1, 1)};
  const auto layers = gcn_forward(adj, g.features, model);
  REQUIRE(layers.size() == 2);
  CHECK(max_abs_diff(layers[0], g.features) == 0.0);
  CHECK(layers[1](0, 0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(layers[1](1, 0) == doctest::Approx(0.5).epsilon(1e-12));

  // a negated weight pushes everything below zero, so ReLU clips to 0
  model.weights = {-Eigen::MatrixXd::Identity(1, 1)};
  const auto clipped = gcn_forward(adj, g.features, model);
  CHECK(clipped[1].cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("gcn layer norms stay under the beta^l * ||X||_F envelope") {
  const auto g = ring(14, 5, 11);
  const auto adj = build_normalized_adjacency(g);
  Rng rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    GcnModel model;
    const int depth = 1 + static_cast<int>(rng.below(4));
    int in = 5;
    for (int t = 0; t < depth; ++t) {
      const int out = 3 + static_cast<int>(rng.below(4));
      Eigen::MatrixXd w(in, out);
      for (int i = 0; i < in; ++i)
        for (int j = 0; j < out; ++j) w(i, j) = rng.normal();
      model.weights.push_back(w);
      in = out;
    }
    const double beta = gcn_beta(model);
    const auto layers = gcn_forward(adj, g.features, model);
    const double x_norm = g.features.norm();
    for (int l = 0; l <= depth; ++l)
      CHECK(layers[l].norm() <= std::pow(beta < 1.0 ? 1.0 : beta, l) * x_norm + 1e-9);
  }
}

TEST_CASE("weight_spectral_norm matches hand values") {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(3, 3);
  d(0, 0) = 0.5;
  d(1, 1) = -2.0;
  d(2, 2) = 1.0;
  CHECK(weight_spectral_norm(d) == doctest::Approx(2.0).epsilon(1e-9));

  Eigen::MatrixXd w(2, 2);
  w << 1.0, 1.0, 0.0, 1.0;  // singular values sqrt((3 +- sqrt(5))/2)
  CHECK(weight_spectral_norm(w) ==
        doctest::Approx(std::sqrt((3.0 + std::sqrt(5.0)) / 2.0)).epsilon(1e-9));

  GcnModel model;
  model.weights = {d, w};
  CHECK(gcn_beta(model) == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("gcn gradients match central differences") {
  const auto g = ring(10, 3, 5);
  const auto adj = build_normalized_adjacency(g);
  const auto split = sample_split(g.num_nodes, 0.5, 2);

  Rng rng(33);
  std::vector<Eigen::MatrixXd> params;
  params.emplace_back(3, 4);
  params.emplace_back(4, 4);
  params.emplace_back(4, g.num_classes);  // readout
  for (auto& p : params)
    for (int i = 0; i < p.rows(); ++i)
      for (int j = 0; j < p.cols(); ++j) p(i, j) = 0.3 * rng.normal();

  std::vector<Eigen::MatrixXd> grads;
  gcn_loss_and_grads(adj, g.features, g.labels, split.train_indices, g.num_classes, params,
                     &grads);
  REQUIRE(grads.size() == params.size());

  const double h = 1e-5;
  for (std::size_t t = 0; t < params.size(); ++t)
    for (int i = 0; i < params[t].rows(); ++i)
      for (int j = 0; j < params[t].cols(); ++j) {
        auto perturbed = params;
        perturbed[t](i, j) += h;
        const double up = gcn_loss_and_grads(adj, g.features, g.labels, split.train_indices,
                                             g.num_classes, perturbed, nullptr);
        perturbed[t](i, j) -= 2.0 * h;
        const double down = gcn_loss_and_grads(adj, g.features, g.labels, split.train_indices,
                                               g.num_classes, perturbed, nullptr);
        const double numeric = (up - down) / (2.0 * h);
        const double analytic = grads[t](i, j);
        const double denom = std::max({std::abs(numeric), std::abs(analytic), 1e-8});
        CHECK(std::abs(numeric - analytic) / denom <= 1e-4);
      }
}

TEST_CASE("train_gcn is deterministic and reduces the training loss") {
  const auto g = ring(16, 4, 13);
  const auto adj = build_normalized_adjacency(g);
  const auto split = sample_split(g.num_nodes, 0.5, 4);

  const auto m1 = train_gcn(g, adj, split, 2, 8, 60, 0.01, 99);
  const auto m2 = train_gcn(g, adj, split, 2, 8, 60, 0.01, 99);
  REQUIRE(m1.num_layers() == m2.num_layers());
  for (int t = 0; t < m1.num_layers(); ++t)
    CHECK(max_abs_diff(m1.weights[t], m2.weights[t]) == 0.0);

  const auto m3 = train_gcn(g, adj, split, 2, 8, 60, 0.01, 100);
  CHECK(max_abs_diff(m1.weights[0], m3.weights[0]) > 0.0);
}

TEST_CASE("zero-epoch training returns the seeded initialization unchanged") {
  const auto g = ring(12, 3, 6);
  const auto adj = build_normalized_adjacency(g);
  const auto split = sample_split(g.num_nodes, 0.5, 8);
  const auto fresh = train_gcn(g, adj, split, 2, 6, 0, 0.01, 42);
  const auto again = train_gcn(g, adj, split, 2, 6, 0, 0.01, 42);
  for (int t = 0; t < fresh.num_layers(); ++t)
    CHECK(max_abs_diff(fresh.weights[t], again.weights[t]) == 0.0);
  // Glorot bound for the first layer: sqrt(6 / (3 + 6))
  const double limit = std::sqrt(6.0 / 9.0);
  CHECK(fresh.weights[0].cwiseAbs().maxCoeff() <= limit);
  CHECK(fresh.weights[0].cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("gcn model save/load round-trips exactly") {
  const auto g = ring(10, 3, 17);
  const auto adj = build_normalized_adjacency(g);
  const auto split = sample_split(g.num_nodes, 0.5, 1);
  const auto model = train_gcn(g, adj, split, 2, 5, 30, 0.01, 7);

  const auto path = std::filesystem::temp_directory_path() / "otbound_gcn_roundtrip.json";
  model.save(path);
  const auto loaded = GcnModel::load(path);
  std::filesystem::remove(path);

  REQUIRE(loaded.num_layers() == model.num_layers());
  for (int t = 0; t < model.num_layers(); ++t)
    CHECK(max_abs_diff(loaded.weights[t], model.weights[t]) == 0.0);
}

TEST_CASE("encoder names round-trip and reject unknown strings") {
  for (auto kind : {EncoderKind::Raw, EncoderKind::Sgc, EncoderKind::Gcn})
    CHECK(parse_encoder(encoder_name(kind)) == kind);
  CHECK_THROWS(parse_encoder("sage"));
}
