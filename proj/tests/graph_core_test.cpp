#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "otbound/graph.hpp"
#include "otbound/loader.hpp"
#include "otbound/rng.hpp"
#include "otbound/sbm.hpp"
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
  g.labels = {0, 1};
  return g;
}

Graph triangle() {
  Graph g;
  g.num_nodes = 3;
  g.num_classes = 3;
  g.edges = {{0, 1}, {0, 2}, {1, 2}};
  g.features = Eigen::MatrixXd::Zero(3, 1);
  g.labels = {0, 1, 2};
  return g;
}

std::filesystem::path temp_dir() {
  auto dir = std::filesystem::temp_directory_path() / "otbound_loader_test";
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("normalized adjacency: isolated node is [1]") {
  Graph g;
  g.num_nodes = 1;
  g.num_classes = 1;
  g.features = Eigen::MatrixXd::Zero(1, 1);
  g.labels = {0};
  const auto adj = build_normalized_adjacency(g);
  CHECK(adj.to_dense()(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("normalized adjacency: two-node path is all 0.5") {
  const auto adj = build_normalized_adjacency(path2());
  const auto d = adj.to_dense();
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) CHECK(d(i, j) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("normalized adjacency: triangle is J/3") {
  const auto adj = build_normalized_adjacency(triangle());
  const auto d = adj.to_dense();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(d(i, j) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("normalized adjacency: u1 eigenvector, symmetry, entry range") {
  const auto g = generate_sbm({20, 15}, 0.4, 0.1, 4, 1.0, 11);
  const auto adj = build_normalized_adjacency(g);
  const auto dstat = degree_statistic(g);
  Eigen::VectorXd u1(g.num_nodes);
  for (int i = 0; i < g.num_nodes; ++i) u1[i] = dstat[i];

  const Eigen::VectorXd au1 = adj.multiply(u1);
  CHECK((au1 - u1).lpNorm<Eigen::Infinity>() <= 1e-12);

  const auto dense = adj.to_dense();
  CHECK((dense - dense.transpose()).lpNorm<Eigen::Infinity>() == 0.0);
  for (std::size_t k = 0; k < adj.values.size(); ++k) {
    CHECK(adj.values[k] > 0.0);
    CHECK(adj.values[k] <= 1.0);
  }
}

TEST_CASE("degree statistic") {
  Graph g;
  g.num_nodes = 4;
  g.num_classes = 2;
  g.edges = {{0, 1}, {0, 2}, {0, 3}};  // node 0 has 3 neighbors
  g.features = Eigen::MatrixXd::Zero(4, 1);
  g.labels = {0, 1, 1, 1};
  const auto d = degree_statistic(g);
  CHECK(d[0] == doctest::Approx(2.0));
  CHECK(d[1] == doctest::Approx(std::sqrt(2.0)));

  Graph iso;
  iso.num_nodes = 1;
  iso.num_classes = 1;
  iso.features = Eigen::MatrixXd::Zero(1, 1);
  iso.labels = {0};
  CHECK(degree_statistic(iso)[0] == doctest::Approx(1.0));

  const auto p = degree_statistic(path2());
  CHECK(p[0] == doctest::Approx(std::sqrt(2.0)));
  CHECK(p[1] == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("loader round-trips a saved graph and checks manifest statistics") {
  const auto g = generate_sbm({10, 10}, 0.5, 0.1, 4, 1.0, 3);
  const auto dir = temp_dir();
  save_graph(g, dir, "rt");
  const Graph back = load_graph(dir / "rt_manifest.json");
  CHECK(back.num_nodes == g.num_nodes);
  CHECK(back.num_classes == g.num_classes);
  CHECK(back.edges == g.edges);
  CHECK(back.labels == g.labels);
  CHECK((back.features - g.features).lpNorm<Eigen::Infinity>() <= 1e-12);
}

TEST_CASE("loader rejects label out of range with file context") {
  const auto g = generate_sbm({4, 4}, 1.0, 0.0, 2, 1.0, 3);
  const auto dir = temp_dir();
  save_graph(g, dir, "bad");
  {
    std::ofstream out(dir / "bad_labels.txt");
    out << "0\n0\n0\n0\n1\n1\n1\n2\n";  // 2 == K is out of range
  }
  try {
    load_graph(dir / "bad_manifest.json");
    FAIL("expected an error");
  } catch (const std::exception& e) {
    const std::string msg = e.what();
    CHECK(msg.find("label out of range") != std::string::npos);
    CHECK(msg.find("bad_labels.txt") != std::string::npos);
    CHECK(msg.find(":8") != std::string::npos);  // line context
  }
}

TEST_CASE("loader rejects duplicate and directed-duplicate edges") {
  const auto g = generate_sbm({3, 3}, 1.0, 0.0, 2, 1.0, 3);
  const auto dir = temp_dir();
  save_graph(g, dir, "dup");
  {
    std::ofstream out(dir / "dup_edges.tsv");
    out << "0\t1\n0\t1\n";
  }
  CHECK_THROWS_WITH_AS(load_graph(dir / "dup_manifest.json"),
                       doctest::Contains("duplicate edge"), std::runtime_error);
  {
    std::ofstream out(dir / "dup_edges.tsv");
    out << "1\t0\n";  // v < u is rejected, not silently symmetrized
  }
  CHECK_THROWS_WITH_AS(load_graph(dir / "dup_manifest.json"), doctest::Contains("u < v"),
                       std::runtime_error);
}

TEST_CASE("loader reports missing files and shape mismatches") {
  const auto dir = temp_dir();
  CHECK_THROWS_AS(load_graph(dir / "does_not_exist.json"), std::runtime_error);

  const auto g = generate_sbm({3, 3}, 1.0, 0.0, 2, 1.0, 3);
  save_graph(g, dir, "shape");
  {
    std::ofstream out(dir / "shape_features.csv");
    out << "0.0,0.0\n";  // too few rows
  }
  CHECK_THROWS_WITH_AS(load_graph(dir / "shape_manifest.json"),
                       doctest::Contains("feature rows"), std::runtime_error);
}

TEST_CASE("sbm degenerate probabilities") {
  const auto cliques = generate_sbm({5, 5}, 1.0, 0.0, 2, 1.0, 9);
  CHECK(cliques.edges.size() == 2 * 10);  // two disjoint 5-cliques
  for (const auto& [a, b] : cliques.edges) CHECK(cliques.labels[a] == cliques.labels[b]);

  const auto isolated = generate_sbm({4}, 0.0, 0.0, 1, 0.0, 9);
  CHECK(isolated.num_nodes == 4);
  CHECK(isolated.edges.empty());
}

TEST_CASE("sbm edge count within 3 sigma of the binomial expectation") {
  const auto g = generate_sbm({50, 50}, 0.5, 0.05, 4, 1.0, 7);
  const double n_in = 2.0 * (50.0 * 49.0 / 2.0);
  const double n_out = 50.0 * 50.0;
  const double mean = n_in * 0.5 + n_out * 0.05;
  const double var = n_in * 0.5 * 0.5 + n_out * 0.05 * 0.95;
  CHECK(std::abs(static_cast<double>(g.edges.size()) - mean) <= 3.0 * std::sqrt(var));
}

TEST_CASE("sbm determinism and label/feature structure") {
  const auto a = generate_sbm({8, 8}, 0.4, 0.1, 4, 2.5, 42);
  const auto b = generate_sbm({8, 8}, 0.4, 0.1, 4, 2.5, 42);
  CHECK(a.edges == b.edges);
  CHECK((a.features - b.features).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK(a.labels[0] == 0);
  CHECK(a.labels[15] == 1);
  CHECK_THROWS_AS(generate_sbm({}, 0.5, 0.1, 4, 1.0, 0), std::invalid_argument);
}

TEST_CASE("sample_split sizes and determinism") {
  const auto s = sample_split(10, 0.3, 99);
  CHECK(s.m == 3);
  CHECK(s.u == 7);
  const auto s2 = sample_split(10, 0.3, 99);
  CHECK(s.train_indices == s2.train_indices);
  CHECK(s.test_indices == s2.test_indices);
  CHECK_THROWS_AS(sample_split(10, 0.05, 1), std::invalid_argument);
}

TEST_CASE("sample_split is a partition") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto s = sample_split(57, 0.3, seed);
    std::vector<int> all = s.train_indices;
    all.insert(all.end(), s.test_indices.begin(), s.test_indices.end());
    std::sort(all.begin(), all.end());
    std::vector<int> expect(57);
    std::iota(expect.begin(), expect.end(), 0);
    CHECK(all == expect);
  }
}

TEST_CASE("sample_split train frequency is uniform over seeds") {
  const int n = 10000;
  // per-index membership frequency over many seeds, spot-checked on a few indices
  const int num_seeds = 4000;
  std::vector<int> hits(5, 0);
  for (int seed = 0; seed < num_seeds; ++seed) {
    const auto s = sample_split(n, 0.3, static_cast<std::uint64_t>(seed));
    for (int k = 0; k < 5; ++k)
      if (std::binary_search(s.train_indices.begin(), s.train_indices.end(), k * 1234))
        ++hits[k];
  }
  for (int k = 0; k < 5; ++k)
    CHECK(std::abs(hits[k] / static_cast<double>(num_seeds) - 0.3) <= 0.02);
}

TEST_CASE("class_split_view counts are consistent") {
  const auto g = generate_sbm({10, 20, 30}, 0.3, 0.05, 4, 1.0, 5);
  const auto s = sample_split(g.num_nodes, 0.3, 17);
  const auto view = class_split_view(s, g.labels, g.num_classes);
  CHECK(std::accumulate(view.m_c.begin(), view.m_c.end(), 0) == s.m);
  CHECK(std::accumulate(view.u_c.begin(), view.u_c.end(), 0) == s.u);
}

TEST_CASE("graph validation catches bad inputs") {
  Graph g = path2();
  g.edges = {{1, 0}};
  CHECK_THROWS_AS(g.validate(), std::invalid_argument);
  g = path2();
  g.labels = {0, 0};  // class 1 empty
  CHECK_THROWS_AS(g.validate(), std::invalid_argument);
  g = path2();
  g.features(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(g.validate(), std::invalid_argument);
}
