#include "otbound/loader.hpp"

#include <charconv>
#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>
#include <stdexcept>

#include "otbound/util.hpp"

namespace otb {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::filesystem::path& file, std::size_t line,
                       const std::string& what) {
  throw std::runtime_error(file.string() + ":" + std::to_string(line) + ": " + what);
}

std::ifstream open_or_throw(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw std::runtime_error("cannot open file: " + p.string());
  return in;
}

int parse_int(const std::string& tok, const std::filesystem::path& file, std::size_t line) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    fail(file, line, "expected an integer, got '" + tok + "'");
  return v;
}

}  // namespace

Graph load_graph(const std::filesystem::path& manifest_path) {
  std::ifstream min = open_or_throw(manifest_path);
  json manifest;
  try {
    min >> manifest;
  } catch (const json::exception& e) {
    throw std::runtime_error(manifest_path.string() + ": invalid JSON: " + e.what());
  }

  Graph g;
  g.num_nodes = manifest.at("num_nodes").get<int>();
  g.num_classes = manifest.at("num_classes").get<int>();
  const auto base = manifest_path.parent_path();
  const auto edges_path = base / manifest.at("edges").get<std::string>();
  const auto features_path = base / manifest.at("features").get<std::string>();
  const auto labels_path = base / manifest.at("labels").get<std::string>();

  {
    std::ifstream in = open_or_throw(edges_path);
    std::string line;
    std::size_t lineno = 0;
    std::set<std::pair<int, int>> seen;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      const auto tab = line.find('\t');
      if (tab == std::string::npos) fail(edges_path, lineno, "expected 'u<TAB>v'");
      const int a = parse_int(line.substr(0, tab), edges_path, lineno);
      const int b = parse_int(line.substr(tab + 1), edges_path, lineno);
      if (a < 0 || b < 0 || a >= g.num_nodes || b >= g.num_nodes)
        fail(edges_path, lineno, "edge endpoint out of range");
      if (a == b) fail(edges_path, lineno, "self-loop");
      if (a >= b) fail(edges_path, lineno, "edges must satisfy u < v");
      if (!seen.insert({a, b}).second) fail(edges_path, lineno, "duplicate edge");
      g.edges.emplace_back(a, b);
    }
  }

  {
    std::ifstream in = open_or_throw(features_path);
    std::string line;
    std::size_t lineno = 0;
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      std::vector<double> row;
      std::stringstream ss(line);
      std::string tok;
      while (std::getline(ss, tok, ',')) {
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec != std::errc() || ptr != tok.data() + tok.size())
          fail(features_path, lineno, "expected a decimal real, got '" + tok + "'");
        row.push_back(v);
      }
      if (!rows.empty() && row.size() != rows.front().size())
        fail(features_path, lineno, "inconsistent feature row width");
      rows.push_back(std::move(row));
    }
    if (static_cast<int>(rows.size()) != g.num_nodes)
      throw std::runtime_error(features_path.string() + ": expected " +
                               std::to_string(g.num_nodes) + " feature rows, got " +
                               std::to_string(rows.size()));
    g.features.resize(g.num_nodes, static_cast<int>(rows.front().size()));
    for (int i = 0; i < g.num_nodes; ++i)
      for (int j = 0; j < g.features.cols(); ++j) g.features(i, j) = rows[i][j];
  }

  {
    std::ifstream in = open_or_throw(labels_path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      const int y = parse_int(line, labels_path, lineno);
      if (y < 0 || y >= g.num_classes) fail(labels_path, lineno, "label out of range");
      g.labels.push_back(y);
    }
    if (static_cast<int>(g.labels.size()) != g.num_nodes)
      throw std::runtime_error(labels_path.string() + ": expected " +
                               std::to_string(g.num_nodes) + " labels, got " +
                               std::to_string(g.labels.size()));
  }

  g.validate();
  return g;
}

void save_graph(const Graph& g, const std::filesystem::path& dir, const std::string& name) {
  std::filesystem::create_directories(dir);

  {
    std::ofstream out(dir / (name + "_edges.tsv"));
    for (const auto& [a, b] : g.edges) out << a << '\t' << b << '\n';
  }
  {
    std::ofstream out(dir / (name + "_features.csv"));
    for (int i = 0; i < g.num_nodes; ++i) {
      for (int j = 0; j < g.features.cols(); ++j) {
        if (j) out << ',';
        out << format_double(g.features(i, j));
      }
      out << '\n';
    }
  }
  {
    std::ofstream out(dir / (name + "_labels.txt"));
    for (int y : g.labels) out << y << '\n';
  }
  {
    nlohmann::json manifest{{"num_nodes", g.num_nodes},
                            {"num_classes", g.num_classes},
                            {"edges", name + "_edges.tsv"},
                            {"features", name + "_features.csv"},
                            {"labels", name + "_labels.txt"}};
    std::ofstream out(dir / (name + "_manifest.json"));
    out << manifest.dump(2) << '\n';
  }
}

}  // namespace otb
