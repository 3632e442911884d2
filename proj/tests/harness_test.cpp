#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "otbound/graph.hpp"
#include "otbound/harness.hpp"
#include "otbound/sbm.hpp"
#include "otbound/util.hpp"

using namespace otb;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunConfig tiny_config() {
  RunConfig c;
  c.depths = {1, 2};
  c.clf_layers = {1};
  c.seeds = {3};
  c.hidden = 8;
  c.epochs = 60;
  c.permutation_samples = 2;
  return c;
}

}  // namespace

TEST_CASE("spearman hand examples") {
  CHECK(*spearman({1, 2, 3}, {2, 4, 6}) == doctest::Approx(1.0));
  CHECK(*spearman({1, 2, 3}, {10, 100, 1000}) == doctest::Approx(1.0));
  CHECK(*spearman({1, 2, 3}, {3, 2, 1}) == doctest::Approx(-1.0));
  CHECK(*spearman({1, 2, 3}, {3, 1, 2}) == doctest::Approx(-0.5));
  // average ranks on ties: x ranks (1.5, 1.5, 3)
  CHECK(*spearman({5, 5, 9}, {1, 1, 2}) == doctest::Approx(1.0));
}

TEST_CASE("spearman is invariant under strictly increasing transforms") {
  const std::vector<double> xs = {0.3, -1.2, 4.0, 2.2, 0.9};
  const std::vector<double> ys = {1.0, 0.0, 3.5, 9.0, 2.0};
  std::vector<double> exp_xs;
  for (double v : xs) exp_xs.push_back(std::exp(v));
  CHECK(*spearman(xs, ys) == doctest::Approx(*spearman(exp_xs, ys)));
}

TEST_CASE("spearman of a constant series is undefined") {
  CHECK_FALSE(spearman({1, 1, 1}, {1, 2, 3}).has_value());
  CHECK_FALSE(spearman({1, 2, 3}, {7, 7, 7}).has_value());
  CHECK_THROWS(spearman({1.0}, {2.0}));
  CHECK_THROWS(spearman({1, 2}, {1, 2, 3}));
}

TEST_CASE("run_experiment fills one record per grid point, deterministically") {
  const auto g = generate_sbm({10, 10}, 0.5, 0.1, 3, 1.5, 5);
  const auto config = tiny_config();

  const auto records = run_experiment(g, config);
  REQUIRE(records.size() == 2);  // 2 depths x 1 layer count x 1 seed
  for (const auto& rec : records) {
    CHECK_FALSE(rec.failed);
    CHECK(rec.report.gamma > 0.0);
    CHECK(rec.rho_perp >= 0.0);
    CHECK(rec.c1 > 0.0);
    CHECK(std::isfinite(rec.report.bound_classwise));
    CHECK(std::isfinite(rec.report.bound_classwise_approx));
    CHECK(rec.wall_time_sec >= 0.0);
  }
  CHECK(records[0].depth == 1);
  CHECK(records[1].depth == 2);

  const auto again = run_experiment(g, config);
  for (std::size_t i = 0; i < records.size(); ++i)
    CHECK(report_csv_row(records[i]) == report_csv_row(again[i]));
}

TEST_CASE("csv report round-trips through the pinned schema") {
  const auto g = generate_sbm({8, 8}, 0.5, 0.1, 3, 1.5, 6);
  auto config = tiny_config();
  config.depths = {1};
  const auto records = run_experiment(g, config);

  const auto dir = std::filesystem::temp_directory_path() / "otbound_harness_test";
  std::filesystem::create_directories(dir);
  const auto csv = dir / "report.csv";
  emit_report(records, config, csv);

  const std::string text = slurp(csv);
  std::stringstream lines(text);
  std::string header, row;
  std::getline(lines, header);
  std::getline(lines, row);
  CHECK(header == report_csv_header());
  CHECK(header.rfind("run_id,encoder,depth,clf_layers,seed,gamma,R_u", 0) == 0);
  CHECK(row == report_csv_row(records[0]));

  // shortest-round-trip doubles: the parsed value is bit-identical
  std::stringstream cells(row);
  std::string cell;
  for (int i = 0; i < 6; ++i) std::getline(cells, cell, ',');
  CHECK(std::stod(cell) == records[0].report.gamma);

  // the sidecar holds the config that produced the records
  const std::string sidecar = slurp(csv.string() + ".config.json");
  CHECK(sidecar.find("\"depths\"") != std::string::npos);
  CHECK(sidecar.find("\"epochs\": 60") != std::string::npos);

  // byte-identical on a second emission
  emit_report(records, config, dir / "report2.csv");
  CHECK(slurp(dir / "report2.csv") == text);
  std::filesystem::remove_all(dir);
}

TEST_CASE("format_double prints shortest exact decimal forms") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(0.30000000000000004) != "0.3");
  CHECK(std::stod(format_double(0.30000000000000004)) == 0.30000000000000004);
}

TEST_CASE("correlate scores a bound column against the empirical gap") {
  const auto g = generate_sbm({12, 12}, 0.6, 0.05, 3, 1.5, 7);
  auto config = tiny_config();
  config.depths = {1, 2, 4};
  config.seeds = {1, 2};
  auto records = run_experiment(g, config);

  // the gap correlated with itself is exactly 1
  int excluded = -1;
  const auto self = correlate(records, "gap", &excluded);
  REQUIRE(self.has_value());
  CHECK(*self == doctest::Approx(1.0));
  CHECK(excluded == 0);

  // a bound column yields some value in [-1, 1]
  const auto rho = correlate(records, "bound_global", nullptr);
  if (rho.has_value()) {
    CHECK(*rho >= -1.0 - 1e-12);
    CHECK(*rho <= 1.0 + 1e-12);
  }

  // vacuous and failed records are excluded from the correlation
  records[0].report.vacuous = true;
  records[1].failed = true;
  correlate(records, "gap", &excluded);
  CHECK(excluded == 2);

  CHECK_THROWS(correlate(records, "no_such_column", nullptr));
  CHECK_THROWS(correlate({}, "gap", nullptr));
}

TEST_CASE("run config validation and json round-trip") {
  RunConfig c = tiny_config();
  c.graph_manifest = "data/some_manifest.json";

  const auto dir = std::filesystem::temp_directory_path() / "otbound_config_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "config.json";
  {
    std::ofstream out(path);
    out << c.to_json();
  }
  const auto loaded = RunConfig::from_json_file(path);
  std::filesystem::remove_all(dir);
  CHECK(loaded.depths == c.depths);
  CHECK(loaded.clf_layers == c.clf_layers);
  CHECK(loaded.seeds == c.seeds);
  CHECK(loaded.epochs == c.epochs);
  CHECK(loaded.graph_manifest == c.graph_manifest);

  RunConfig bad = c;
  bad.depths.clear();
  CHECK_THROWS(bad.validate());
  bad = c;
  bad.clf_layers = {3};
  CHECK_THROWS(bad.validate());
  bad = c;
  bad.train_fraction = 1.0;
  CHECK_THROWS(bad.validate());
  bad = c;
  bad.permutation_samples = 0;
  CHECK_THROWS(bad.validate());
}

TEST_CASE("failed grid points are recorded, not fatal") {
  // a one-class graph cannot define margins, so every run must fail cleanly
  Graph g = generate_sbm({10, 10}, 0.5, 0.1, 3, 1.5, 8);
  for (auto& y : g.labels) y = 0;  // collapse to a single class
  g.num_classes = 1;
  auto config = tiny_config();
  config.depths = {1};
  const auto records = run_experiment(g, config);
  REQUIRE(records.size() == 1);
  CHECK(records[0].failed);
  CHECK_FALSE(records[0].error.empty());
}
