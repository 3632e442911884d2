#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "otbound/bounds.hpp"
#include "otbound/graph.hpp"

namespace otb {

// One experiment matrix: depths x classifier sizes x seeds.
struct RunConfig {
  std::string graph_manifest;           // path to a dataset manifest
  EncoderKind encoder = EncoderKind::Sgc;
  std::vector<int> depths{1, 2, 4, 8, 16, 32};
  std::vector<int> clf_layers{1, 2, 4};
  std::vector<std::uint64_t> seeds{0};
  double train_fraction = 0.3;
  double gamma_quantile = 0.5;
  double percentile = 0.9;
  int permutation_samples = 4;
  double delta = 0.05;
  int hidden = 64;
  int epochs = 500;
  double lr = 0.01;
  std::string output_path;

  void validate() const;
  static RunConfig from_json_file(const std::filesystem::path& path);
  std::string to_json() const;
};

struct RunRecord {
  int run_id = 0;
  EncoderKind encoder = EncoderKind::Sgc;
  int depth = 0;
  int clf_layers = 0;
  std::uint64_t seed = 0;
  BoundReport report;
  double rho_perp = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  double beta = 1.0;
  double wall_time_sec = 0.0;
  bool failed = false;
  std::string error;
};

std::vector<RunRecord> run_experiment(const Graph& g, const RunConfig& config);

// Spearman rank correlation with average ranks for ties; nullopt when
// either input is constant (correlation undefined).
std::optional<double> spearman(const std::vector<double>& xs, const std::vector<double>& ys);

// Correlation of one bound column against the empirical gap; vacuous and
// failed records are excluded (count reported through excluded).
std::optional<double> correlate(const std::vector<RunRecord>& records,
                                const std::string& bound_field, int* excluded = nullptr);

// CSV with a pinned column order plus a JSON sidecar of the config.
void emit_report(const std::vector<RunRecord>& records, const RunConfig& config,
                 const std::filesystem::path& path);

// Header and per-record row of the pinned CSV schema.
std::string report_csv_header();
std::string report_csv_row(const RunRecord& rec);

}  // namespace otb
