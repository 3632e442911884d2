#include "otbound/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "otbound/loader.hpp"
#include "otbound/rng.hpp"
#include "otbound/sparse.hpp"
#include "otbound/spectral.hpp"
#include "otbound/util.hpp"

namespace otb {

namespace {

using nlohmann::json;

std::vector<double> average_ranks(const std::vector<double>& xs) {
  const std::size_t n = xs.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return xs[a] < xs[b];
  });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && xs[order[j + 1]] == xs[order[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

double bound_field_value(const RunRecord& rec, const std::string& field) {
  if (field == "bound_global") return rec.report.bound_global;
  if (field == "bound_classwise") return rec.report.bound_classwise;
  if (field == "bound_classwise_approx") return rec.report.bound_classwise_approx;
  if (field == "gap") return rec.report.empirical_gap;
  if (field == "w_global") return rec.report.w_global;
  throw std::invalid_argument("correlate: unknown bound field '" + field + "'");
}

}  // namespace

void RunConfig::validate() const {
  if (depths.empty()) throw std::invalid_argument("config: empty depth list");
  if (clf_layers.empty()) throw std::invalid_argument("config: empty classifier layer list");
  if (seeds.empty()) throw std::invalid_argument("config: empty seed list");
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw std::invalid_argument("config: train_fraction must be in (0, 1)");
  for (int l : clf_layers)
    if (l != 1 && l != 2 && l != 4)
      throw std::invalid_argument("config: classifier layers must be 1, 2 or 4");
  if (permutation_samples < 1) throw std::invalid_argument("config: permutations must be >= 1");
}

RunConfig RunConfig::from_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path.string());
  json j;
  in >> j;
  RunConfig c;
  c.graph_manifest = j.at("graph").get<std::string>();
  if (j.contains("encoder")) c.encoder = parse_encoder(j["encoder"].get<std::string>());
  if (j.contains("depths")) c.depths = j["depths"].get<std::vector<int>>();
  if (j.contains("clf_layers")) c.clf_layers = j["clf_layers"].get<std::vector<int>>();
  if (j.contains("seeds")) c.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
  if (j.contains("train_fraction")) c.train_fraction = j["train_fraction"].get<double>();
  if (j.contains("gamma_quantile")) c.gamma_quantile = j["gamma_quantile"].get<double>();
  if (j.contains("percentile")) c.percentile = j["percentile"].get<double>();
  if (j.contains("permutations")) c.permutation_samples = j["permutations"].get<int>();
  if (j.contains("delta")) c.delta = j["delta"].get<double>();
  if (j.contains("hidden")) c.hidden = j["hidden"].get<int>();
  if (j.contains("epochs")) c.epochs = j["epochs"].get<int>();
  if (j.contains("lr")) c.lr = j["lr"].get<double>();
  if (j.contains("out")) c.output_path = j["out"].get<std::string>();
  c.validate();
  return c;
}

std::string RunConfig::to_json() const {
  json j{{"graph", graph_manifest},
         {"encoder", encoder_name(encoder)},
         {"depths", depths},
         {"clf_layers", clf_layers},
         {"seeds", seeds},
         {"train_fraction", train_fraction},
         {"gamma_quantile", gamma_quantile},
         {"percentile", percentile},
         {"permutations", permutation_samples},
         {"delta", delta},
         {"hidden", hidden},
         {"epochs", epochs},
         {"lr", lr},
         {"out", output_path}};
  return j.dump(2);
}

std::vector<RunRecord> run_experiment(const Graph& g, const RunConfig& config) {
  config.validate();
  const CsrMatrix adj = build_normalized_adjacency(g);
  const SpectralSummary summary = depth_constants(adj, g.features);

  std::vector<RunRecord> records;
  int run_id = 0;
  for (std::uint64_t seed : config.seeds)
    for (int depth : config.depths)
      for (int layers : config.clf_layers) {
        RunRecord rec;
        rec.run_id = run_id++;
        rec.encoder = config.encoder;
        rec.depth = depth;
        rec.clf_layers = layers;
        rec.seed = seed;
        rec.rho_perp = summary.rho_perp;
        rec.c1 = summary.c1;
        rec.c2 = summary.c2;

        const auto start = std::chrono::steady_clock::now();
        try {
          // per-grid-point stream keyed by (depth, layers), so adding a grid
          // point never perturbs other runs; children: 1 split, 2 encoder,
          // 3 classifier, 4 permutations
          const std::uint64_t base =
              derive_seed(seed, static_cast<std::uint64_t>(depth) * 1000 + layers);
          const Split split =
              sample_split(g.num_nodes, config.train_fraction, derive_seed(base, 1));

          Embeddings z;
          if (config.encoder == EncoderKind::Gcn) {
            const GcnModel model = train_gcn(g, adj, split, depth, config.hidden,
                                             config.epochs, config.lr, derive_seed(base, 2));
            z.z = gcn_forward(adj, g.features, model).back();
            z.depth = depth;
            z.kind = EncoderKind::Gcn;
            rec.beta = gcn_beta(model);
          } else {
            z = sgc_embed(adj, g.features,
                          config.encoder == EncoderKind::Raw ? 0 : depth);
            z.kind = config.encoder;
          }

          std::vector<int> y_train;
          for (int i : split.train_indices) y_train.push_back(g.labels[i]);
          Eigen::MatrixXd z_train(split.m, z.z.cols());
          for (int r = 0; r < split.m; ++r) z_train.row(r) = z.z.row(split.train_indices[r]);
          const MlpClassifier f =
              train_classifier(z_train, y_train, g.num_classes, layers, config.hidden,
                               config.epochs, config.lr, derive_seed(base, 3));

          const MarginTable table = margins(f, z, g.labels);
          const double gamma = select_gamma(table, split, config.gamma_quantile);

          BoundReport report = global_bound(g, split, z, f, gamma, config.percentile);
          const std::uint64_t perm_seed = derive_seed(base, 4);
          const BoundReport cw =
              classwise_bound(g, split, z, f, gamma, config.percentile,
                              config.permutation_samples, config.delta, perm_seed);
          const BoundReport cwa =
              classwise_bound_approx(g, split, z, f, gamma, config.percentile,
                                     config.permutation_samples, config.delta, perm_seed);

          report.m_class = cw.m_class;
          report.w_class_expected = cw.w_class_expected;
          report.proportion_term = cw.proportion_term;
          report.eps_delta = cw.eps_delta;
          report.delta = cw.delta;
          report.permutation_samples = cw.permutation_samples;
          report.bound_classwise = cw.bound_classwise;
          report.bound_classwise_approx = cwa.bound_classwise_approx;
          report.vacuous = report.vacuous || cw.vacuous || cwa.vacuous;
          report.degenerate_split_count =
              cw.degenerate_split_count + cwa.degenerate_split_count;
          report.used_entropic_fallback = report.used_entropic_fallback ||
                                          cw.used_entropic_fallback ||
                                          cwa.used_entropic_fallback;
          report.seed = seed;
          rec.report = report;
        } catch (const std::exception& e) {
          rec.failed = true;
          rec.error = e.what();
        }
        rec.wall_time_sec =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        records.push_back(std::move(rec));
      }
  return records;
}

std::optional<double> spearman(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) throw std::invalid_argument("spearman: length mismatch");
  if (xs.size() < 2) throw std::invalid_argument("spearman: need at least two points");
  const auto rx = average_ranks(xs);
  const auto ry = average_ranks(ys);
  const double n = static_cast<double>(xs.size());
  const double mean = (n + 1.0) / 2.0;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (rx[i] - mean) * (ry[i] - mean);
    sxx += (rx[i] - mean) * (rx[i] - mean);
    syy += (ry[i] - mean) * (ry[i] - mean);
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;  // constant input
  return sxy / std::sqrt(sxx * syy);
}

std::optional<double> correlate(const std::vector<RunRecord>& records,
                                const std::string& bound_field, int* excluded) {
  std::vector<double> bounds, gaps;
  int skipped = 0;
  for (const auto& rec : records) {
    if (rec.failed || rec.report.vacuous) {
      ++skipped;
      continue;
    }
    const double v = bound_field_value(rec, bound_field);
    if (!std::isfinite(v) || !std::isfinite(rec.report.empirical_gap)) {
      ++skipped;
      continue;
    }
    bounds.push_back(v);
    gaps.push_back(rec.report.empirical_gap);
  }
  if (excluded) *excluded = skipped;
  if (bounds.size() < 2) throw std::runtime_error("correlate: fewer than two usable records");
  return spearman(bounds, gaps);
}

std::string report_csv_header() {
  return "run_id,encoder,depth,clf_layers,seed,gamma,R_u,R_m_gamma,gap,M_global,W_global,"
         "bound_global,bound_classwise,bound_classwise_approx,eps_delta,proportion_term,"
         "rho_perp,C1,C2,beta,vacuous,degenerate_split_count";
}

std::string report_csv_row(const RunRecord& rec) {
  std::ostringstream os;
  const auto& r = rec.report;
  os << rec.run_id << ',' << encoder_name(rec.encoder) << ',' << rec.depth << ','
     << rec.clf_layers << ',' << rec.seed << ',' << format_double(r.gamma) << ','
     << format_double(r.r_u) << ',' << format_double(r.r_m_gamma) << ','
     << format_double(r.empirical_gap) << ',' << format_double(r.m_global) << ','
     << format_double(r.w_global) << ',' << format_double(r.bound_global) << ','
     << format_double(r.bound_classwise) << ',' << format_double(r.bound_classwise_approx)
     << ',' << format_double(r.eps_delta) << ',' << format_double(r.proportion_term) << ','
     << format_double(rec.rho_perp) << ',' << format_double(rec.c1) << ','
     << format_double(rec.c2) << ',' << format_double(rec.beta) << ','
     << (r.vacuous ? 1 : 0) << ',' << r.degenerate_split_count;
  return os.str();
}

void emit_report(const std::vector<RunRecord>& records, const RunConfig& config,
                 const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("emit_report: cannot write " + path.string());
  out << report_csv_header() << '\n';
  for (const auto& rec : records) {
    if (rec.failed) continue;  // failures live in the sidecar, not the table
    out << report_csv_row(rec) << '\n';
  }

  json sidecar;
  sidecar["config"] = json::parse(config.to_json());
  sidecar["failures"] = json::array();
  for (const auto& rec : records)
    if (rec.failed)
      sidecar["failures"].push_back(
          {{"run_id", rec.run_id}, {"depth", rec.depth}, {"clf_layers", rec.clf_layers},
           {"seed", rec.seed}, {"error", rec.error}});
  std::ofstream side(path.string() + ".config.json");
  side << sidecar.dump(2) << '\n';
}

}  // namespace otb
