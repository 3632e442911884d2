// Command-line driver: bound evaluation, depth sweeps, rank correlation,
// synthetic dataset generation and standalone OT checks.

#include <CLI11.hpp>
#include <Eigen/Dense>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "otbound/bounds.hpp"
#include "otbound/harness.hpp"
#include "otbound/loader.hpp"
#include "otbound/rng.hpp"
#include "otbound/sbm.hpp"
#include "otbound/sparse.hpp"
#include "otbound/spectral.hpp"
#include "otbound/util.hpp"

namespace {

using nlohmann::json;

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(std::stoi(tok));
  return out;
}

Eigen::MatrixXd read_points_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) row.push_back(std::stod(tok));
    if (!rows.empty() && row.size() != rows.front().size())
      throw std::runtime_error(path + ": inconsistent row width");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error(path + ": no points");
  Eigen::MatrixXd m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows.front().size(); ++j) m(i, j) = rows[i][j];
  return m;
}

json report_to_json(const otb::BoundReport& r) {
  json j;
  j["gamma"] = r.gamma;
  j["percentile"] = r.percentile;
  j["M_global"] = r.m_global;
  j["W_global"] = r.w_global;
  j["bound_global"] = r.bound_global;
  j["M_class"] = r.m_class;
  j["W_class_expected"] = r.w_class_expected;
  j["proportion_term"] = r.proportion_term;
  j["eps_delta"] = r.eps_delta;
  j["delta"] = r.delta;
  j["T"] = r.permutation_samples;
  j["bound_classwise"] = r.bound_classwise;
  j["bound_classwise_approx"] = r.bound_classwise_approx;
  j["R_u"] = r.r_u;
  j["R_m_gamma"] = r.r_m_gamma;
  j["empirical_gap"] = r.empirical_gap;
  j["vacuous"] = r.vacuous;
  j["degenerate_split_count"] = r.degenerate_split_count;
  j["used_entropic_fallback"] = r.used_entropic_fallback;
  j["seed"] = r.seed;
  return j;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  CsvTable t;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) cells.push_back(tok);
    if (first) {
      t.header = cells;
      first = false;
    } else {
      t.rows.push_back(cells);
    }
  }
  return t;
}

int run_bound(const std::string& graph_path, const std::string& encoder, int depth,
              int clf_layers, double gamma_quantile, double percentile, int permutations,
              double delta, std::uint64_t seed, bool oracle_labels, double train_fraction,
              int hidden, int epochs, double lr, const std::string& out_path) {
  const otb::Graph g = otb::load_graph(graph_path);
  const otb::CsrMatrix adj = otb::build_normalized_adjacency(g);
  const otb::EncoderKind kind = otb::parse_encoder(encoder);

  const std::uint64_t base =
      otb::derive_seed(seed, static_cast<std::uint64_t>(depth) * 1000 + clf_layers);
  const otb::Split split =
      otb::sample_split(g.num_nodes, train_fraction, otb::derive_seed(base, 1));

  otb::Embeddings z;
  double beta = 1.0;
  if (kind == otb::EncoderKind::Gcn) {
    const otb::GcnModel model =
        otb::train_gcn(g, adj, split, depth, hidden, epochs, lr, otb::derive_seed(base, 2));
    z.z = otb::gcn_forward(adj, g.features, model).back();
    z.depth = depth;
    z.kind = kind;
    beta = otb::gcn_beta(model);
  } else {
    z = otb::sgc_embed(adj, g.features, kind == otb::EncoderKind::Raw ? 0 : depth);
    z.kind = kind;
  }

  std::vector<int> y_train;
  for (int i : split.train_indices) y_train.push_back(g.labels[i]);
  Eigen::MatrixXd z_train(split.m, z.z.cols());
  for (int r = 0; r < split.m; ++r) z_train.row(r) = z.z.row(split.train_indices[r]);
  const otb::MlpClassifier f = otb::train_classifier(
      z_train, y_train, g.num_classes, clf_layers, hidden, epochs, lr, otb::derive_seed(base, 3));

  const otb::MarginTable table = otb::margins(f, z, g.labels);
  const double gamma = otb::select_gamma(table, split, gamma_quantile);

  otb::BoundReport report = otb::global_bound(g, split, z, f, gamma, percentile);
  const std::uint64_t perm_seed = otb::derive_seed(base, 4);
  if (oracle_labels) {
    const otb::BoundReport cw = otb::classwise_bound(g, split, z, f, gamma, percentile,
                                                     permutations, delta, perm_seed);
    report.m_class = cw.m_class;
    report.w_class_expected = cw.w_class_expected;
    report.proportion_term = cw.proportion_term;
    report.eps_delta = cw.eps_delta;
    report.permutation_samples = cw.permutation_samples;
    report.bound_classwise = cw.bound_classwise;
    report.degenerate_split_count += cw.degenerate_split_count;
    report.vacuous = report.vacuous || cw.vacuous;
  }
  const otb::BoundReport cwa = otb::classwise_bound_approx(g, split, z, f, gamma, percentile,
                                                           permutations, delta, perm_seed);
  report.bound_classwise_approx = cwa.bound_classwise_approx;
  if (!oracle_labels) {
    report.m_class = cwa.m_class;
    report.w_class_expected = cwa.w_class_expected;
    report.proportion_term = cwa.proportion_term;
    report.eps_delta = cwa.eps_delta;
    report.permutation_samples = cwa.permutation_samples;
  }
  report.degenerate_split_count += cwa.degenerate_split_count;
  report.vacuous = report.vacuous || cwa.vacuous;
  report.delta = delta;
  report.seed = seed;

  json j = report_to_json(report);
  j["encoder"] = encoder;
  j["depth"] = depth;
  j["clf_layers"] = clf_layers;
  j["beta"] = beta;
  j["oracle_labels"] = oracle_labels;
  const std::string text = j.dump(2);
  if (out_path.empty()) {
    std::cout << text << '\n';
  } else {
    std::ofstream out(out_path);
    out << text << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal-transport transductive generalization bounds for graph node "
               "classification"};
  app.require_subcommand(1);

  // bound
  auto* bound = app.add_subcommand("bound", "Evaluate all bounds for one configuration");
  std::string graph_path, encoder = "sgc", out_path, oracle = "on";
  int depth = 2, clf_layers = 1, permutations = 4, hidden = 64, epochs = 500;
  double gamma_quantile = 0.5, percentile = 0.9, delta = 0.05, train_fraction = 0.3, lr = 0.01;
  std::uint64_t seed = 0;
  bound->add_option("--graph", graph_path, "dataset manifest")->required();
  bound->add_option("--encoder", encoder, "sgc|gcn|raw");
  bound->add_option("--depth", depth);
  bound->add_option("--clf-layers", clf_layers)->check(CLI::IsMember({1, 2, 4}));
  bound->add_option("--gamma-quantile", gamma_quantile);
  bound->add_option("--percentile", percentile);
  bound->add_option("--permutations", permutations);
  bound->add_option("--delta", delta);
  bound->add_option("--seed", seed);
  bound->add_option("--oracle-labels", oracle, "on|off")->check(CLI::IsMember({"on", "off"}));
  bound->add_option("--train-fraction", train_fraction);
  bound->add_option("--hidden", hidden);
  bound->add_option("--epochs", epochs);
  bound->add_option("--lr", lr);
  bound->add_option("--out", out_path, "report JSON path (stdout when omitted)");

  // depth-sweep
  auto* sweep = app.add_subcommand("depth-sweep", "Wasserstein diagnostics across depths");
  std::string sweep_graph, sweep_encoder = "sgc", sweep_depths = "1,2,4,8,16,32", sweep_out;
  std::uint64_t sweep_seed = 0;
  int sweep_t = 4;
  double sweep_fraction = 0.3;
  sweep->add_option("--graph", sweep_graph)->required();
  sweep->add_option("--encoder", sweep_encoder, "sgc|gcn|raw");
  sweep->add_option("--depths", sweep_depths, "comma-separated depth list");
  sweep->add_option("--seed", sweep_seed);
  sweep->add_option("--permutations", sweep_t);
  sweep->add_option("--train-fraction", sweep_fraction);
  sweep->add_option("--out", sweep_out, "CSV path (stdout when omitted)")->required();

  // correlate
  auto* corr = app.add_subcommand("correlate", "Spearman rho of bound columns vs the gap");
  std::string records_path, field;
  corr->add_option("--records", records_path, "records CSV from 'run'")->required();
  corr->add_option("--field", field, "single bound column (default: all)");

  // gen-sbm
  auto* gen = app.add_subcommand("gen-sbm", "Write a synthetic SBM dataset");
  std::string blocks_str = "50,50", out_dir, name = "sbm";
  double p_in = 0.5, p_out = 0.05, feature_shift = 1.0;
  int feature_dim = 8;
  std::uint64_t gen_seed = 0;
  gen->add_option("--blocks", blocks_str, "comma-separated block sizes");
  gen->add_option("--p-in", p_in);
  gen->add_option("--p-out", p_out);
  gen->add_option("--feature-dim", feature_dim);
  gen->add_option("--feature-shift", feature_shift);
  gen->add_option("--seed", gen_seed);
  gen->add_option("--name", name);
  gen->add_option("--out", out_dir, "output directory")->required();

  // ot-check
  auto* otc = app.add_subcommand("ot-check", "Exact W1 between two point-cloud CSVs");
  std::string pa_path, pb_path, plan_path;
  bool otc_force = false;
  double otc_sinkhorn_eps = 0.0;
  otc->add_option("a", pa_path, "first point cloud CSV")->required();
  otc->add_option("b", pb_path, "second point cloud CSV")->required();
  otc->add_option("--plan", plan_path, "write the plan as (i, j, mass) CSV");
  otc->add_flag("--force", otc_force, "override the exact-solver size guard");
  otc->add_option("--sinkhorn", otc_sinkhorn_eps, "use the entropic path with this epsilon");

  // run
  auto* run = app.add_subcommand("run", "Run an experiment matrix from a JSON config");
  std::string config_path, run_out;
  run->add_option("--config", config_path, "RunConfig JSON")->required();
  run->add_option("--out", run_out, "records CSV path (overrides config)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (bound->parsed()) {
      return run_bound(graph_path, encoder, depth, clf_layers, gamma_quantile, percentile,
                       permutations, delta, seed, oracle == "on", train_fraction, hidden,
                       epochs, lr, out_path);
    }
    if (sweep->parsed()) {
      const otb::Graph g = otb::load_graph(sweep_graph);
      const otb::CsrMatrix adj = otb::build_normalized_adjacency(g);
      const otb::Split split =
          otb::sample_split(g.num_nodes, sweep_fraction, otb::derive_seed(sweep_seed, 1));
      const auto diag =
          otb::depth_diagnostics(g, adj, otb::parse_encoder(sweep_encoder),
                                 parse_int_list(sweep_depths), split, sweep_t, sweep_seed);
      std::ofstream out(sweep_out);
      if (!out) throw std::runtime_error("cannot write " + sweep_out);
      out << "depth,W_G,W_C,W_S,envelope_" << sweep_encoder << ",rho_perp,C1,C2,beta\n";
      for (const auto& row : diag.rows)
        out << row.depth << ',' << otb::format_double(row.w_g) << ','
            << otb::format_double(row.w_c) << ',' << otb::format_double(row.w_s) << ','
            << otb::format_double(row.envelope) << ','
            << otb::format_double(diag.summary.rho_perp) << ','
            << otb::format_double(diag.summary.c1) << ','
            << otb::format_double(diag.summary.c2) << ',' << otb::format_double(row.beta)
            << '\n';
      return 0;
    }
    if (corr->parsed()) {
      const CsvTable t = read_csv(records_path);
      auto col = [&](const std::string& name) {
        for (std::size_t i = 0; i < t.header.size(); ++i)
          if (t.header[i] == name) return i;
        throw std::runtime_error("column not found: " + name);
      };
      const std::size_t gap_col = col("gap");
      const std::size_t vac_col = col("vacuous");
      const std::vector<std::string> fields =
          field.empty()
              ? std::vector<std::string>{"bound_global", "bound_classwise",
                                         "bound_classwise_approx"}
              : std::vector<std::string>{field};
      for (const auto& fname : fields) {
        const std::size_t c = col(fname);
        std::vector<double> xs, ys;
        int excluded = 0;
        for (const auto& row : t.rows) {
          if (row[vac_col] != "0") {
            ++excluded;
            continue;
          }
          const double x = std::stod(row[c]);
          const double y = std::stod(row[gap_col]);
          if (!std::isfinite(x) || !std::isfinite(y)) {
            ++excluded;
            continue;
          }
          xs.push_back(x);
          ys.push_back(y);
        }
        if (xs.size() < 2) throw std::runtime_error("correlate: fewer than two usable records");
        const auto rho = otb::spearman(xs, ys);
        std::cout << fname << " rho="
                  << (rho ? otb::format_double(*rho) : std::string("undefined"))
                  << " n=" << xs.size() << " excluded=" << excluded << '\n';
      }
      return 0;
    }
    if (gen->parsed()) {
      const otb::Graph g = otb::generate_sbm(parse_int_list(blocks_str), p_in, p_out,
                                             feature_dim, feature_shift, gen_seed);
      otb::save_graph(g, out_dir, name);
      std::cout << "wrote " << out_dir << "/" << name << "_manifest.json (N=" << g.num_nodes
                << ", |E|=" << g.edges.size() << ")\n";
      return 0;
    }
    if (otc->parsed()) {
      const Eigen::MatrixXd pa = read_points_csv(pa_path);
      const Eigen::MatrixXd pb = read_points_csv(pb_path);
      if (otc_sinkhorn_eps > 0.0) {
        const auto res = otb::wasserstein1_sinkhorn(pa, pb, otc_sinkhorn_eps);
        std::cout << "cost=" << otb::format_double(res.cost)
                  << (res.converged ? "" : " (not converged)") << '\n';
        return 0;
      }
      const auto res = otb::wasserstein1_exact(pa, pb, otc_force);
      std::cout << "cost=" << otb::format_double(res.cost) << '\n';
      if (!plan_path.empty()) {
        std::ofstream out(plan_path);
        out << "i,j,mass\n";
        for (const auto& e : res.plan.entries)
          out << e.i << ',' << e.j << ','
              << otb::format_double(static_cast<double>(e.mass) / res.plan.scale) << '\n';
      }
      return 0;
    }
    if (run->parsed()) {
      otb::RunConfig config = otb::RunConfig::from_json_file(config_path);
      if (!run_out.empty()) config.output_path = run_out;
      if (config.output_path.empty())
        throw std::runtime_error("run: no output path (config 'out' or --out)");
      const otb::Graph g = otb::load_graph(config.graph_manifest);
      const auto records = otb::run_experiment(g, config);
      otb::emit_report(records, config, config.output_path);
      int failed = 0;
      for (const auto& r : records) failed += r.failed ? 1 : 0;
      std::cout << "wrote " << config.output_path << " (" << records.size() << " records, "
                << failed << " failed)\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
