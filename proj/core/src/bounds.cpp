#include "otbound/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "otbound/rng.hpp"
#include "otbound/util.hpp"

namespace otb {

namespace {

constexpr double kDistanceFloor = 1e-12;
constexpr double kNumeratorFloor = 1e-9;

Eigen::MatrixXd select_rows(const Eigen::MatrixXd& z, const std::vector<int>& idx) {
  Eigen::MatrixXd out(idx.size(), z.cols());
  for (std::size_t r = 0; r < idx.size(); ++r) out.row(r) = z.row(idx[r]);
  return out;
}

// rho_f(z_i, c) for every node, margins evaluated at a single label c.
Eigen::VectorXd margins_at_label(const Eigen::MatrixXd& scores, int c) {
  Eigen::VectorXd out(scores.rows());
  for (int i = 0; i < scores.rows(); ++i) out[i] = margin_of(scores.row(i), c);
  return out;
}

void fill_losses(BoundReport& report, const MarginTable& table, const Split& split,
                 double gamma) {
  report.r_u = zero_one_test_loss(table, split);
  report.r_m_gamma = margin_train_loss(table, split, gamma);
  report.empirical_gap = report.r_u - report.r_m_gamma;
}

struct ClasswiseTerms {
  std::vector<double> w_expected;  // E_pi'[(m_c/m) W_c]
  double proportion = 0.0;
  int degenerate = 0;
  bool entropic = false;
};

// Shared assembly for the oracle and approx variants. For each resampled
// split the caller supplies per-class (train side, test side, m_c, u_c).
struct PerSplitClassSets {
  std::vector<std::vector<int>> train_c;
  std::vector<std::vector<int>> test_c;
  std::vector<int> m_c;
  std::vector<int> u_c;
};

ClasswiseTerms accumulate_classwise(const Eigen::MatrixXd& z,
                                    const std::vector<PerSplitClassSets>& per_split,
                                    int num_classes, int m, int u) {
  ClasswiseTerms t;
  t.w_expected.assign(num_classes, 0.0);
  const double inv_t = 1.0 / static_cast<double>(per_split.size());
  for (const auto& sets : per_split) {
    double prop = 0.0;
    for (int c = 0; c < num_classes; ++c) {
      prop += std::abs(static_cast<double>(sets.u_c[c]) / u -
                       static_cast<double>(sets.m_c[c]) / m);
      if (sets.train_c[c].empty() || sets.test_c[c].empty()) {
        ++t.degenerate;  // term recorded as 0 rather than resampled
        continue;
      }
      bool fb = false;
      const double w = subset_wasserstein(z, sets.train_c[c], sets.test_c[c], &fb);
      t.entropic = t.entropic || fb;
      t.w_expected[c] += inv_t * (static_cast<double>(sets.m_c[c]) / m) * w;
    }
    t.proportion += inv_t * prop;
  }
  return t;
}

}  // namespace

double subset_wasserstein(const Eigen::MatrixXd& z, const std::vector<int>& idx_a,
                          const std::vector<int>& idx_b, bool* entropic_fallback) {
  const Eigen::MatrixXd pa = select_rows(z, idx_a);
  const Eigen::MatrixXd pb = select_rows(z, idx_b);
  if (entropic_fallback) *entropic_fallback = false;
  if (static_cast<std::int64_t>(idx_a.size()) * static_cast<std::int64_t>(idx_b.size()) <=
      20'000'000) {
    return wasserstein1_exact(pa, pb).cost;
  }
  // entropic fallback for oversized instances; epsilon tied to the cost scale
  const double scale = std::max(1e-12, (pa.row(0) - pb.row(0)).norm());
  const auto res = wasserstein1_sinkhorn(pa, pb, 0.01 * scale, 2000, 1e-7);
  if (entropic_fallback) *entropic_fallback = true;
  return res.cost;
}

double margin_change_rate_global(const MarginTable& table, const Embeddings& z,
                                 const Split& split, const std::vector<int>& true_labels,
                                 double percentile) {
  if (percentile <= 0.0 || percentile > 1.0)
    throw std::invalid_argument("margin_change_rate_global: percentile must be in (0, 1]");
  const int k = static_cast<int>(table.scores.cols());

  // margins of every node under every hypothetical label
  Eigen::MatrixXd rho(z.z.rows(), k);
  for (int c = 0; c < k; ++c) rho.col(c) = margins_at_label(table.scores, c);

  const Eigen::MatrixXd dist =
      pairwise_distances(select_rows(z.z, split.train_indices), select_rows(z.z, split.test_indices));

  std::vector<double> rates;
  rates.reserve(static_cast<std::size_t>(split.m) * split.u * k);
  bool vacuous = false;
  for (int ti = 0; ti < split.m; ++ti) {
    const int i = split.train_indices[ti];
    const double rho_i = rho(i, true_labels[i]);
    for (int tj = 0; tj < split.u; ++tj) {
      const int j = split.test_indices[tj];
      const double d = dist(ti, tj);
      for (int y = 0; y < k; ++y) {
        const double num = std::abs(rho_i - rho(j, y));
        if (d <= kDistanceFloor) {
          if (num > kNumeratorFloor) vacuous = true;
          continue;  // coinciding embeddings with equal margins are skipped
        }
        rates.push_back(num / d);
      }
    }
  }
  if (vacuous) return std::numeric_limits<double>::infinity();
  if (rates.empty())
    throw std::runtime_error("margin_change_rate_global: no valid (i, j, y) pair");
  return lower_quantile(std::move(rates), percentile);
}

double margin_change_rate_classwise(const MarginTable& table, const Embeddings& z,
                                    const Split& split, const std::vector<int>& true_labels,
                                    int cls, double percentile) {
  if (percentile <= 0.0 || percentile > 1.0)
    throw std::invalid_argument("margin_change_rate_classwise: percentile must be in (0, 1]");

  std::vector<int> pool;
  for (int i : split.train_indices)
    if (true_labels[i] == cls) pool.push_back(i);
  if (pool.empty())
    throw std::runtime_error("margin_change_rate_classwise: class empty on the train side");
  pool.insert(pool.end(), split.test_indices.begin(), split.test_indices.end());
  if (pool.size() < 2)
    throw std::runtime_error("margin_change_rate_classwise: fewer than two eligible nodes");

  const Eigen::VectorXd rho_c = margins_at_label(table.scores, cls);
  const Eigen::MatrixXd pts = select_rows(z.z, pool);
  const Eigen::MatrixXd dist = pairwise_distances(pts, pts);

  std::vector<double> rates;
  rates.reserve(pool.size() * (pool.size() - 1) / 2);
  for (std::size_t p = 0; p < pool.size(); ++p)
    for (std::size_t q = p + 1; q < pool.size(); ++q) {
      const double d = dist(p, q);
      if (d <= kDistanceFloor) continue;  // same embedding, same label: numerator is 0
      rates.push_back(std::abs(rho_c[pool[p]] - rho_c[pool[q]]) / d);
    }
  if (rates.empty()) return 0.0;  // all pairs coincide; the class is a Dirac
  return lower_quantile(std::move(rates), percentile);
}

double epsilon_delta(int m, int u, double delta) {
  if (m < 1 || u < 1) throw std::invalid_argument("epsilon_delta: m, u must be >= 1");
  if (delta <= 0.0 || delta >= 1.0)
    throw std::invalid_argument("epsilon_delta: delta must be in (0, 1)");
  const double beta = 1.0 / m + 1.0 / u;
  const double mu = static_cast<double>(m) * u;
  const double denom = 2.0 * (m + u - 0.5);
  const double correction = 1.0 / (1.0 - 1.0 / (2.0 * std::max(m, u)));
  return std::sqrt(mu * beta * beta / denom * correction * std::log(1.0 / delta));
}

double proportion_mismatch(const std::vector<int>& labels, int num_classes, int n,
                           double train_fraction, int num_samples, std::uint64_t seed) {
  if (num_samples < 1) throw std::invalid_argument("proportion_mismatch: T must be >= 1");
  double acc = 0.0;
  for (int t = 0; t < num_samples; ++t) {
    const Split pi = sample_split(n, train_fraction, derive_seed(seed, t));
    const auto view = class_split_view(pi, labels, num_classes);
    double term = 0.0;
    for (int c = 0; c < num_classes; ++c)
      term += std::abs(static_cast<double>(view.u_c[c]) / pi.u -
                       static_cast<double>(view.m_c[c]) / pi.m);
    acc += term;
  }
  return acc / num_samples;
}

BoundReport global_bound(const Graph& g, const Split& split, const Embeddings& z,
                         const MlpClassifier& f, double gamma, double percentile) {
  if (gamma <= 0.0) throw std::invalid_argument("global_bound: gamma must be positive");
  BoundReport report;
  report.gamma = gamma;
  report.percentile = percentile;

  const MarginTable table = margins(f, z, g.labels);
  fill_losses(report, table, split, gamma);

  report.m_global = margin_change_rate_global(table, z, split, g.labels, percentile);
  report.vacuous = std::isinf(report.m_global);

  bool fb = false;
  report.w_global = subset_wasserstein(z.z, split.train_indices, split.test_indices, &fb);
  report.used_entropic_fallback = fb;
  // inf * 0 would read as NaN when the train/test clouds coincide exactly
  report.bound_global = report.vacuous ? std::numeric_limits<double>::infinity()
                                       : report.m_global / gamma * report.w_global;
  return report;
}

BoundReport classwise_bound_with_splits(const Graph& g, const Split& split, const Embeddings& z,
                                        const MlpClassifier& f, double gamma, double percentile,
                                        const std::vector<Split>& resampled, double delta) {
  if (gamma <= 0.0) throw std::invalid_argument("classwise_bound: gamma must be positive");
  if (resampled.empty()) throw std::invalid_argument("classwise_bound: no resampled splits");

  BoundReport report;
  report.gamma = gamma;
  report.percentile = percentile;
  report.delta = delta;
  report.permutation_samples = static_cast<int>(resampled.size());

  const MarginTable table = margins(f, z, g.labels);
  fill_losses(report, table, split, gamma);

  // M_c is evaluated on the original split, not the resampled ones
  report.m_class.resize(g.num_classes);
  for (int c = 0; c < g.num_classes; ++c)
    report.m_class[c] = margin_change_rate_classwise(table, z, split, g.labels, c, percentile);

  std::vector<PerSplitClassSets> per_split;
  for (const auto& pi : resampled) {
    const auto view = class_split_view(pi, g.labels, g.num_classes);
    per_split.push_back({view.train_by_class, view.test_by_class, view.m_c, view.u_c});
  }
  const auto terms = accumulate_classwise(z.z, per_split, g.num_classes, split.m, split.u);

  report.w_class_expected = terms.w_expected;
  report.proportion_term = terms.proportion;
  report.degenerate_split_count = terms.degenerate;
  report.used_entropic_fallback = terms.entropic;
  report.eps_delta = epsilon_delta(split.m, split.u, delta);

  double sum = 0.0;
  for (int c = 0; c < g.num_classes; ++c) sum += report.m_class[c] / gamma * terms.w_expected[c];
  report.bound_classwise = sum + report.proportion_term + report.eps_delta;
  report.vacuous = std::any_of(report.m_class.begin(), report.m_class.end(),
                               [](double v) { return std::isinf(v); });
  return report;
}

BoundReport classwise_bound(const Graph& g, const Split& split, const Embeddings& z,
                            const MlpClassifier& f, double gamma, double percentile,
                            int num_samples, double delta, std::uint64_t seed) {
  if (num_samples < 1) throw std::invalid_argument("classwise_bound: T must be >= 1");
  const double fraction = static_cast<double>(split.m) / g.num_nodes;
  std::vector<Split> resampled;
  for (int t = 0; t < num_samples; ++t)
    resampled.push_back(sample_split(g.num_nodes, fraction, derive_seed(seed, t)));
  BoundReport report =
      classwise_bound_with_splits(g, split, z, f, gamma, percentile, resampled, delta);
  report.seed = seed;
  return report;
}

BoundReport classwise_bound_approx(const Graph& g, const Split& split, const Embeddings& z,
                                   const MlpClassifier& f, double gamma, double percentile,
                                   int num_samples, double delta, std::uint64_t seed) {
  if (gamma <= 0.0) throw std::invalid_argument("classwise_bound_approx: gamma must be positive");
  if (num_samples < 1) throw std::invalid_argument("classwise_bound_approx: T must be >= 1");

  BoundReport report;
  report.gamma = gamma;
  report.percentile = percentile;
  report.delta = delta;
  report.permutation_samples = num_samples;
  report.seed = seed;

  // Train labels only: the score matrix needs no labels and the class pools
  // need test membership, never test labels. R_u / R_m / gap are left NaN
  // here; callers that hold ground truth fill them in (see run_experiment).
  MarginTable table;
  table.scores = f.scores(z.z);
  report.r_u = std::numeric_limits<double>::quiet_NaN();
  report.r_m_gamma = std::numeric_limits<double>::quiet_NaN();
  report.empirical_gap = std::numeric_limits<double>::quiet_NaN();

  // original train indices per class, from training labels
  std::vector<std::vector<int>> train_c(g.num_classes);
  for (int i : split.train_indices) train_c[g.labels[i]].push_back(i);

  // M_c: train-class-c union test; needs test membership, not test labels
  report.m_class.resize(g.num_classes);
  for (int c = 0; c < g.num_classes; ++c)
    report.m_class[c] = margin_change_rate_classwise(table, z, split, g.labels, c, percentile);

  const double fraction = static_cast<double>(split.m) / g.num_nodes;
  std::vector<PerSplitClassSets> per_split;
  for (int t = 0; t < num_samples; ++t) {
    const Split pi = sample_split(g.num_nodes, fraction, derive_seed(seed, t));
    std::vector<char> in_train(g.num_nodes, 0);
    for (int i : pi.train_indices) in_train[i] = 1;

    PerSplitClassSets sets;
    sets.train_c.resize(g.num_classes);
    sets.test_c.resize(g.num_classes);
    sets.m_c.assign(g.num_classes, 0);
    sets.u_c.assign(g.num_classes, 0);
    for (int c = 0; c < g.num_classes; ++c)
      for (int i : train_c[c]) {
        if (in_train[i]) {
          sets.train_c[c].push_back(i);
          ++sets.m_c[c];
        } else {
          sets.test_c[c].push_back(i);
          ++sets.u_c[c];
        }
      }
    per_split.push_back(std::move(sets));
  }

  const auto terms = accumulate_classwise(z.z, per_split, g.num_classes, split.m, split.u);
  report.w_class_expected = terms.w_expected;
  report.proportion_term = terms.proportion;
  report.degenerate_split_count = terms.degenerate;
  report.used_entropic_fallback = terms.entropic;
  report.eps_delta = epsilon_delta(split.m, split.u, delta);

  double sum = 0.0;
  for (int c = 0; c < g.num_classes; ++c) sum += report.m_class[c] / gamma * terms.w_expected[c];
  report.bound_classwise_approx = sum + report.proportion_term + report.eps_delta;
  report.vacuous = std::any_of(report.m_class.begin(), report.m_class.end(),
                               [](double v) { return std::isinf(v); });
  return report;
}

}  // namespace otb
