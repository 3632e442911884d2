#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "otbound/classifier.hpp"
#include "otbound/encoders.hpp"
#include "otbound/graph.hpp"
#include "otbound/ot.hpp"
#include "otbound/split.hpp"

namespace otb {

// Everything that enters the two bound formulas, plus the empirical losses
// they are compared against.
struct BoundReport {
  double gamma = 0.0;
  double percentile = 1.0;

  double m_global = 0.0;
  double w_global = 0.0;
  double bound_global = std::numeric_limits<double>::quiet_NaN();

  std::vector<double> m_class;            // M_c on the original split
  std::vector<double> w_class_expected;   // E_pi'[(m_c/m) W_c] per class
  double proportion_term = 0.0;
  double eps_delta = 0.0;
  double delta = 0.05;
  int permutation_samples = 0;  // T
  double bound_classwise = std::numeric_limits<double>::quiet_NaN();
  double bound_classwise_approx = std::numeric_limits<double>::quiet_NaN();

  double r_u = 0.0;        // zero-one test loss
  double r_m_gamma = 0.0;  // gamma-margin train loss
  double empirical_gap = 0.0;

  bool vacuous = false;                // some M is +inf
  int degenerate_split_count = 0;      // (c, pi') terms with an empty side
  bool used_entropic_fallback = false;
  std::uint64_t seed = 0;
};

// W1 between embedding rows selected by the two index sets, routed to the
// entropic approximation when the exact solver's size guard trips.
double subset_wasserstein(const Eigen::MatrixXd& z, const std::vector<int>& idx_a,
                          const std::vector<int>& idx_b, bool* entropic_fallback = nullptr);

// Percentile-p value (pinned quantile rule; p = 1 is the true maximum) of
// |rho_f(z_i, y_i) - rho_f(z_j, y)| / ||z_i - z_j|| over i in train,
// j in test, y in [0, K). Returns +inf when embeddings coincide with
// differing margins (the vacuous case).
double margin_change_rate_global(const MarginTable& table, const Embeddings& z,
                                 const Split& split, const std::vector<int>& true_labels,
                                 double percentile);

// Same ratio with both margins at label c, over unordered pairs drawn from
// train-class-c union test. Zero-distance pairs are skipped (numerator is 0).
double margin_change_rate_classwise(const MarginTable& table, const Embeddings& z,
                                    const Split& split, const std::vector<int>& true_labels,
                                    int cls, double percentile);

// sqrt( m*u*beta^2 / (2(m+u-1/2)) * (1 - 1/(2 max(m,u)))^{-1} * ln(1/delta) )
// with beta = 1/m + 1/u.
double epsilon_delta(int m, int u, double delta);

// Average over T seeded fresh splits of sum_c |u_c/u - m_c/m|.
double proportion_mismatch(const std::vector<int>& labels, int num_classes, int n,
                           double train_fraction, int num_samples, std::uint64_t seed);

// (M/gamma) * W1(train embeddings, test embeddings), plus empirical losses.
BoundReport global_bound(const Graph& g, const Split& split, const Embeddings& z,
                         const MlpClassifier& f, double gamma, double percentile);

// Class-wise bound evaluated over an explicit list of resampled splits
// (exposed so tests can pass the exhaustive enumeration).
BoundReport classwise_bound_with_splits(const Graph& g, const Split& split, const Embeddings& z,
                                        const MlpClassifier& f, double gamma, double percentile,
                                        const std::vector<Split>& resampled, double delta);

// Oracle class-wise bound: T fresh seeded splits, ground-truth
// labels on both sides (oracle variant).
BoundReport classwise_bound(const Graph& g, const Split& split, const Embeddings& z,
                            const MlpClassifier& f, double gamma, double percentile,
                            int num_samples, double delta, std::uint64_t seed);

// Train-label-only estimator: resampled splits are intersected with the
// original training set and class membership comes from training labels
// alone. Never reads a test label.
BoundReport classwise_bound_approx(const Graph& g, const Split& split, const Embeddings& z,
                                   const MlpClassifier& f, double gamma, double percentile,
                                   int num_samples, double delta, std::uint64_t seed);

}  // namespace otb
