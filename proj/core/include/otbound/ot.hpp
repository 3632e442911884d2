#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace otb {

// Optimal coupling between two uniform empirical measures. Masses are exact
// integers after scaling by lcm(a, b): row sums equal scale/a and column
// sums equal scale/b.
struct TransportPlan {
  struct Entry {
    int i;
    int j;
    std::int64_t mass;
  };
  int a = 0;
  int b = 0;
  std::int64_t scale = 0;  // lcm(a, b)
  std::vector<Entry> entries;
  double cost = 0.0;
};

struct ExactResult {
  double cost = 0.0;
  TransportPlan plan;
};

// Exact W1 between uniform empirical measures, solved as min-cost flow on
// the complete bipartite graph (successive shortest paths with potentials;
// shortest-path ties broken by lowest node index). Refuses instances with
// a*b > 20'000'000 arcs unless force is set. Optimality is certified by a
// nonnegative-reduced-cost check over the residual graph.
ExactResult wasserstein1_exact(const Eigen::MatrixXd& points_a, const Eigen::MatrixXd& points_b,
                               bool force = false);

// Closed-form 1-D W1: integral of |F_a^{-1} - F_b^{-1}| over the merged
// quantile grid, computed in exact integer mass units.
double wasserstein1_1d(std::vector<double> values_a, std::vector<double> values_b);

struct SinkhornResult {
  double cost = 0.0;
  bool converged = true;
  int iterations = 0;
};

// Entropic-regularized transport cost (log-domain, no debiasing). Biased
// upward by the entropy term; convergence by marginal sup-norm <= tol.
SinkhornResult wasserstein1_sinkhorn(const Eigen::MatrixXd& points_a,
                                     const Eigen::MatrixXd& points_b, double epsilon,
                                     int max_iters = 10000, double tol = 1e-9);

// Euclidean cost matrix between point rows.
Eigen::MatrixXd pairwise_distances(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

}  // namespace otb
