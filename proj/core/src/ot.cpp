#include "otbound/ot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <stdexcept>

namespace otb {

namespace {

constexpr std::int64_t kArcGuard = 20'000'000;
constexpr double kCostSlack = 1e-12;

std::int64_t checked_lcm(std::int64_t a, std::int64_t b) {
  const std::int64_t g = std::gcd(a, b);
  const __int128 l = static_cast<__int128>(a / g) * b;
  if (l > std::numeric_limits<std::int64_t>::max())
    throw std::runtime_error(
        "wasserstein1_exact: lcm(a, b) overflows; use the entropic path instead");
  return static_cast<std::int64_t>(l);
}

}  // namespace

Eigen::MatrixXd pairwise_distances(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.cols() != b.cols()) throw std::invalid_argument("pairwise_distances: dimension mismatch");
  const Eigen::VectorXd a2 = a.rowwise().squaredNorm();
  const Eigen::VectorXd b2 = b.rowwise().squaredNorm();
  Eigen::MatrixXd d2 = (-2.0 * a * b.transpose());
  d2.colwise() += a2;
  d2.rowwise() += b2.transpose();
  return d2.cwiseMax(0.0).cwiseSqrt();
}

ExactResult wasserstein1_exact(const Eigen::MatrixXd& points_a, const Eigen::MatrixXd& points_b,
                               bool force) {
  const int a = static_cast<int>(points_a.rows());
  const int b = static_cast<int>(points_b.rows());
  if (a == 0 || b == 0) throw std::invalid_argument("wasserstein1_exact: empty point set");
  if (points_a.cols() != points_b.cols())
    throw std::invalid_argument("wasserstein1_exact: dimension mismatch");
  if (static_cast<std::int64_t>(a) * b > kArcGuard && !force)
    throw std::runtime_error(
        "wasserstein1_exact: instance exceeds the arc guard (a*b > 2e7); "
        "use wasserstein1_sinkhorn or pass force");

  const std::int64_t scale = checked_lcm(a, b);
  const std::int64_t supply = scale / a;
  const std::int64_t demand = scale / b;
  const Eigen::MatrixXd cost = pairwise_distances(points_a, points_b);

  const int num_nodes = a + b;  // sources 0..a-1, sinks a..a+b-1
  std::vector<std::int64_t> rs(a, supply), rd(b, demand);
  std::vector<std::int64_t> flow(static_cast<std::size_t>(a) * b, 0);
  std::vector<double> pot(num_nodes, 0.0);

  // per-sink list of sources with positive flow (residual backward arcs)
  std::vector<std::vector<int>> back(b);

  std::vector<double> dist(num_nodes);
  std::vector<int> parent(num_nodes);  // predecessor node on the shortest path
  std::vector<char> settled(num_nodes);

  std::int64_t remaining = static_cast<std::int64_t>(a) * supply;
  using HeapItem = std::pair<double, int>;

  while (remaining > 0) {
    std::fill(dist.begin(), dist.end(), std::numeric_limits<double>::infinity());
    std::fill(parent.begin(), parent.end(), -1);
    std::fill(settled.begin(), settled.end(), 0);
    std::priority_queue<HeapItem, std::vector<HeapItem>, std::greater<>> heap;
    for (int i = 0; i < a; ++i)
      if (rs[i] > 0) {
        dist[i] = 0.0;
        heap.emplace(0.0, i);
      }

    int target = -1;
    while (!heap.empty()) {
      const auto [d, v] = heap.top();
      heap.pop();
      if (settled[v] || d > dist[v]) continue;
      settled[v] = 1;
      if (v >= a && rd[v - a] > 0) {
        target = v;
        break;
      }
      if (v < a) {
        const int i = v;
        for (int j = 0; j < b; ++j) {
          const double rc = std::max(0.0, cost(i, j) + pot[i] - pot[a + j]);
          const double nd = d + rc;
          if (nd < dist[a + j] - kCostSlack) {
            dist[a + j] = nd;
            parent[a + j] = i;
            heap.emplace(nd, a + j);
          }
        }
      } else {
        const int j = v - a;
        for (int i : back[j]) {
          if (flow[static_cast<std::size_t>(i) * b + j] <= 0) continue;
          const double rc = std::max(0.0, -cost(i, j) + pot[a + j] - pot[i]);
          const double nd = d + rc;
          if (nd < dist[i] - kCostSlack) {
            dist[i] = nd;
            parent[i] = a + j;
            heap.emplace(nd, i);
          }
        }
      }
    }
    if (target == -1)
      throw std::logic_error("wasserstein1_exact: no augmenting path (unbalanced instance)");

    const double dt = dist[target];
    for (int v = 0; v < num_nodes; ++v) pot[v] += std::min(dist[v], dt);

    // walk back to the path's source, collecting the bottleneck
    std::int64_t bottleneck = rd[target - a];
    for (int v = target; parent[v] != -1; v = parent[v]) {
      const int pv = parent[v];
      if (pv >= a) {  // backward arc v(source) <- pv(sink): limited by flow(v, pv - a)
        bottleneck = std::min(bottleneck, flow[static_cast<std::size_t>(v) * b + (pv - a)]);
      }
    }
    int path_source = target;
    while (parent[path_source] != -1) path_source = parent[path_source];
    bottleneck = std::min(bottleneck, rs[path_source]);

    for (int v = target; parent[v] != -1; v = parent[v]) {
      const int pv = parent[v];
      if (pv < a) {  // forward arc pv(source) -> v(sink)
        auto& fl = flow[static_cast<std::size_t>(pv) * b + (v - a)];
        if (fl == 0) back[v - a].push_back(pv);
        fl += bottleneck;
      } else {  // backward arc along (v(source) -> pv(sink))
        flow[static_cast<std::size_t>(v) * b + (pv - a)] -= bottleneck;
      }
    }
    rs[path_source] -= bottleneck;
    rd[target - a] -= bottleneck;
    remaining -= bottleneck;
  }

  // optimality certificate: no residual arc has negative reduced cost
  const double slack = 1e-9 * (1.0 + cost.maxCoeff());
  for (int i = 0; i < a; ++i)
    for (int j = 0; j < b; ++j) {
      const double rc = cost(i, j) + pot[i] - pot[a + j];
      if (rc < -slack)
        throw std::logic_error("wasserstein1_exact: optimality certificate failed");
      if (flow[static_cast<std::size_t>(i) * b + j] > 0 && rc > slack)
        throw std::logic_error("wasserstein1_exact: complementary slackness failed");
    }

  ExactResult res;
  res.plan.a = a;
  res.plan.b = b;
  res.plan.scale = scale;
  double total = 0.0;
  for (int i = 0; i < a; ++i)
    for (int j = 0; j < b; ++j) {
      const std::int64_t f = flow[static_cast<std::size_t>(i) * b + j];
      if (f > 0) {
        res.plan.entries.push_back({i, j, f});
        total += static_cast<double>(f) / static_cast<double>(scale) * cost(i, j);
      }
    }
  res.cost = total;
  res.plan.cost = total;
  return res;
}

double wasserstein1_1d(std::vector<double> values_a, std::vector<double> values_b) {
  if (values_a.empty() || values_b.empty())
    throw std::invalid_argument("wasserstein1_1d: empty input");
  std::sort(values_a.begin(), values_a.end());
  std::sort(values_b.begin(), values_b.end());
  const std::int64_t a = static_cast<std::int64_t>(values_a.size());
  const std::int64_t b = static_cast<std::int64_t>(values_b.size());
  // mass units of 1/(a*b): each a-point carries b units, each b-point a units
  std::size_t ia = 0, ib = 0;
  std::int64_t rem_a = b, rem_b = a;
  double total = 0.0;
  while (ia < values_a.size() && ib < values_b.size()) {
    const std::int64_t m = std::min(rem_a, rem_b);
    total += static_cast<double>(m) * std::abs(values_a[ia] - values_b[ib]);
    rem_a -= m;
    rem_b -= m;
    if (rem_a == 0) {
      rem_a = b;
      ++ia;
    }
    if (rem_b == 0) {
      rem_b = a;
      ++ib;
    }
  }
  return total / (static_cast<double>(a) * static_cast<double>(b));
}

SinkhornResult wasserstein1_sinkhorn(const Eigen::MatrixXd& points_a,
                                     const Eigen::MatrixXd& points_b, double epsilon,
                                     int max_iters, double tol) {
  const int a = static_cast<int>(points_a.rows());
  const int b = static_cast<int>(points_b.rows());
  if (a == 0 || b == 0) throw std::invalid_argument("wasserstein1_sinkhorn: empty point set");
  if (points_a.cols() != points_b.cols())
    throw std::invalid_argument("wasserstein1_sinkhorn: dimension mismatch");
  if (epsilon <= 0.0) throw std::invalid_argument("wasserstein1_sinkhorn: epsilon must be > 0");

  const Eigen::MatrixXd cost = pairwise_distances(points_a, points_b);
  const double log_mu = -std::log(static_cast<double>(a));
  const double log_nu = -std::log(static_cast<double>(b));

  Eigen::VectorXd f = Eigen::VectorXd::Zero(a);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(b);

  auto logsumexp_rows = [](const Eigen::MatrixXd& m) -> Eigen::VectorXd {
    const Eigen::VectorXd mx = m.rowwise().maxCoeff();
    return mx.array() + ((m.colwise() - mx).array().exp().rowwise().sum()).log();
  };

  SinkhornResult res;
  res.converged = false;
  for (int it = 0; it < max_iters; ++it) {
    // f_i = -eps * log sum_j nu_j exp((g_j - C_ij)/eps)
    Eigen::MatrixXd kf = ((-cost).rowwise() + g.transpose()) / epsilon;
    f = -epsilon * (logsumexp_rows(kf).array() + log_nu).matrix();
    Eigen::MatrixXd kg = (((-cost).colwise() + f).transpose()) / epsilon;
    g = -epsilon * (logsumexp_rows(kg).array() + log_mu).matrix();
    res.iterations = it + 1;

    // marginal violation of P_ij = mu_i nu_j exp((f_i + g_j - C_ij)/eps)
    Eigen::MatrixXd logp = ((-cost).colwise() + f).rowwise() + g.transpose();
    logp /= epsilon;
    Eigen::MatrixXd p = logp.array().exp().matrix() * std::exp(log_mu + log_nu);
    const double row_violation = (p.rowwise().sum().array() - std::exp(log_mu)).abs().maxCoeff();
    const double col_violation = (p.colwise().sum().array() - std::exp(log_nu)).abs().maxCoeff();
    if (std::max(row_violation, col_violation) <= tol) {
      res.cost = p.cwiseProduct(cost).sum();
      res.converged = true;
      return res;
    }
    if (it + 1 == max_iters) res.cost = p.cwiseProduct(cost).sum();
  }
  return res;  // best iterate, converged flag unset
}

}  // namespace otb
