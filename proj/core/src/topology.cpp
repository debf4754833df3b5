#include "etlp/topology.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace etlp {

std::vector<int> AgentGraph::real_neighbors(int agent) const {
  std::vector<int> out;
  for (int j : neighbors[agent])
    if (j < n_real) out.push_back(j);
  return out;
}

std::vector<int> AgentGraph::virtual_neighbors(int agent) const {
  std::vector<int> out;
  for (int j : neighbors[agent])
    if (j >= n_real) out.push_back(j);
  return out;
}

AgentGraph build_graph(const StandardLp& lp) {
  lp.check_consistent();
  const int n = static_cast<int>(lp.n());
  const int m = static_cast<int>(lp.m());
  AgentGraph g;
  g.n_real = n;
  g.n_virtual = m;
  std::vector<std::set<int>> adj(n + m);
  for (int row = 0; row < m; ++row) {
    std::vector<int> clique;
    for (SparseRowMatrix::InnerIterator it(lp.A, row); it; ++it)
      if (it.value() != 0.0) clique.push_back(static_cast<int>(it.col()));
    clique.push_back(n + row);
    for (size_t i = 0; i < clique.size(); ++i)
      for (size_t j = i + 1; j < clique.size(); ++j) {
        adj[clique[i]].insert(clique[j]);
        adj[clique[j]].insert(clique[i]);
      }
  }
  g.neighbors.reserve(n + m);
  for (auto& s : adj) g.neighbors.emplace_back(s.begin(), s.end());
  return g;
}

namespace {

// Adjacency between constraint rows: two rows interact iff they share a
// variable (sparsity overlap, not inner product, so cancellation is ignored).
std::vector<std::vector<int>> row_adjacency(const StandardLp& lp) {
  const int n = static_cast<int>(lp.n());
  const int m = static_cast<int>(lp.m());
  std::vector<std::vector<int>> rows_of_col(n);
  for (int row = 0; row < m; ++row)
    for (SparseRowMatrix::InnerIterator it(lp.A, row); it; ++it)
      if (it.value() != 0.0) rows_of_col[it.col()].push_back(row);
  std::vector<std::set<int>> adj(m);
  for (int col = 0; col < n; ++col)
    for (size_t i = 0; i < rows_of_col[col].size(); ++i)
      for (size_t j = i + 1; j < rows_of_col[col].size(); ++j) {
        adj[rows_of_col[col][i]].insert(rows_of_col[col][j]);
        adj[rows_of_col[col][j]].insert(rows_of_col[col][i]);
      }
  std::vector<std::vector<int>> out(m);
  for (int row = 0; row < m; ++row) out[row].assign(adj[row].begin(), adj[row].end());
  return out;
}

}  // namespace

Eigen::VectorXd gershgorin_estimates(const StandardLp& lp) {
  lp.check_consistent();
  const int m = static_cast<int>(lp.m());
  Eigen::MatrixXd rows = lp.dense_a();
  Eigen::VectorXd est(m);
  for (int l = 0; l < m; ++l) {
    double sum = rows.row(l).squaredNorm();
    for (int k = 0; k < m; ++k)
      if (k != l) sum += std::abs(rows.row(l).dot(rows.row(k)));
    est[l] = sum;
  }
  return est;
}

ScalingResult max_consensus_scale(const StandardLp& lp, const AgentGraph& graph) {
  lp.check_consistent();
  if (graph.n_virtual != lp.m())
    throw DimensionError("graph virtual-agent count does not match m");
  const int m = static_cast<int>(lp.m());

  ScalingResult result;
  Eigen::VectorXd values = gershgorin_estimates(lp);
  const auto adj = row_adjacency(lp);

  int rounds = 0;
  bool changed = m > 0;
  while (changed) {
    changed = false;
    Eigen::VectorXd next = values;
    for (int l = 0; l < m; ++l)
      for (int k : adj[l]) next[l] = std::max(next[l], values[k]);
    if ((next - values).cwiseAbs().maxCoeff() > 0.0) {
      changed = true;
      ++rounds;
    }
    values = next;
  }

  result.consensus_values = values;
  result.rho_star = m > 0 ? values.maxCoeff() : 0.0;
  result.rounds = rounds;

  result.scaled = lp;
  for (int l = 0; l < m; ++l) {
    const double divisor = std::max(1.0, values[l]);
    result.scaled.b[l] /= divisor;
    for (SparseRowMatrix::InnerIterator it(result.scaled.A, l); it; ++it)
      it.valueRef() /= divisor;
  }
  return result;
}

double spectral_radius_ata(const StandardLp& lp, double tol, int max_iter) {
  lp.check_consistent();
  const Eigen::Index n = lp.n();
  if (n == 0 || lp.m() == 0) return 0.0;
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = 1.0 + 1e-3 * static_cast<double>(i);
  v.normalize();
  double lambda = 0.0;
  for (int iter = 0; iter < max_iter; ++iter) {
    Eigen::VectorXd w = lp.A.transpose() * (lp.A * v);
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    w /= norm;
    const double next = w.dot(lp.A.transpose() * (lp.A * w));
    if (std::abs(next - lambda) <= tol * std::max(1.0, std::abs(next)) && iter > 2)
      return next;
    lambda = next;
    v = w;
  }
  return lambda;
}

}  // namespace etlp
