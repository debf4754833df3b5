#pragma once

#include <vector>

#include "etlp/lp.hpp"

namespace etlp {

/// Communication structure induced by the sparsity of A. Agents 0..n-1 own
/// one primal variable each; agents n..n+m-1 are the constraint-owning
/// virtual agents. For every constraint, the variables appearing in it and
/// the constraint's virtual agent form a clique.
struct AgentGraph {
  int n_real = 0;
  int n_virtual = 0;
  std::vector<std::vector<int>> neighbors;  // sorted ascending, self excluded

  int agent_count() const { return n_real + n_virtual; }
  bool is_virtual(int agent) const { return agent >= n_real; }
  int degree(int agent) const { return static_cast<int>(neighbors[agent].size()); }

  std::vector<int> real_neighbors(int agent) const;
  std::vector<int> virtual_neighbors(int agent) const;
};

AgentGraph build_graph(const StandardLp& lp);

/// Per-virtual-agent spectral-radius estimate: the Gershgorin row bound of
/// the Gram matrix of constraint rows, ||a_l||^2 + sum_{k != l} |a_l . a_k|.
/// Each bound is computable from the rows sharing a variable with row l, and
/// the maximum over l dominates rho(A'A).
Eigen::VectorXd gershgorin_estimates(const StandardLp& lp);

struct ScalingResult {
  double rho_star = 0.0;            // max over agents of the converged values
  StandardLp scaled;                // A and b divided by max(1, rho*) per row
  int rounds = 0;                   // consensus sweeps that changed a value
  Eigen::VectorXd consensus_values; // per-virtual-agent converged estimate
};

/// Synchronous max-consensus on the Gershgorin estimates over the
/// virtual-agent adjacency (constraints sharing a variable), followed by row
/// scaling with divisor max(1, rho*). Disconnected constraint groups settle
/// on per-component maxima, which still yields rho(A~'A~) <= 1 because
/// non-interacting rows are mutually orthogonal.
ScalingResult max_consensus_scale(const StandardLp& lp, const AgentGraph& graph);

/// Dominant eigenvalue of A'A by power iteration (matrix-free).
double spectral_radius_ata(const StandardLp& lp, double tol = 1e-10, int max_iter = 200000);

}  // namespace etlp
