#pragma once

#include <random>
#include <utility>
#include <vector>

#include "etlp/lp.hpp"
#include "etlp/sim.hpp"
#include "etlp/state.hpp"
#include "etlp/topology.hpp"

namespace etlp::test {

struct RandomLpOptions {
  int n_min = 2;
  int n_max = 8;
  int m_min = 1;
  int m_max = 6;
  double density = 0.7;
  bool bounded = true;  // make c dual-feasible so the optimum is finite
};

/// Random standard-form LP that is feasible by construction (b = A x0 with
/// x0 >= 0) and, when bounded, has a finite optimum (c = A'y + s, s >= 0).
StandardLp random_feasible_lp(std::mt19937_64& rng, const RandomLpOptions& opts = {});

Eigen::MatrixXd dense(const StandardLp& lp);

/// First trigger time found by scanning a fine grid and bisecting, with the
/// trigger conditions re-implemented directly from their definitions (using
/// inequality closures for the zero crossings). Independent of
/// next_event_time's closed-form root computation. Returns +inf when no
/// event occurs within t_hi.
double bisect_first_event(const StandardLp& lp, const AgentGraph& graph,
                          const TriggerConfig& cfg, const NetworkState& state, double t_hi,
                          int grid = 20000);

/// R^2 of the least-squares line through the points.
double linear_fit_r2(const std::vector<std::pair<double, double>>& pts);

/// Dual candidates from every independent column basis of a desk-scale LP
/// (dense linear algebra, independent of the oracle implementation).
std::vector<Eigen::VectorXd> enumerate_basis_duals(const StandardLp& lp);

/// Random valid flow state: hats broadcast-consistent, x >= 0 with some
/// exact zeros, small state errors, no trigger currently firing.
NetworkState random_flow_state(const StandardLp& lp, const AgentGraph& graph,
                               const TriggerConfig& cfg, std::mt19937_64& rng);

}  // namespace etlp::test
