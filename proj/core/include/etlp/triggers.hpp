#pragma once

#include <string>
#include <vector>

#include "etlp/dynamics.hpp"
#include "etlp/state.hpp"
#include "etlp/topology.hpp"

namespace etlp {

struct AgentFire {
  int agent = 0;
  CauseSet causes = 0;
};

/// The hat-flow as the agents themselves evaluate it: agent i computes f_i
/// with the value it sent for its own component and the received (possibly
/// noise-corrupted) copies of everything else. Coincides with
/// flow_f(x_hat, z_hat) whenever broadcasts are noiseless.
Eigen::VectorXd agent_hat_flow(const StandardLp& lp, const NetworkState& state);

/// Active set of the broadcast values under the same per-agent convention:
/// i is a member iff agent_hat_flow_i >= 0 or the value i last sent is > 0.
ActiveSet hat_active_set(const StandardLp& lp, const NetworkState& state);

struct TriggerVerdict {
  std::vector<AgentFire> fired;  // ascending agent order

  bool empty() const { return fired.empty(); }
  CauseSet causes_union() const;
  bool agent_fired(int agent) const;
};

/// Centralized trigger: every agent broadcasts when the network state enters
/// the e-set, the sigma-change set, or the zero-crossing set.
/// The e-set requires (A xhat - b != 0 or I_sigma(hat) f(hat) != 0) together
/// with ||A xhat - b||^2/8 + f(hat)'I_sigma(hat)f(hat)/4 <= 20||e_z||^2 +
/// 40||e_x||^2. `sent` supplies the error reference when broadcasts are
/// noisy; when null, errors are measured against `hat`.
TriggerVerdict centralized_check(const StandardLp& lp, const PrimalDualPoint& pt,
                                 const BroadcastState& hat,
                                 const BroadcastState* sent = nullptr);

/// Per-agent distributed triggers evaluated on the extended state.
TriggerVerdict distributed_check(const StandardLp& lp, const AgentGraph& graph,
                                 const TriggerConfig& cfg, const NetworkState& state);

TriggerVerdict check_triggers(const StandardLp& lp, const AgentGraph& graph,
                              const TriggerConfig& cfg, const NetworkState& state);

/// The jump map: fired agents publish their current state and reset their
/// bookkeeping; their neighbors record the receive gap. Noise, when enabled,
/// is applied by the simulator on top of the returned state. Pure function.
NetworkState apply_jump(const AgentGraph& graph, const TriggerConfig& cfg,
                        const NetworkState& state, const TriggerVerdict& verdict);

struct ConfigViolation {
  int agent = 0;
  std::string parameter;
  std::string message;
};

/// Empty iff every distributed-mode parameter bound holds.
std::vector<ConfigViolation> validate_config(const AgentGraph& graph, const TriggerConfig& cfg);

}  // namespace etlp
