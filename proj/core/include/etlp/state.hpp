#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <utility>

#include "etlp/lp.hpp"
#include "etlp/topology.hpp"

namespace etlp {

enum class TriggerMode { kCentralized, kDistributed };

std::string to_string(TriggerMode mode);
TriggerMode trigger_mode_from_string(const std::string& s);

/// Broadcast causes. SIGMA only arises in centralized mode; REQUEST, SEND and
/// SYNCH only in distributed mode.
enum Cause : unsigned {
  kCauseE = 1u << 0,
  kCauseZero = 1u << 1,
  kCauseSigma = 1u << 2,
  kCauseRequest = 1u << 3,
  kCauseSend = 1u << 4,
  kCauseSynch = 1u << 5,
};
using CauseSet = unsigned;

std::string causes_to_string(CauseSet causes);       // "E,ZERO,..."
CauseSet causes_from_string(const std::string& s);

/// Per-agent trigger parameters. In distributed mode every agent i must have
/// 0 < mu_i <= 1/160 and 0 < r_min_i <= tau_i < tau_upper_bound(graph, i);
/// see validate_config.
struct TriggerConfig {
  TriggerMode mode = TriggerMode::kDistributed;
  Eigen::VectorXd mu;     // length n+m
  Eigen::VectorXd tau;    // length n+m
  Eigen::VectorXd r_min;  // length n+m

  static TriggerConfig centralized();
  static TriggerConfig distributed_defaults(const AgentGraph& graph, double mu = 1.0 / 160.0,
                                            double tau_scale = 0.9, double rmin_scale = 0.5);
};

/// 1 / sqrt(960 |N_i| max_{j in N_i} |N_j|); +inf for isolated agents.
double tau_upper_bound(const AgentGraph& graph, int agent);

/// The extended hybrid state xi = (x, z, s, q, r, x_hat, z_hat).
///   s: time since the agent's own last broadcast, clamped at tau_i.
///   q: pending request flags as (receiver, requester) pairs.
///   r: gap between the last received broadcast and the agent's own last
///      broadcast; -1 means nothing received since then.
/// x_hat/z_hat are the values the network received (they drive the flow and
/// may carry channel noise); x_sent/z_sent are the sender-side copies used as
/// the reference for the error terms e = x - x_sent. The two coincide
/// whenever broadcasts are noiseless.
struct NetworkState {
  Eigen::VectorXd x, z;
  Eigen::VectorXd s;
  Eigen::VectorXd r;
  std::set<std::pair<int, int>> q;
  Eigen::VectorXd x_hat, z_hat;
  Eigen::VectorXd x_sent, z_sent;

  Eigen::Index n() const { return x.size(); }
  Eigen::Index m() const { return z.size(); }

  /// State right after a synchronized broadcast of (x0, z0): hats equal to
  /// the true values, clocks at zero, no pending requests. Requires x0 >= 0.
  static NetworkState synchronized(const StandardLp& lp, const Eigen::VectorXd& x0,
                                   const Eigen::VectorXd& z0);

  bool hats_synchronized() const;
};

}  // namespace etlp
