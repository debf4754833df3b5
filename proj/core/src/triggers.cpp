#include "etlp/triggers.hpp"

#include <algorithm>
#include <cmath>

namespace etlp {

CauseSet TriggerVerdict::causes_union() const {
  CauseSet all = 0;
  for (const auto& f : fired) all |= f.causes;
  return all;
}

bool TriggerVerdict::agent_fired(int agent) const {
  for (const auto& f : fired)
    if (f.agent == agent) return true;
  return false;
}

namespace {

// Agent i evaluates f_i with the value it sent in place of the received copy
// of its own state. Swapping component i shifts f_i by -(1 + (A'A)_{ii})
// times the difference; cross components stay put since every agent performs
// only its own swap.
Eigen::VectorXd mixed_hat_flow(const StandardLp& lp, const Eigen::VectorXd& x_hat,
                               const Eigen::VectorXd& z_hat, const Eigen::VectorXd& x_sent) {
  Eigen::VectorXd f = flow_f(lp, {x_hat, z_hat});
  if (x_sent == x_hat) return f;
  Eigen::VectorXd col_norm2 = Eigen::VectorXd::Zero(lp.n());
  for (int row = 0; row < static_cast<int>(lp.m()); ++row)
    for (SparseRowMatrix::InnerIterator it(lp.A, row); it; ++it)
      col_norm2[it.col()] += it.value() * it.value();
  for (int i = 0; i < static_cast<int>(lp.n()); ++i) {
    const double delta = x_sent[i] - x_hat[i];
    if (delta != 0.0) f[i] -= delta * (1.0 + col_norm2[i]);
  }
  return f;
}

ActiveSet mixed_hat_active_set(const StandardLp& lp, const Eigen::VectorXd& f_mixed,
                               const Eigen::VectorXd& x_sent) {
  ActiveSet s;
  for (int i = 0; i < static_cast<int>(lp.n()); ++i)
    if (f_mixed[i] >= 0.0 || x_sent[i] > 0.0) s.members.push_back(i);
  return s;
}

}  // namespace

Eigen::VectorXd agent_hat_flow(const StandardLp& lp, const NetworkState& state) {
  return mixed_hat_flow(lp, state.x_hat, state.z_hat, state.x_sent);
}

ActiveSet hat_active_set(const StandardLp& lp, const NetworkState& state) {
  return mixed_hat_active_set(lp, agent_hat_flow(lp, state), state.x_sent);
}

TriggerVerdict centralized_check(const StandardLp& lp, const PrimalDualPoint& pt,
                                 const BroadcastState& hat, const BroadcastState* sent) {
  const int n = static_cast<int>(lp.n());
  const Eigen::VectorXd& x_ref = sent != nullptr ? sent->x_hat : hat.x_hat;
  const Eigen::VectorXd& z_ref = sent != nullptr ? sent->z_hat : hat.z_hat;
  const Eigen::VectorXd f_hat = mixed_hat_flow(lp, hat.x_hat, hat.z_hat, x_ref);
  const ActiveSet sigma_hat = mixed_hat_active_set(lp, f_hat, x_ref);
  const Eigen::VectorXd g_hat = lp.A * hat.x_hat - lp.b;

  const double ex2 = (pt.x - x_ref).squaredNorm();
  const double ez2 = (pt.z - z_ref).squaredNorm();

  const double decrease = 0.125 * g_hat.squaredNorm() + 0.25 * selector_quadratic(sigma_hat, f_hat);
  const bool not_equilibrium =
      (g_hat.size() > 0 && g_hat.cwiseAbs().maxCoeff() != 0.0) ||
      [&] {
        for (int i : sigma_hat.members)
          if (f_hat[i] != 0.0) return true;
        return false;
      }();
  const bool e_fire = not_equilibrium && decrease <= 20.0 * ez2 + 40.0 * ex2;
  const bool sigma_fire = !(active_set(lp, pt) == sigma_hat);

  std::vector<int> zero_agents;
  for (int i = 0; i < n; ++i)
    if ((x_ref[i] > 0.0 || hat.x_hat[i] > 0.0) && pt.x[i] == 0.0) zero_agents.push_back(i);

  TriggerVerdict verdict;
  if (!e_fire && !sigma_fire && zero_agents.empty()) return verdict;

  CauseSet shared = 0;
  if (e_fire) shared |= kCauseE;
  if (sigma_fire) shared |= kCauseSigma;
  const int total = n + static_cast<int>(lp.m());
  verdict.fired.reserve(total);
  for (int i = 0; i < total; ++i) {
    CauseSet causes = shared;
    if (std::binary_search(zero_agents.begin(), zero_agents.end(), i)) causes |= kCauseZero;
    verdict.fired.push_back({i, causes});
  }
  return verdict;
}

TriggerVerdict distributed_check(const StandardLp& lp, const AgentGraph& graph,
                                 const TriggerConfig& cfg, const NetworkState& state) {
  const int n = static_cast<int>(lp.n());
  const int m = static_cast<int>(lp.m());
  const Eigen::VectorXd f_hat = agent_hat_flow(lp, state);
  const Eigen::VectorXd g_hat = lp.A * state.x_hat - lp.b;

  TriggerVerdict verdict;
  for (int i = 0; i < n + m; ++i) {
    CauseSet causes = 0;
    if (i < n) {
      const double e = state.x[i] - state.x_sent[i];
      if (f_hat[i] != 0.0 && e * e >= cfg.mu[i] * f_hat[i] * f_hat[i]) causes |= kCauseE;
      // Either stale-positive copy forces a refresh at zero: the sent one
      // flips the agent's own flow branch, the received one corrects the
      // public view.
      if ((state.x_sent[i] > 0.0 || state.x_hat[i] > 0.0) && state.x[i] == 0.0)
        causes |= kCauseZero;
      if (state.x[i] == 0.0 && state.s[i] >= cfg.tau[i]) causes |= kCauseRequest;
    } else {
      const int l = i - n;
      const double e = state.z[l] - state.z_sent[l];
      if (g_hat[l] != 0.0 && e * e >= cfg.mu[i] * g_hat[l] * g_hat[l]) causes |= kCauseE;
    }
    for (int j : graph.neighbors[i]) {
      if (j < n && state.q.count({i, j}) > 0) {
        causes |= kCauseSend;
        break;
      }
    }
    // Strictly positive gap only: a receive that coincides with the agent's
    // own broadcast is already synchronized and rebroadcasting would loop.
    if (state.r[i] > 0.0 && state.r[i] <= cfg.r_min[i]) causes |= kCauseSynch;
    if (causes != 0) verdict.fired.push_back({i, causes});
  }
  return verdict;
}

TriggerVerdict check_triggers(const StandardLp& lp, const AgentGraph& graph,
                              const TriggerConfig& cfg, const NetworkState& state) {
  if (cfg.mode == TriggerMode::kCentralized) {
    const BroadcastState sent{state.x_sent, state.z_sent};
    return centralized_check(lp, {state.x, state.z}, {state.x_hat, state.z_hat}, &sent);
  }
  return distributed_check(lp, graph, cfg, state);
}

NetworkState apply_jump(const AgentGraph& graph, const TriggerConfig& cfg,
                        const NetworkState& state, const TriggerVerdict& verdict) {
  if (verdict.empty()) throw PreconditionError("apply_jump requires a nonempty verdict");
  const int n = static_cast<int>(state.n());
  NetworkState next = state;

  if (cfg.mode == TriggerMode::kDistributed) {
    // Receive gaps for bystanders first; an agent that broadcasts in this
    // jump ends with r = -1 regardless of what it received at the instant.
    for (const AgentFire& f : verdict.fired)
      for (int j : graph.neighbors[f.agent])
        if (!verdict.agent_fired(j)) next.r[j] = state.s[j];
  }

  for (const AgentFire& f : verdict.fired) {
    if (f.agent < n) {
      next.x_hat[f.agent] = state.x[f.agent];
      next.x_sent[f.agent] = state.x[f.agent];
    } else {
      next.z_hat[f.agent - n] = state.z[f.agent - n];
      next.z_sent[f.agent - n] = state.z[f.agent - n];
    }
    if (cfg.mode == TriggerMode::kDistributed) {
      next.s[f.agent] = 0.0;
      next.r[f.agent] = -1.0;
    }
  }

  if (cfg.mode == TriggerMode::kDistributed) {
    // Requests flag every neighbor; a broadcast sent at this same instant
    // already services them, so send-clears run after the inserts.
    for (const AgentFire& f : verdict.fired)
      if (f.causes & kCauseRequest)
        for (int j : graph.neighbors[f.agent]) next.q.insert({j, f.agent});
    for (const AgentFire& f : verdict.fired)
      if (f.causes & kCauseSend)
        std::erase_if(next.q, [&](const std::pair<int, int>& e) { return e.first == f.agent; });
  }
  return next;
}

std::vector<ConfigViolation> validate_config(const AgentGraph& graph, const TriggerConfig& cfg) {
  std::vector<ConfigViolation> out;
  if (cfg.mode != TriggerMode::kDistributed) return out;
  const int total = graph.agent_count();
  if (cfg.mu.size() != total || cfg.tau.size() != total || cfg.r_min.size() != total) {
    out.push_back({-1, "size", "mu/tau/r_min must all have length n+m"});
    return out;
  }
  for (int i = 0; i < total; ++i) {
    if (!(cfg.mu[i] > 0.0 && cfg.mu[i] <= 1.0 / 160.0))
      out.push_back({i, "mu", "mu must lie in (0, 1/160], got " + std::to_string(cfg.mu[i])});
    if (!(cfg.r_min[i] > 0.0))
      out.push_back({i, "r_min", "r_min must be positive"});
    if (!(cfg.r_min[i] <= cfg.tau[i]))
      out.push_back({i, "r_min", "r_min must not exceed tau"});
    const double bound = tau_upper_bound(graph, i);
    if (!(cfg.tau[i] > 0.0 && cfg.tau[i] < bound))
      out.push_back({i, "tau",
                     "tau must lie in (0, " + std::to_string(bound) + "), got " +
                         std::to_string(cfg.tau[i])});
  }
  return out;
}

}  // namespace etlp
