#include "etlp/state.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace etlp {

std::string to_string(TriggerMode mode) {
  return mode == TriggerMode::kCentralized ? "centralized" : "distributed";
}

TriggerMode trigger_mode_from_string(const std::string& s) {
  if (s == "centralized") return TriggerMode::kCentralized;
  if (s == "distributed") return TriggerMode::kDistributed;
  throw ConfigError("unknown trigger mode: " + s);
}

namespace {
struct CauseName {
  Cause cause;
  const char* name;
};
constexpr CauseName kCauseNames[] = {
    {kCauseE, "E"},           {kCauseZero, "ZERO"}, {kCauseSigma, "SIGMA"},
    {kCauseRequest, "REQUEST"}, {kCauseSend, "SEND"}, {kCauseSynch, "SYNCH"},
};
}  // namespace

std::string causes_to_string(CauseSet causes) {
  std::string out;
  for (const auto& [cause, name] : kCauseNames) {
    if (causes & cause) {
      if (!out.empty()) out += ',';
      out += name;
    }
  }
  return out;
}

CauseSet causes_from_string(const std::string& s) {
  CauseSet out = 0;
  size_t pos = 0;
  while (pos < s.size()) {
    size_t comma = s.find(',', pos);
    if (comma == std::string::npos) comma = s.size();
    const std::string token = s.substr(pos, comma - pos);
    bool known = false;
    for (const auto& [cause, name] : kCauseNames) {
      if (token == name) {
        out |= cause;
        known = true;
      }
    }
    if (!known && !token.empty()) throw IoError("unknown cause code: " + token);
    pos = comma + 1;
  }
  return out;
}

double tau_upper_bound(const AgentGraph& graph, int agent) {
  const int deg = graph.degree(agent);
  if (deg == 0) return std::numeric_limits<double>::infinity();
  int max_neighbor_deg = 0;
  for (int j : graph.neighbors[agent])
    max_neighbor_deg = std::max(max_neighbor_deg, graph.degree(j));
  return 1.0 / std::sqrt(960.0 * deg * max_neighbor_deg);
}

TriggerConfig TriggerConfig::centralized() {
  TriggerConfig cfg;
  cfg.mode = TriggerMode::kCentralized;
  return cfg;
}

TriggerConfig TriggerConfig::distributed_defaults(const AgentGraph& graph, double mu,
                                                  double tau_scale, double rmin_scale) {
  const int total = graph.agent_count();
  TriggerConfig cfg;
  cfg.mode = TriggerMode::kDistributed;
  cfg.mu = Eigen::VectorXd::Constant(total, mu);
  cfg.tau.resize(total);
  cfg.r_min.resize(total);
  for (int i = 0; i < total; ++i) {
    const double bound = tau_upper_bound(graph, i);
    cfg.tau[i] = std::isfinite(bound) ? tau_scale * bound : 1.0;
    cfg.r_min[i] = rmin_scale * cfg.tau[i];
  }
  return cfg;
}

NetworkState NetworkState::synchronized(const StandardLp& lp, const Eigen::VectorXd& x0,
                                        const Eigen::VectorXd& z0) {
  lp.check_consistent();
  if (x0.size() != lp.n()) throw DimensionError("x0 has wrong length");
  if (z0.size() != lp.m()) throw DimensionError("z0 has wrong length");
  if (x0.size() > 0 && x0.minCoeff() < 0.0)
    throw PreconditionError("initial x must be nonnegative");
  NetworkState st;
  st.x = x0;
  st.z = z0;
  st.x_hat = x0;
  st.z_hat = z0;
  st.x_sent = x0;
  st.z_sent = z0;
  st.s = Eigen::VectorXd::Zero(lp.n() + lp.m());
  st.r = Eigen::VectorXd::Constant(lp.n() + lp.m(), -1.0);
  return st;
}

bool NetworkState::hats_synchronized() const {
  return x_hat == x && z_hat == z && x_sent == x && z_sent == z;
}

}  // namespace etlp
