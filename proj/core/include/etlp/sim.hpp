#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "etlp/triggers.hpp"

namespace etlp {

struct HybridTime {
  double t = 0.0;
  long j = 0;
};

struct Horizon {
  double t_max = 200.0;
  long j_max = 2000000;
};

/// Additive channel noise on broadcast values. Only the received copies
/// (x_hat, z_hat) are perturbed; true states and the sender-side references
/// stay clean, and x_hat is clamped at zero to stay in the admissible set.
struct NoiseSpec {
  bool enabled = false;
  double std_dev = 0.0;
  uint64_t seed = 0;
};

struct Sample {
  double t = 0.0;
  long j = 0;
  Eigen::VectorXd x, z, x_hat, z_hat;
  double v = 0.0, v1 = 0.0, v2 = 0.0;  // NaN when no saddle reference is set
  uint64_t sigma_mask = 0;      // sigma(x, z)
  uint64_t sigma_hat_mask = 0;  // sigma(x_hat, z_hat)
  bool at_event = false;
};

struct BroadcastEvent {
  double t = 0.0;
  long j = 0;
  int agent = 0;
  CauseSet causes = 0;
};

enum class SimStatus { kCompleted, kZenoAbort, kDivergence };
enum class Persistence { kPFi, kPFii, kUndetermined };

std::string to_string(SimStatus s);
std::string to_string(Persistence p);

struct HybridTrajectory {
  std::vector<Sample> samples;
  std::vector<BroadcastEvent> events;

  SimStatus status = SimStatus::kCompleted;
  std::string message;

  Persistence persistence = Persistence::kUndetermined;
  double pf_tau = 0.0;  // PFii witness: largest dwell recurring >= 10 times
  bool zeno_suspected = false;

  double final_t = 0.0;
  long total_jumps = 0;
  long agent_broadcasts = 0;
  double min_positive_inter_event_dt = std::numeric_limits<double>::infinity();
  double max_flow_inf_norm = 0.0;   // max ||f(x,z)||_inf seen, feeds the K estimate
  int containment_violations = 0;   // sigma(hat) not within sigma(x,z) at interior samples
};

struct NextEvent {
  double dt = std::numeric_limits<double>::infinity();
  TriggerVerdict imminent;
  std::vector<int> snap_to_zero;  // components that cross zero exactly at dt
};

/// Rates of the affine flow at the current broadcast values, plus the
/// constants the trigger conditions are built from. f_hat is the per-agent
/// evaluation (agent_hat_flow); g_hat = A x_hat - b.
struct FlowRates {
  Eigen::VectorXd xdot, zdot;
  Eigen::VectorXd f_hat, g_hat;
};

FlowRates flow_rates(const StandardLp& lp, const NetworkState& state);

/// Advances the state along the flow for dt: x, z move affinely, the
/// broadcast clocks saturate at tau, everything else is constant. Components
/// listed in snap_to_zero are assigned exactly zero after the move.
NetworkState advance_flow(const StandardLp& lp, const TriggerConfig& cfg,
                          const NetworkState& state, double dt,
                          const std::vector<int>& snap_to_zero = {});

/// Time to the next trigger firing, assuming none fires at the current state.
/// Every condition is a polynomial of degree <= 2 in elapsed time, so the
/// roots are computed in closed form; candidates within 1e-12 of each other
/// merge into one jump, and a candidate is confirmed by evaluating the
/// trigger predicates at the advanced state (with a 1e-12 guard band for
/// conditions that become true on open intervals). dt is +inf at equilibrium.
NextEvent next_event_time(const StandardLp& lp, const AgentGraph& graph,
                          const TriggerConfig& cfg, const NetworkState& state);

/// Earliest time at which sigma(x, z) changes during flow, +inf if never.
/// Used for diagnostic sampling; in centralized mode these instants also
/// belong to the trigger set.
double next_sigma_change(const StandardLp& lp, const NetworkState& state);

struct SimOptions {
  /// <= 0 selects max(t_max / 2000, min_i tau_i / 4).
  double sample_cadence = -1.0;
  std::optional<LagrangianParams> diagnostics;
  int same_instant_jump_cap = 5000;
  double zeno_dt = 1e-9;
  int zeno_run_length = 100;
};

/// Runs the event-triggered execution from a synchronized initial state,
/// alternating exact affine flow with broadcast jumps. Samples are recorded
/// at every event, at the diagnostic cadence, and at sigma-change instants.
HybridTrajectory simulate(const StandardLp& lp, const AgentGraph& graph,
                          const TriggerConfig& cfg, const NetworkState& init,
                          const Horizon& horizon, const NoiseSpec& noise = {},
                          const SimOptions& options = {});

struct LyapunovReport {
  double v0 = 0.0;
  double tolerance = 0.0;          // 1e-7 * (1 + V(0))
  int violations = 0;              // V increases beyond tolerance
  double worst_increase = 0.0;
  int sigma_gain_samples = 0;      // flow samples where sigma(x,z) gained members
  int sigma_gain_violations = 0;   // entering component had |f_i| > 1e-6 (1 + ||f||)
  bool noise_mode = false;         // excursions reported, not failed
};

LyapunovReport lyapunov_audit(const HybridTrajectory& traj, const StandardLp& lp,
                              const LagrangianParams& params, bool noise_mode = false);

struct MismatchInterval {
  int agent = 0;
  double t_enter = 0.0;
  double t_exit = 0.0;    // end of data when still open
  bool bound_ok = true;   // f_i^2 within the mismatch energy bound throughout
  bool duration_ok = true;
  double worst_ratio = 0.0;  // max over samples of f_i^2 / bound
};

struct MismatchReport {
  std::vector<MismatchInterval> intervals;
  int bound_violations = 0;
  int duration_violations = 0;
};

/// Verifies, on every interval where an agent sits in sigma(x,z) but not in
/// sigma(x_hat,z_hat), that f_i(x,z)^2 stays below the neighborhood energy
/// bound 8 dt^2 (f_hat' I_{sigma_hat ∩ Nx_i} f_hat + g_hat' I_{Nz_i} g_hat)
/// and that the mismatch lasts at most tau_i.
MismatchReport mode_mismatch_audit(const HybridTrajectory& traj, const StandardLp& lp,
                                   const AgentGraph& graph, const TriggerConfig& cfg);

}  // namespace etlp
