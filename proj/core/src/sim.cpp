#include "etlp/sim.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "etlp/log.hpp"

namespace etlp {

namespace {
constexpr double kMergeBand = 1e-12;  // events closer than this share a jump
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

std::string to_string(SimStatus s) {
  switch (s) {
    case SimStatus::kCompleted: return "completed";
    case SimStatus::kZenoAbort: return "zeno-abort";
    case SimStatus::kDivergence: return "divergence";
  }
  return "unknown";
}

std::string to_string(Persistence p) {
  switch (p) {
    case Persistence::kPFi: return "PFi";
    case Persistence::kPFii: return "PFii";
    case Persistence::kUndetermined: return "undetermined";
  }
  return "unknown";
}

FlowRates flow_rates(const StandardLp& lp, const NetworkState& state) {
  FlowRates r;
  r.f_hat = agent_hat_flow(lp, state);
  r.g_hat = lp.A * state.x_hat - lp.b;
  r.xdot.resize(lp.n());
  for (int i = 0; i < static_cast<int>(lp.n()); ++i)
    r.xdot[i] = state.x_sent[i] > 0.0 ? r.f_hat[i] : std::max(0.0, r.f_hat[i]);
  r.zdot = r.g_hat;
  return r;
}

NetworkState advance_flow(const StandardLp& lp, const TriggerConfig& cfg,
                          const NetworkState& state, double dt,
                          const std::vector<int>& snap_to_zero) {
  const FlowRates rates = flow_rates(lp, state);
  NetworkState next = state;
  next.x += dt * rates.xdot;
  next.z += dt * rates.zdot;
  for (int i : snap_to_zero) next.x[i] = 0.0;
  if (cfg.mode == TriggerMode::kDistributed) {
    for (Eigen::Index i = 0; i < next.s.size(); ++i)
      next.s[i] = std::min(next.s[i] + dt, cfg.tau[i]);
  }
  return next;
}

namespace {

struct Root {
  double t = 0.0;
  bool snap = false;
  int component = -1;
};

// First t > 0 with |e0 + t v| >= thr, assuming |e0| < thr.
double error_crossing(double e0, double v, double thr) {
  if (v == 0.0) return kInf;
  return v > 0.0 ? (thr - e0) / v : (-thr - e0) / v;
}

void collect_trigger_roots(const StandardLp& lp, const TriggerConfig& cfg,
                           const NetworkState& state, const FlowRates& rates,
                           std::vector<Root>& roots) {
  const int n = static_cast<int>(lp.n());
  const int m = static_cast<int>(lp.m());

  // Zero crossings of positive components (both modes).
  for (int i = 0; i < n; ++i) {
    if (state.x_sent[i] > 0.0 && rates.xdot[i] < 0.0 && state.x[i] > 0.0)
      roots.push_back({-state.x[i] / rates.xdot[i], true, i});
  }

  if (cfg.mode == TriggerMode::kDistributed) {
    for (int i = 0; i < n; ++i) {
      if (rates.f_hat[i] != 0.0) {
        const double thr = std::sqrt(cfg.mu[i]) * std::abs(rates.f_hat[i]);
        const double t = error_crossing(state.x[i] - state.x_sent[i], rates.xdot[i], thr);
        if (t > 0.0 && std::isfinite(t)) roots.push_back({t, false, -1});
      }
      if (state.x[i] == 0.0 && rates.xdot[i] == 0.0 && state.s[i] < cfg.tau[i])
        roots.push_back({cfg.tau[i] - state.s[i], false, -1});
    }
    for (int l = 0; l < m; ++l) {
      if (rates.g_hat[l] != 0.0) {
        const double thr = std::sqrt(cfg.mu[n + l]) * std::abs(rates.g_hat[l]);
        const double t = error_crossing(state.z[l] - state.z_sent[l], rates.zdot[l], thr);
        if (t > 0.0 && std::isfinite(t)) roots.push_back({t, false, -1});
      }
    }
    return;
  }

  // Centralized e-trigger: 40||e_x(t)||^2 + 20||e_z(t)||^2 reaches the
  // decrease level. Quadratic in t with nonnegative leading coefficient.
  const ActiveSet sigma_hat = hat_active_set(lp, state);
  const double level = 0.125 * rates.g_hat.squaredNorm() +
                       0.25 * selector_quadratic(sigma_hat, rates.f_hat);
  if (level > 0.0) {
    const Eigen::VectorXd ex0 = state.x - state.x_sent;
    const Eigen::VectorXd ez0 = state.z - state.z_sent;
    const double a = 40.0 * rates.xdot.squaredNorm() + 20.0 * rates.zdot.squaredNorm();
    const double b = 80.0 * ex0.dot(rates.xdot) + 40.0 * ez0.dot(rates.zdot);
    const double c0 = 40.0 * ex0.squaredNorm() + 20.0 * ez0.squaredNorm() - level;
    if (c0 < 0.0) {
      if (a > 0.0) {
        const double disc = b * b - 4.0 * a * c0;
        if (disc >= 0.0) {
          const double t = (-b + std::sqrt(disc)) / (2.0 * a);
          if (t > 0.0) roots.push_back({t, false, -1});
        }
      } else if (b > 0.0) {
        roots.push_back({-c0 / b, false, -1});
      }
    }
  }

  // Sigma-change candidates: sign changes of f_i(x(t), z(t)) at pinned
  // components (the zero crossings above cover the rest).
  const Eigen::VectorXd f0 = flow_f(lp, {state.x, state.z});
  const Eigen::VectorXd fdot =
      -(rates.xdot + lp.A.transpose() * (rates.zdot + lp.A * rates.xdot));
  for (int i = 0; i < n; ++i) {
    if (state.x[i] == 0.0 && rates.xdot[i] == 0.0 && fdot[i] != 0.0) {
      const double t = -f0[i] / fdot[i];
      if (t > 0.0) roots.push_back({t, false, -1});
    }
  }
}

}  // namespace

double next_sigma_change(const StandardLp& lp, const NetworkState& state) {
  const int n = static_cast<int>(lp.n());
  const FlowRates rates = flow_rates(lp, state);
  const Eigen::VectorXd f0 = flow_f(lp, {state.x, state.z});
  const Eigen::VectorXd fdot =
      -(rates.xdot + lp.A.transpose() * (rates.zdot + lp.A * rates.xdot));
  double earliest = kInf;
  for (int i = 0; i < n; ++i) {
    if (state.x[i] > 0.0 && rates.xdot[i] < 0.0)
      earliest = std::min(earliest, -state.x[i] / rates.xdot[i]);
    if (state.x[i] == 0.0 && rates.xdot[i] == 0.0 && fdot[i] != 0.0) {
      const double t = -f0[i] / fdot[i];
      if (t > 0.0) earliest = std::min(earliest, t);
    }
  }
  return earliest;
}

NextEvent next_event_time(const StandardLp& lp, const AgentGraph& graph,
                          const TriggerConfig& cfg, const NetworkState& state) {
  const FlowRates rates = flow_rates(lp, state);
  std::vector<Root> roots;
  collect_trigger_roots(lp, cfg, state, rates, roots);
  std::sort(roots.begin(), roots.end(), [](const Root& a, const Root& b) { return a.t < b.t; });

  NextEvent result;
  size_t k = 0;
  while (k < roots.size()) {
    // Merge the cluster of roots within the band and confirm by evaluation.
    size_t end = k;
    double t_eval = roots[k].t;
    std::vector<int> snaps;
    while (end < roots.size() && roots[end].t <= roots[k].t + kMergeBand) {
      t_eval = std::max(t_eval, roots[end].t);
      if (roots[end].snap) snaps.push_back(roots[end].component);
      ++end;
    }
    NetworkState probe = advance_flow(lp, cfg, state, t_eval, snaps);
    TriggerVerdict verdict = check_triggers(lp, graph, cfg, probe);
    if (verdict.empty()) {
      // Conditions that become true on open intervals (sigma changes, clock
      // saturation at one ulp short) need a guard-band nudge.
      probe = advance_flow(lp, cfg, state, t_eval + kMergeBand, snaps);
      verdict = check_triggers(lp, graph, cfg, probe);
      if (!verdict.empty()) t_eval += kMergeBand;
    }
    if (!verdict.empty()) {
      result.dt = t_eval;
      result.imminent = std::move(verdict);
      result.snap_to_zero = std::move(snaps);
      return result;
    }
    k = end;
  }
  return result;
}

namespace {

uint64_t mask_of(const ActiveSet& s) { return s.mask(); }

struct SampleRecorder {
  const StandardLp& lp;
  const SimOptions& options;
  HybridTrajectory& traj;

  void record(double t, long j, const NetworkState& state, bool at_event) {
    if (!traj.samples.empty()) {
      Sample& last = traj.samples.back();
      if (last.t == t && last.j == j) {
        last.at_event = last.at_event || at_event;
        return;
      }
    }
    Sample s;
    s.t = t;
    s.j = j;
    s.x = state.x;
    s.z = state.z;
    s.x_hat = state.x_hat;
    s.z_hat = state.z_hat;
    const PrimalDualPoint pt{state.x, state.z};
    const Eigen::VectorXd f = flow_f(lp, pt);
    traj.max_flow_inf_norm =
        std::max(traj.max_flow_inf_norm, f.size() > 0 ? f.cwiseAbs().maxCoeff() : 0.0);
    const ActiveSet sigma = active_set(lp, pt);
    const ActiveSet sigma_hat = hat_active_set(lp, state);
    s.sigma_mask = mask_of(sigma);
    s.sigma_hat_mask = mask_of(sigma_hat);
    s.at_event = at_event;
    if (options.diagnostics.has_value() && options.diagnostics->saddle.has_value()) {
      s.v1 = lyapunov_v1(*options.diagnostics, pt);
      s.v2 = lyapunov_v2(lp, pt);
      s.v = s.v1 + s.v2;
    } else {
      s.v = s.v1 = s.v2 = std::numeric_limits<double>::quiet_NaN();
    }
    if (!at_event && !is_subset(sigma_hat, sigma)) ++traj.containment_violations;
    traj.samples.push_back(std::move(s));
  }
};

bool state_diverged(const NetworkState& state) {
  if (!state.x.allFinite() || !state.z.allFinite()) return true;
  const double big = 1e12;
  return (state.x.size() > 0 && state.x.cwiseAbs().maxCoeff() > big) ||
         (state.z.size() > 0 && state.z.cwiseAbs().maxCoeff() > big);
}

}  // namespace

HybridTrajectory simulate(const StandardLp& lp, const AgentGraph& graph,
                          const TriggerConfig& cfg, const NetworkState& init,
                          const Horizon& horizon, const NoiseSpec& noise,
                          const SimOptions& options) {
  lp.check_consistent();
  if (cfg.mode == TriggerMode::kDistributed) {
    const auto violations = validate_config(graph, cfg);
    if (!violations.empty()) {
      std::string msg = "invalid trigger config:";
      for (const auto& v : violations)
        msg += "\n  agent " + std::to_string(v.agent) + " " + v.parameter + ": " + v.message;
      throw ConfigError(msg);
    }
  }
  if (!init.hats_synchronized())
    throw PreconditionError("simulate requires a synchronized initial broadcast");
  if (init.x.size() > 0 && init.x.minCoeff() < 0.0)
    throw PreconditionError("initial x must be nonnegative");
  if (!std::isfinite(horizon.t_max) || horizon.t_max <= 0.0)
    throw PreconditionError("t_max must be finite and positive");

  double cadence = options.sample_cadence;
  if (cadence <= 0.0) {
    cadence = horizon.t_max / 2000.0;
    if (cfg.mode == TriggerMode::kDistributed && cfg.tau.size() > 0) {
      const double min_tau = cfg.tau.minCoeff();
      if (std::isfinite(min_tau)) cadence = std::max(cadence, min_tau / 4.0);
    }
  }

  std::mt19937_64 rng(noise.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const bool noisy = noise.enabled && noise.std_dev > 0.0;

  HybridTrajectory traj;
  SampleRecorder recorder{lp, options, traj};
  NetworkState state = init;
  double t = 0.0;
  long j = 0;
  double last_jump_t = 0.0;
  int same_instant_jumps = 0;
  int fast_run = 0;
  bool final_flow_unbounded = false;
  std::vector<double> flow_gaps;

  recorder.record(t, j, state, false);
  double next_cadence_t = cadence;

  while (true) {
    TriggerVerdict verdict = check_triggers(lp, graph, cfg, state);
    if (!verdict.empty()) {
      if (j >= horizon.j_max) {
        traj.status = traj.zeno_suspected ? SimStatus::kZenoAbort : SimStatus::kCompleted;
        traj.message = "jump budget exhausted at t = " + std::to_string(t);
        break;
      }
      recorder.record(t, j, state, true);
      state = apply_jump(graph, cfg, state, verdict);
      if (noisy) {
        for (const AgentFire& f : verdict.fired) {
          const double eta = gauss(rng) * noise.std_dev;
          if (f.agent < lp.n()) {
            state.x_hat[f.agent] = std::max(0.0, state.x[f.agent] + eta);
          } else {
            state.z_hat[f.agent - lp.n()] = state.z[f.agent - lp.n()] + eta;
          }
        }
      }
      ++j;
      traj.total_jumps = j;
      for (const AgentFire& f : verdict.fired) {
        traj.events.push_back({t, j, f.agent, f.causes});
        ++traj.agent_broadcasts;
      }
      const double gap = t - last_jump_t;
      if (gap > 0.0) {
        flow_gaps.push_back(gap);
        traj.min_positive_inter_event_dt = std::min(traj.min_positive_inter_event_dt, gap);
        same_instant_jumps = 0;
      } else {
        ++same_instant_jumps;
      }
      if (gap < options.zeno_dt) {
        if (++fast_run >= options.zeno_run_length) traj.zeno_suspected = true;
      } else {
        fast_run = 0;
      }
      last_jump_t = t;
      recorder.record(t, j, state, true);
      if (same_instant_jumps > options.same_instant_jump_cap) {
        traj.zeno_suspected = true;
        traj.status = SimStatus::kZenoAbort;
        traj.message = "same-instant jump cascade exceeded cap at t = " + std::to_string(t);
        break;
      }
      continue;
    }

    const NextEvent ne = next_event_time(lp, graph, cfg, state);
    const double sigma_dt = next_sigma_change(lp, state);
    const double cadence_dt = next_cadence_t - t;
    const double end_dt = horizon.t_max - t;
    double dt = std::min(std::min(ne.dt, sigma_dt), std::min(cadence_dt, end_dt));
    if (!std::isfinite(dt)) dt = end_dt;
    const bool hit_event = ne.dt <= dt;

    state = advance_flow(lp, cfg, state, dt, hit_event ? ne.snap_to_zero : std::vector<int>{});
    t += dt;
    if (state_diverged(state)) {
      traj.status = SimStatus::kDivergence;
      traj.message = "state diverged at t = " + std::to_string(t);
      recorder.record(t, j, state, false);
      break;
    }
    if (t >= horizon.t_max) {
      recorder.record(t, j, state, false);
      final_flow_unbounded = !std::isfinite(ne.dt);
      traj.status = SimStatus::kCompleted;
      break;
    }
    if (cadence_dt <= dt) {
      recorder.record(t, j, state, false);
      while (next_cadence_t <= t) next_cadence_t += cadence;
    } else if (sigma_dt <= dt && !hit_event) {
      recorder.record(t, j, state, false);
    }
  }

  traj.final_t = t;

  // Persistence classification (measured, never assumed).
  const double final_stretch = t - last_jump_t;
  if (traj.status == SimStatus::kCompleted && final_flow_unbounded && final_stretch >= 1e-9) {
    traj.persistence = Persistence::kPFi;
  } else if (flow_gaps.size() >= 10) {
    std::nth_element(flow_gaps.begin(), flow_gaps.begin() + 9, flow_gaps.end(),
                     std::greater<double>());
    traj.pf_tau = flow_gaps[9];
    traj.persistence = traj.pf_tau > 0.0 ? Persistence::kPFii : Persistence::kUndetermined;
  }
  return traj;
}

LyapunovReport lyapunov_audit(const HybridTrajectory& traj, const StandardLp& lp,
                              const LagrangianParams& params, bool noise_mode) {
  if (!params.saddle.has_value())
    throw PreconditionError("lyapunov_audit requires a saddle reference");
  LyapunovReport report;
  report.noise_mode = noise_mode;
  if (traj.samples.empty()) return report;

  std::vector<double> v(traj.samples.size());
  std::vector<ActiveSet> sigma(traj.samples.size());
  std::vector<Eigen::VectorXd> f(traj.samples.size());
  for (size_t k = 0; k < traj.samples.size(); ++k) {
    const PrimalDualPoint pt{traj.samples[k].x, traj.samples[k].z};
    v[k] = lyapunov_v(lp, params, pt);
    sigma[k] = active_set(lp, pt);
    f[k] = flow_f(lp, pt);
  }
  report.v0 = v.front();
  report.tolerance = 1e-7 * (1.0 + report.v0);

  for (size_t k = 0; k + 1 < v.size(); ++k) {
    const double increase = v[k + 1] - v[k];
    report.worst_increase = std::max(report.worst_increase, increase);
    if (increase > report.tolerance) ++report.violations;

    const ActiveSet gained = set_difference(sigma[k + 1], sigma[k]);
    if (!gained.members.empty()) {
      ++report.sigma_gain_samples;
      const double scale = 1e-6 * (1.0 + f[k + 1].norm());
      for (int i : gained.members) {
        // The entering component must vanish at the switch; whichever of the
        // straddling samples is nearer the switch carries the small value.
        if (std::min(std::abs(f[k][i]), std::abs(f[k + 1][i])) > scale)
          ++report.sigma_gain_violations;
      }
    }
  }
  return report;
}

MismatchReport mode_mismatch_audit(const HybridTrajectory& traj, const StandardLp& lp,
                                   const AgentGraph& graph, const TriggerConfig& cfg) {
  MismatchReport report;
  if (traj.samples.empty()) return report;
  const int n = static_cast<int>(lp.n());

  std::vector<ActiveSet> sigma(traj.samples.size());
  std::vector<ActiveSet> sigma_hat(traj.samples.size());
  std::vector<Eigen::VectorXd> f(traj.samples.size());
  for (size_t k = 0; k < traj.samples.size(); ++k) {
    sigma[k] = active_set(lp, {traj.samples[k].x, traj.samples[k].z});
    sigma_hat[k] = active_set(lp, {traj.samples[k].x_hat, traj.samples[k].z_hat});
    f[k] = flow_f(lp, {traj.samples[k].x, traj.samples[k].z});
  }

  for (int agent = 0; agent < n; ++agent) {
    const std::vector<int> real_nb = graph.real_neighbors(agent);
    const std::vector<int> virtual_nb = graph.virtual_neighbors(agent);
    bool open = false;
    MismatchInterval interval;
    double conservative_enter = 0.0;
    const double tau = cfg.tau.size() > agent ? cfg.tau[agent] : kInf;

    for (size_t k = 0; k < traj.samples.size(); ++k) {
      const bool mismatched = sigma[k].contains(agent) && !sigma_hat[k].contains(agent);
      if (mismatched && !open) {
        open = true;
        interval = MismatchInterval{};
        interval.agent = agent;
        interval.t_enter = traj.samples[k].t;
        conservative_enter = k > 0 ? traj.samples[k - 1].t : traj.samples[k].t;
      }
      if (open && mismatched) {
        const Sample& s = traj.samples[k];
        const double delta = s.t - conservative_enter;
        const Eigen::VectorXd f_hat = flow_f(lp, {s.x_hat, s.z_hat});
        const Eigen::VectorXd g_hat = lp.A * s.x_hat - lp.b;
        double energy = 0.0;
        for (int i : real_nb)
          if (sigma_hat[k].contains(i)) energy += f_hat[i] * f_hat[i];
        for (int vn : virtual_nb) energy += g_hat[vn - n] * g_hat[vn - n];
        const double bound = 8.0 * delta * delta * energy;
        const double fi2 = f[k][agent] * f[k][agent];
        const double tol = 1e-12 * (1.0 + fi2);
        if (fi2 > bound + tol) interval.bound_ok = false;
        if (bound > 0.0)
          interval.worst_ratio = std::max(interval.worst_ratio, fi2 / bound);
        interval.t_exit = s.t;
      }
      if (open && (!mismatched || k + 1 == traj.samples.size())) {
        open = false;
        interval.duration_ok = (interval.t_exit - interval.t_enter) <= tau + 1e-9;
        if (!interval.bound_ok) ++report.bound_violations;
        if (!interval.duration_ok) ++report.duration_violations;
        report.intervals.push_back(interval);
      }
    }
  }
  return report;
}

}  // namespace etlp
