#include "etlp/runner.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>

#include <json.hpp>

#include "etlp/log.hpp"
#include "etlp/triggers.hpp"

namespace etlp {

namespace {

nlohmann::json benefits_to_json(const Eigen::MatrixXd& b) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < b.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < b.cols(); ++j) row.push_back(b(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd benefits_from_json(const nlohmann::json& rows) {
  const int N = static_cast<int>(rows.size());
  Eigen::MatrixXd b(N, N);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) b(i, j) = rows.at(i).at(j).get<double>();
  return b;
}

}  // namespace

std::string run_config_to_json(const RunConfig& config) {
  nlohmann::json doc;
  doc["problem_path"] = config.problem_path;
  if (!config.problem_json.empty()) {
    doc["problem"] = nlohmann::json::parse(config.problem_json);
  } else {
    doc["problem"] = nullptr;
  }
  if (config.generator.has_value()) {
    doc["generator"] = {{"N", config.generator->N},
                        {"benefits", benefits_to_json(config.generator->benefits)}};
  } else {
    doc["generator"] = nullptr;
  }
  doc["mode"] = to_string(config.mode);
  doc["gamma"] = config.gamma;
  doc["t_max"] = config.t_max;
  doc["j_max"] = config.j_max;
  doc["noise_std"] = config.noise_std;
  doc["seed"] = config.seed;
  doc["mu"] = config.mu;
  doc["tau_scale"] = config.tau_scale;
  doc["rmin_scale"] = config.rmin_scale;
  doc["preprocess"] = config.preprocess;
  doc["out_dir"] = config.out_dir;
  return doc.dump(2) + "\n";
}

RunConfig run_config_from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("run config is not valid JSON: ") + e.what());
  }
  try {
    RunConfig config;
    config.problem_path = doc.value("problem_path", std::string{});
    if (doc.contains("problem") && !doc["problem"].is_null())
      config.problem_json = doc["problem"].dump();
    if (doc.contains("generator") && !doc["generator"].is_null()) {
      AssignmentSpec spec;
      spec.N = doc["generator"].at("N").get<int>();
      spec.benefits = benefits_from_json(doc["generator"].at("benefits"));
      config.generator = std::move(spec);
    }
    config.mode = trigger_mode_from_string(doc.value("mode", std::string("distributed")));
    config.gamma = doc.value("gamma", 1.0);
    config.t_max = doc.value("t_max", 200.0);
    config.j_max = doc.value("j_max", long{2000000});
    config.noise_std = doc.value("noise_std", 0.0);
    config.seed = doc.value("seed", uint64_t{1});
    config.mu = doc.value("mu", 1.0 / 160.0);
    config.tau_scale = doc.value("tau_scale", 0.9);
    config.rmin_scale = doc.value("rmin_scale", 0.5);
    config.preprocess = doc.value("preprocess", true);
    config.out_dir = doc.value("out_dir", std::string{});
    return config;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed run config: ") + e.what());
  }
}

RunConfig load_run_config(const std::string& path) {
  return run_config_from_json(read_text_file(path));
}

namespace {

StandardLp resolve_problem(const RunConfig& config) {
  if (!config.problem_json.empty()) return problem_from_json(config.problem_json);
  if (!config.problem_path.empty()) return load_problem(config.problem_path);
  if (config.generator.has_value()) return generate_assignment(*config.generator);
  throw ConfigError("run config names no problem: set a problem path, an inline "
                    "problem, or a generator spec");
}

bool desk_scale(const StandardLp& lp) {
  return lp.n() <= kOracleSizeLimit && lp.m() <= kOracleSizeLimit;
}

long count_cause(const HybridTrajectory& traj, Cause cause) {
  long count = 0;
  for (const auto& e : traj.events)
    if (e.causes & cause) ++count;
  return count;
}

}  // namespace

RunResult run(const RunConfig& config) {
  const auto wall_start = std::chrono::steady_clock::now();
  RunResult result;
  result.problem = resolve_problem(config);
  result.problem.check_consistent();

  double rho_star = std::numeric_limits<double>::quiet_NaN();
  result.sim_problem = result.problem;
  if (config.preprocess) {
    const AgentGraph pre_graph = build_graph(result.problem);
    ScalingResult scaling = max_consensus_scale(result.problem, pre_graph);
    rho_star = scaling.rho_star;
    result.sim_problem = std::move(scaling.scaled);
  }
  result.sim_problem.c *= config.gamma;

  result.graph = build_graph(result.sim_problem);
  result.trigger_config =
      config.mode == TriggerMode::kCentralized
          ? TriggerConfig::centralized()
          : TriggerConfig::distributed_defaults(result.graph, config.mu, config.tau_scale,
                                                config.rmin_scale);

  SimOptions options;
  std::optional<LagrangianParams> params;
  if (desk_scale(result.sim_problem)) {
    const KktPoint saddle = oracle_solve_qp(RegularizedQp{result.sim_problem, 1.0});
    params = LagrangianParams{0.0, SaddleReference{saddle.x, saddle.z}};
    options.diagnostics = params;
  } else {
    log_info("problem beyond desk scale; Lyapunov diagnostics disabled");
  }

  const NetworkState init = NetworkState::synchronized(
      result.sim_problem, Eigen::VectorXd::Constant(result.sim_problem.n(), 0.5),
      Eigen::VectorXd::Zero(result.sim_problem.m()));
  const NoiseSpec noise{config.noise_std > 0.0, config.noise_std, config.seed};

  result.trajectory = simulate(result.sim_problem, result.graph, result.trigger_config, init,
                               Horizon{config.t_max, config.j_max}, noise, options);

  if (desk_scale(result.problem)) {
    try {
      result.oracle_point = oracle_solve_lp(result.problem);
    } catch (const OracleError& e) {
      log_info("oracle unavailable for this problem: %s", e.what());
    }
  }
  const Eigen::VectorXd& x_final = result.trajectory.samples.back().x;
  if (result.oracle_point.has_value()) {
    result.final_error_inf = (x_final - result.oracle_point->x).cwiseAbs().maxCoeff();
    result.rounded_matches_oracle = true;
    for (Eigen::Index i = 0; i < x_final.size(); ++i)
      if (std::abs(std::round(x_final[i]) - result.oracle_point->x[i]) > 1e-6)
        result.rounded_matches_oracle = false;
  }

  Metrics& metrics = result.metrics;
  metrics.put("status", to_string(result.trajectory.status));
  metrics.put("mode", to_string(config.mode));
  metrics.put("final_t", result.trajectory.final_t);
  metrics.put("total_jumps", result.trajectory.total_jumps);
  metrics.put("total_broadcasts", result.trajectory.agent_broadcasts);
  metrics.put("broadcasts_E", count_cause(result.trajectory, kCauseE));
  metrics.put("broadcasts_ZERO", count_cause(result.trajectory, kCauseZero));
  metrics.put("broadcasts_SIGMA", count_cause(result.trajectory, kCauseSigma));
  metrics.put("broadcasts_REQUEST", count_cause(result.trajectory, kCauseRequest));
  metrics.put("broadcasts_SEND", count_cause(result.trajectory, kCauseSend));
  metrics.put("broadcasts_SYNCH", count_cause(result.trajectory, kCauseSynch));
  metrics.put("persistence", to_string(result.trajectory.persistence));
  metrics.put("pf_tau", result.trajectory.pf_tau);
  metrics.put("zeno_suspected", long{result.trajectory.zeno_suspected ? 1 : 0});
  metrics.put("min_inter_event_dt", result.trajectory.min_positive_inter_event_dt);
  metrics.put("containment_violations", long{result.trajectory.containment_violations});
  metrics.put("final_error_inf", result.final_error_inf);
  metrics.put("rounded_matches_oracle", long{result.rounded_matches_oracle ? 1 : 0});
  metrics.put("k_penalty_estimate", 2.0 * (1.0 + result.trajectory.max_flow_inf_norm));
  if (config.preprocess) metrics.put("rho_star", rho_star);

  if (params.has_value()) {
    const Sample& first = result.trajectory.samples.front();
    const Sample& last = result.trajectory.samples.back();
    metrics.put("v_initial", first.v);
    metrics.put("v_final", last.v);
    const LyapunovReport lyap =
        lyapunov_audit(result.trajectory, result.sim_problem, *params, noise.enabled);
    metrics.put("lyapunov_violations", long{lyap.violations});
    metrics.put("lyapunov_worst_increase", lyap.worst_increase);
    metrics.put("lyapunov_tolerance", lyap.tolerance);
  }
  if (config.mode == TriggerMode::kDistributed) {
    const MismatchReport mismatch = mode_mismatch_audit(result.trajectory, result.sim_problem,
                                                        result.graph, result.trigger_config);
    metrics.put("mismatch_intervals", static_cast<long>(mismatch.intervals.size()));
    metrics.put("mismatch_bound_violations", long{mismatch.bound_violations});
    metrics.put("mismatch_duration_violations", long{mismatch.duration_violations});
  }
  const double wall_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
  metrics.put("wall_time_s", wall_s);

  if (!config.out_dir.empty()) {
    namespace fs = std::filesystem;
    fs::create_directories(config.out_dir);
    const fs::path dir(config.out_dir);
    write_trajectory_csv(result.trajectory, static_cast<int>(result.sim_problem.n()),
                         static_cast<int>(result.sim_problem.m()),
                         (dir / "trajectory.csv").string());
    write_events_csv(result.trajectory, (dir / "events.csv").string());
    write_metrics(metrics, (dir / "metrics.txt").string());
    RunConfig echo = config;
    echo.problem_json = problem_to_json(result.problem);
    write_text_file((dir / "config.echo").string(), run_config_to_json(echo));
  }

  result.exit_code = result.trajectory.status == SimStatus::kCompleted ? 0 : 1;
  return result;
}

Metrics audit_run(const std::string& run_dir) {
  namespace fs = std::filesystem;
  const fs::path dir(run_dir);
  RunConfig config = load_run_config((dir / "config.echo").string());

  StandardLp problem = resolve_problem(config);
  StandardLp sim_lp = problem;
  if (config.preprocess) {
    const AgentGraph pre_graph = build_graph(problem);
    sim_lp = max_consensus_scale(problem, pre_graph).scaled;
  }
  sim_lp.c *= config.gamma;
  const AgentGraph graph = build_graph(sim_lp);
  const TriggerConfig cfg =
      config.mode == TriggerMode::kCentralized
          ? TriggerConfig::centralized()
          : TriggerConfig::distributed_defaults(graph, config.mu, config.tau_scale,
                                                config.rmin_scale);

  HybridTrajectory traj;
  traj.samples = read_trajectory_csv((dir / "trajectory.csv").string());
  Metrics metrics;
  metrics.put("samples", static_cast<long>(traj.samples.size()));
  if (desk_scale(sim_lp)) {
    const KktPoint saddle = oracle_solve_qp(RegularizedQp{sim_lp, 1.0});
    const LagrangianParams params{0.0, SaddleReference{saddle.x, saddle.z}};
    const LyapunovReport lyap = lyapunov_audit(traj, sim_lp, params, config.noise_std > 0.0);
    metrics.put("lyapunov_violations", long{lyap.violations});
    metrics.put("lyapunov_worst_increase", lyap.worst_increase);
    metrics.put("lyapunov_tolerance", lyap.tolerance);
    metrics.put("sigma_gain_samples", long{lyap.sigma_gain_samples});
    metrics.put("sigma_gain_violations", long{lyap.sigma_gain_violations});
  }
  if (config.mode == TriggerMode::kDistributed) {
    const MismatchReport mismatch = mode_mismatch_audit(traj, sim_lp, graph, cfg);
    metrics.put("mismatch_intervals", static_cast<long>(mismatch.intervals.size()));
    metrics.put("mismatch_bound_violations", long{mismatch.bound_violations});
    metrics.put("mismatch_duration_violations", long{mismatch.duration_violations});
  }
  return metrics;
}

}  // namespace etlp
