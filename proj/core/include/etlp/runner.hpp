#pragma once

#include <optional>
#include <string>

#include "etlp/assignment.hpp"
#include "etlp/io.hpp"
#include "etlp/oracle.hpp"
#include "etlp/sim.hpp"
#include "etlp/topology.hpp"

namespace etlp {

/// Everything needed to reproduce a run. The echo written next to the run
/// artifacts embeds the resolved problem document so the run is reproducible
/// from the config alone.
struct RunConfig {
  std::string problem_path;                // read when problem_json is empty
  std::string problem_json;                // resolved problem document
  std::optional<AssignmentSpec> generator; // used when both above are empty

  TriggerMode mode = TriggerMode::kDistributed;
  double gamma = 1.0;
  double t_max = 200.0;
  long j_max = 2000000;
  double noise_std = 0.0;
  uint64_t seed = 1;
  double mu = 1.0 / 160.0;
  double tau_scale = 0.9;
  double rmin_scale = 0.5;
  bool preprocess = true;
  std::string out_dir;
};

std::string run_config_to_json(const RunConfig& config);
RunConfig run_config_from_json(const std::string& text);
RunConfig load_run_config(const std::string& path);

struct RunResult {
  int exit_code = 0;
  StandardLp problem;      // as loaded or generated
  StandardLp sim_problem;  // after preprocessing and cost scaling by gamma
  AgentGraph graph;
  TriggerConfig trigger_config;
  HybridTrajectory trajectory;
  std::optional<KktPoint> oracle_point;  // absent beyond the desk-scale limit
  double final_error_inf = std::numeric_limits<double>::quiet_NaN();
  bool rounded_matches_oracle = false;
  Metrics metrics;
};

/// Full pipeline: resolve the problem, preprocess, validate the trigger
/// parameters, simulate, audit, and write trajectory.csv, events.csv,
/// metrics.txt and config.echo under config.out_dir (when set). Exit code is
/// nonzero on zeno-abort or divergence.
RunResult run(const RunConfig& config);

/// Re-runs the audits on saved artifacts (config.echo + trajectory.csv in
/// run_dir) and returns them as metrics.
Metrics audit_run(const std::string& run_dir);

}  // namespace etlp
