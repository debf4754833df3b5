#pragma once

#include <string>
#include <utility>
#include <vector>

#include "etlp/lp.hpp"
#include "etlp/sim.hpp"

namespace etlp {

/// Problem document: a JSON object with fields `n`, `m`, `c` (array), `b`
/// (array) and `A` (array of {row, col, value} triplets, zero-based).
std::string problem_to_json(const StandardLp& lp);
StandardLp problem_from_json(const std::string& text);
StandardLp load_problem(const std::string& path);
void save_problem(const StandardLp& lp, const std::string& path);

/// Trajectory export, one row per sample. Columns, in order:
/// t, j, x0..x{n-1}, z0..z{m-1}, xhat0.., zhat0.., V, V1, V2, sigma
/// where sigma is the decimal bitmask of the true-state active set
/// (documented for n <= 64). Values use max-precision %.17g.
void write_trajectory_csv(const HybridTrajectory& traj, int n, int m, const std::string& path);
std::vector<Sample> read_trajectory_csv(const std::string& path);

/// Event log, one row per fired agent: t, j, agent, causes where causes is
/// the comma-joined cause-code list (quoted).
void write_events_csv(const HybridTrajectory& traj, const std::string& path);
std::vector<BroadcastEvent> read_events_csv(const std::string& path);

/// Ordered "key = value" lines.
struct Metrics {
  std::vector<std::pair<std::string, std::string>> entries;

  void put(const std::string& key, const std::string& value);
  void put(const std::string& key, double value);
  void put(const std::string& key, long value);
  std::string get(const std::string& key) const;  // throws IoError when absent
  bool has(const std::string& key) const;
};

void write_metrics(const Metrics& metrics, const std::string& path);
Metrics read_metrics(const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace etlp
