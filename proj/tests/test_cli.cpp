#include <doctest.h>

#include <filesystem>
#include <random>

#include "etlp/assignment.hpp"
#include "etlp/io.hpp"
#include "etlp/oracle.hpp"
#include "etlp/runner.hpp"
#include "test_support.hpp"

using namespace etlp;

namespace {

namespace fs = std::filesystem;

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("etlp_test_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

}  // namespace

TEST_CASE("the 2x2 assignment generator reproduces the reference data") {
  const StandardLp lp = generate_assignment(example_assignment());
  CHECK(lp.n() == 4);
  CHECK(lp.m() == 4);
  CHECK(lp.c.isApprox(vec({-5, -15, -20, -10})));
  CHECK(lp.b.isApprox(Eigen::VectorXd::Ones(4)));
  const Eigen::MatrixXd a = test::dense(lp);
  Eigen::MatrixXd expected(4, 4);
  expected << 1, 1, 0, 0,  // agent 1 row sum
      0, 0, 1, 1,          // agent 2 row sum
      1, 0, 1, 0,          // task 1 column sum
      0, 1, 0, 1;          // task 2 column sum
  CHECK(a.isApprox(expected));
  // Every variable appears in exactly two constraints.
  for (int col = 0; col < 4; ++col) CHECK(a.col(col).sum() == doctest::Approx(2.0));
}

TEST_CASE("degenerate equal benefits still produce a valid program") {
  AssignmentSpec spec;
  spec.N = 2;
  spec.benefits = Eigen::MatrixXd::Constant(2, 2, 10.0);
  const StandardLp lp = generate_assignment(spec);
  const KktPoint opt = oracle_solve_lp(lp);
  CHECK(kkt_check_lp(lp, opt, 1e-8));
  // Ties resolve to the lexicographically smallest optimal vertex.
  CHECK(opt.x.isApprox(vec({0, 1, 1, 0})));
}

TEST_CASE("random assignments relax to permutation matrices") {
  for (uint64_t seed : {1ull, 2ull, 3ull}) {
    const AssignmentSpec spec = AssignmentSpec::random(3, seed);
    const StandardLp lp = generate_assignment(spec);
    const KktPoint opt = oracle_solve_lp(lp);
    Eigen::MatrixXd assignment(3, 3);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) assignment(i, j) = opt.x[i * 3 + j];
    for (int i = 0; i < 3; ++i) {
      CHECK(assignment.row(i).sum() == doctest::Approx(1.0));
      CHECK(assignment.col(i).sum() == doctest::Approx(1.0));
      for (int j = 0; j < 3; ++j) {
        const double v = assignment(i, j);
        CHECK(std::min(std::abs(v), std::abs(v - 1.0)) < 1e-9);
      }
    }
  }
}

TEST_CASE("generator rejects undersized problems") {
  AssignmentSpec spec;
  spec.N = 1;
  spec.benefits = Eigen::MatrixXd::Ones(1, 1);
  CHECK_THROWS_AS(generate_assignment(spec), PreconditionError);
}

TEST_CASE("problem documents round-trip through json") {
  std::mt19937_64 rng(10);
  const StandardLp lp = test::random_feasible_lp(rng);
  const StandardLp back = problem_from_json(problem_to_json(lp));
  CHECK(back.c.isApprox(lp.c));
  CHECK(back.b.isApprox(lp.b));
  CHECK(Eigen::MatrixXd(back.A).isApprox(Eigen::MatrixXd(lp.A)));
}

TEST_CASE("malformed problem documents raise io errors") {
  CHECK_THROWS_AS(problem_from_json("not json"), IoError);
  CHECK_THROWS_AS(problem_from_json(R"({"n": 2, "m": 1, "c": [1], "b": [1], "A": []})"),
                  IoError);
}

TEST_CASE("an end-to-end noiseless run writes the expected artifacts") {
  TempDir dir;
  RunConfig config;
  config.generator = example_assignment();
  config.t_max = 60.0;
  config.out_dir = (dir.path / "run").string();
  const RunResult result = run(config);
  CHECK(result.exit_code == 0);
  CHECK(result.final_error_inf <= 0.05);
  CHECK(result.metrics.get("lyapunov_violations") == "0");
  CHECK(result.metrics.get("mismatch_bound_violations") == "0");
  for (const char* name : {"trajectory.csv", "events.csv", "metrics.txt", "config.echo"})
    CHECK(fs::exists(dir.path / "run" / name));

  SUBCASE("metrics round-trip") {
    const Metrics metrics = read_metrics((dir.path / "run" / "metrics.txt").string());
    CHECK(metrics.get("status") == "completed");
    CHECK(std::stol(metrics.get("total_broadcasts")) > 0);
  }
  SUBCASE("trajectory and event logs parse back") {
    const auto samples = read_trajectory_csv((dir.path / "run" / "trajectory.csv").string());
    REQUIRE_FALSE(samples.empty());
    CHECK(samples.front().t == 0.0);
    CHECK(samples.back().x.size() == 4);
    const auto events = read_events_csv((dir.path / "run" / "events.csv").string());
    CHECK(events.size() == static_cast<size_t>(std::stol(result.metrics.get("total_broadcasts"))));
  }
  SUBCASE("the saved audit reproduces clean reports") {
    const Metrics audit = audit_run((dir.path / "run").string());
    CHECK(audit.get("lyapunov_violations") == "0");
    CHECK(audit.get("mismatch_bound_violations") == "0");
    CHECK(audit.get("mismatch_duration_violations") == "0");
  }
}

TEST_CASE("a saved run config reproduces the event log byte for byte") {
  TempDir dir;
  RunConfig config;
  config.generator = example_assignment();
  config.mode = TriggerMode::kDistributed;
  config.t_max = 25.0;
  config.noise_std = 1.0;
  config.seed = 11;
  config.out_dir = (dir.path / "a").string();
  run(config);

  RunConfig replay = load_run_config((dir.path / "a" / "config.echo").string());
  CHECK(replay.problem_json.find("\"n\"") != std::string::npos);
  replay.out_dir = (dir.path / "b").string();
  run(replay);

  const std::string first = read_text_file((dir.path / "a" / "events.csv").string());
  const std::string second = read_text_file((dir.path / "b" / "events.csv").string());
  CHECK(first == second);
}

TEST_CASE("noisy runs land within rounding distance of the assignment") {
  RunConfig config;
  config.generator = example_assignment();
  config.t_max = 120.0;
  config.noise_std = 1.0;
  config.seed = 5;
  const RunResult result = run(config);
  CHECK(result.exit_code == 0);
  CHECK(result.rounded_matches_oracle);
}

TEST_CASE("centralized runs converge as well") {
  RunConfig config;
  config.generator = example_assignment();
  config.mode = TriggerMode::kCentralized;
  config.t_max = 60.0;
  const RunResult result = run(config);
  CHECK(result.exit_code == 0);
  CHECK(result.final_error_inf <= 0.05);
  CHECK(result.metrics.get("lyapunov_violations") == "0");
}

TEST_CASE("run configs without a problem are rejected with guidance") {
  RunConfig config;
  CHECK_THROWS_WITH_AS(run(config), doctest::Contains("names no problem"), ConfigError);
}
