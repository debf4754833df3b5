// Command-line front end: problem generation, preprocessing, oracle solves,
// event-triggered simulation runs, and audits over saved trajectories.

#include <cstdio>
#include <filesystem>
#include <future>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "etlp/assignment.hpp"
#include "etlp/io.hpp"
#include "etlp/oracle.hpp"
#include "etlp/runner.hpp"
#include "etlp/topology.hpp"
#include "etlp/triggers.hpp"

namespace {

namespace fs = std::filesystem;

void print_point(const char* label, const etlp::KktPoint& pt) {
  std::printf("%s\n  x =", label);
  for (Eigen::Index i = 0; i < pt.x.size(); ++i) std::printf(" %.12g", pt.x[i]);
  std::printf("\n  z =");
  for (Eigen::Index i = 0; i < pt.z.size(); ++i) std::printf(" %.12g", pt.z[i]);
  std::printf("\n");
}

int cmd_gen_assignment(int n, uint64_t seed, const std::vector<double>& benefits,
                       const std::string& out_dir) {
  etlp::AssignmentSpec spec;
  if (!benefits.empty()) {
    if (static_cast<int>(benefits.size()) != n * n) {
      std::fprintf(stderr, "error: --benefits needs %d entries (row-major), got %zu\n", n * n,
                   benefits.size());
      return 2;
    }
    spec.N = n;
    spec.benefits.resize(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) spec.benefits(i, j) = benefits[i * n + j];
  } else {
    spec = etlp::AssignmentSpec::random(n, seed);
  }
  const etlp::StandardLp lp = etlp::generate_assignment(spec);
  fs::create_directories(out_dir);
  const std::string path = (fs::path(out_dir) / "problem.json").string();
  etlp::save_problem(lp, path);
  std::printf("wrote %s (n = %d, m = %d)\n", path.c_str(), static_cast<int>(lp.n()),
              static_cast<int>(lp.m()));
  return 0;
}

int cmd_solve_oracle(const std::string& problem_path, double gamma, bool with_qp) {
  const etlp::StandardLp lp = etlp::load_problem(problem_path);
  const etlp::KktPoint lp_pt = etlp::oracle_solve_lp(lp);
  print_point("LP solution", lp_pt);
  std::printf("  objective = %.12g\n", etlp::lp_objective(lp, lp_pt.x));
  if (with_qp) {
    const etlp::KktPoint qp_pt = etlp::oracle_solve_qp(etlp::RegularizedQp{lp, gamma});
    std::printf("regularized (gamma = %g)\n", gamma);
    print_point("QP solution", qp_pt);
  }
  return 0;
}

int cmd_preprocess(const std::string& problem_path, const std::string& out_dir) {
  const etlp::StandardLp lp = etlp::load_problem(problem_path);
  const etlp::AgentGraph graph = etlp::build_graph(lp);
  const etlp::ScalingResult scaling = etlp::max_consensus_scale(lp, graph);
  fs::create_directories(out_dir);
  const std::string path = (fs::path(out_dir) / "problem.scaled.json").string();
  etlp::save_problem(scaling.scaled, path);
  const double rho_before = etlp::spectral_radius_ata(lp);
  const double rho_after = etlp::spectral_radius_ata(scaling.scaled);
  std::printf("rho_star = %.12g (consensus rounds = %d)\n", scaling.rho_star, scaling.rounds);
  std::printf("rho(A'A) = %.12g before, %.12g after scaling\n", rho_before, rho_after);
  std::printf("wrote %s\n", path.c_str());
  return rho_after <= 1.0 + 1e-9 ? 0 : 1;
}

int run_once(etlp::RunConfig config) {
  const etlp::RunResult result = etlp::run(config);
  std::printf("status = %s, jumps = %ld, broadcasts = %ld\n",
              etlp::to_string(result.trajectory.status).c_str(), result.trajectory.total_jumps,
              result.trajectory.agent_broadcasts);
  if (result.oracle_point.has_value())
    std::printf("final |x - x*|_inf = %.6g\n", result.final_error_inf);
  if (!config.out_dir.empty()) std::printf("artifacts under %s\n", config.out_dir.c_str());
  return result.exit_code;
}

int cmd_simulate(etlp::RunConfig config, int sweep) {
  if (sweep <= 1) return run_once(std::move(config));
  std::vector<std::future<int>> futures;
  futures.reserve(sweep);
  const std::string base_out = config.out_dir;
  for (int k = 0; k < sweep; ++k) {
    etlp::RunConfig c = config;
    c.seed = config.seed + static_cast<uint64_t>(k);
    if (!base_out.empty())
      c.out_dir = (fs::path(base_out) / ("seed_" + std::to_string(c.seed))).string();
    futures.push_back(std::async(std::launch::async, [c] { return etlp::run(c).exit_code; }));
  }
  int worst = 0;
  for (auto& f : futures) worst = std::max(worst, f.get());
  std::printf("sweep of %d runs finished, worst exit code %d\n", sweep, worst);
  return worst;
}

int cmd_audit(const std::string& run_dir) {
  const etlp::Metrics metrics = etlp::audit_run(run_dir);
  for (const auto& [k, v] : metrics.entries) std::printf("%s = %s\n", k.c_str(), v.c_str());
  long violations = 0;
  for (const auto& [k, v] : metrics.entries)
    if (k.find("violations") != std::string::npos) violations += std::stol(v);
  return violations == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed linear programming with event-triggered broadcasts"};
  app.require_subcommand(1);

  // gen-assignment
  auto* gen = app.add_subcommand("gen-assignment", "Generate an assignment-problem LP");
  int gen_n = 2;
  uint64_t gen_seed = 1;
  std::vector<double> gen_benefits;
  std::string gen_out = ".";
  gen->add_option("--n", gen_n, "Number of agents/tasks")->check(CLI::Range(2, 100));
  gen->add_option("--seed", gen_seed, "Seed for random benefits");
  gen->add_option("--benefits", gen_benefits, "Row-major benefit entries (n*n values)")
      ->delimiter(',');
  gen->add_option("--out", gen_out, "Output directory for problem.json");

  // solve-oracle
  auto* oracle = app.add_subcommand("solve-oracle", "Solve a problem with the reference solvers");
  std::string oracle_problem;
  double oracle_gamma = 1.0;
  bool oracle_qp = false;
  oracle->add_option("--problem", oracle_problem, "Problem file")->required();
  oracle->add_option("--gamma", oracle_gamma, "Regularization weight for --qp");
  oracle->add_flag("--qp", oracle_qp, "Also solve the quadratic regularization");

  // preprocess
  auto* pre = app.add_subcommand("preprocess", "Scale a problem so rho(A'A) <= 1");
  std::string pre_problem, pre_out = ".";
  pre->add_option("--problem", pre_problem, "Problem file")->required();
  pre->add_option("--out", pre_out, "Output directory for problem.scaled.json");

  // simulate
  auto* sim = app.add_subcommand("simulate", "Run the event-triggered execution");
  etlp::RunConfig config;
  std::string sim_mode = "distributed";
  std::string sim_config_path;
  bool no_preprocess = false;
  int sweep = 1;
  sim->add_option("--problem", config.problem_path, "Problem file");
  sim->add_option("--config", sim_config_path, "Load a saved run config (config.echo)");
  sim->add_option("--mode", sim_mode, "centralized or distributed")
      ->check(CLI::IsMember({"centralized", "distributed"}));
  sim->add_option("--gamma", config.gamma, "Cost weight of the executed regularization");
  sim->add_option("--t-max", config.t_max, "Simulated-time horizon");
  sim->add_option("--j-max", config.j_max, "Jump budget");
  sim->add_option("--noise-std", config.noise_std, "Broadcast noise standard deviation");
  sim->add_option("--seed", config.seed, "Noise seed");
  sim->add_option("--out", config.out_dir, "Output directory for run artifacts");
  sim->add_option("--mu", config.mu, "Error-trigger parameter for every agent");
  sim->add_option("--tau-scale", config.tau_scale,
                  "tau as a fraction of each agent's admissible upper bound");
  sim->add_option("--rmin-scale", config.rmin_scale, "r_min as a fraction of tau");
  sim->add_flag("--no-preprocess", no_preprocess, "Skip the max-consensus scaling");
  sim->add_option("--sweep", sweep, "Fan out this many seeded runs")->check(CLI::Range(1, 10000));

  // audit
  auto* audit = app.add_subcommand("audit", "Re-run audits on saved run artifacts");
  std::string audit_dir;
  audit->add_option("--run", audit_dir, "Run directory holding config.echo and trajectory.csv")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_gen_assignment(gen_n, gen_seed, gen_benefits, gen_out);
    if (oracle->parsed())
      return cmd_solve_oracle(oracle_problem, oracle_gamma, oracle_qp || oracle_gamma != 1.0);
    if (pre->parsed()) return cmd_preprocess(pre_problem, pre_out);
    if (sim->parsed()) {
      if (!sim_config_path.empty()) {
        const std::string out_override = config.out_dir;
        config = etlp::load_run_config(sim_config_path);
        if (!out_override.empty()) config.out_dir = out_override;
      } else {
        config.mode = etlp::trigger_mode_from_string(sim_mode);
        config.preprocess = !no_preprocess;
      }
      if (config.problem_path.empty() && config.problem_json.empty() &&
          !config.generator.has_value()) {
        std::fprintf(stderr, "error: simulate needs --problem or --config\n");
        return 2;
      }
      return cmd_simulate(std::move(config), sweep);
    }
    if (audit->parsed()) return cmd_audit(audit_dir);
  } catch (const etlp::OracleError& e) {
    std::fprintf(stderr, "oracle error: %s\n", e.what());
    return 3;
  } catch (const etlp::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
