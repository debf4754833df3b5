#include <doctest.h>

#include <cmath>
#include <random>

#include "etlp/assignment.hpp"
#include "etlp/oracle.hpp"
#include "etlp/sim.hpp"
#include "test_support.hpp"

using namespace etlp;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

StandardLp scalar_lp(double a, double b, double c) {
  return StandardLp::from_entries(1, 1, Eigen::VectorXd::Constant(1, c),
                                  Eigen::VectorXd::Constant(1, b), {{0, 0, a}});
}

struct AssignmentFixture {
  StandardLp lp;
  AgentGraph graph;
  TriggerConfig cfg;
  LagrangianParams params;

  explicit AssignmentFixture(TriggerMode mode = TriggerMode::kDistributed) {
    const StandardLp raw = generate_assignment(example_assignment());
    lp = max_consensus_scale(raw, build_graph(raw)).scaled;
    graph = build_graph(lp);
    cfg = mode == TriggerMode::kDistributed ? TriggerConfig::distributed_defaults(graph)
                                            : TriggerConfig::centralized();
    const KktPoint saddle = oracle_solve_qp(RegularizedQp{lp, 1.0});
    params = LagrangianParams{0.0, SaddleReference{saddle.x, saddle.z}};
  }

  NetworkState default_init() const {
    return NetworkState::synchronized(lp, Eigen::VectorXd::Constant(4, 0.5),
                                      Eigen::VectorXd::Zero(4));
  }

  SimOptions options() const {
    SimOptions opts;
    opts.diagnostics = params;
    return opts;
  }
};

}  // namespace

TEST_CASE("next event time matches the hand-solved error-trigger root") {
  const StandardLp lp = scalar_lp(1.0, 1.0, 0.0);
  const AgentGraph graph = build_graph(lp);
  const TriggerConfig cfg = TriggerConfig::distributed_defaults(graph);
  const NetworkState state = NetworkState::synchronized(lp, vec({0.0}), vec({0.0}));
  // f_hat = 1 and xdot = 1, so the error reaches sqrt(mu)*|f_hat| at sqrt(mu).
  const NextEvent ne = next_event_time(lp, graph, cfg, state);
  CHECK(ne.dt == doctest::Approx(std::sqrt(cfg.mu[0])).epsilon(1e-12));
  REQUIRE_FALSE(ne.imminent.empty());
  CHECK((ne.imminent.causes_union() & kCauseE));
}

TEST_CASE("equilibrium states never trigger") {
  SUBCASE("centralized at the saddle") {
    AssignmentFixture fx(TriggerMode::kCentralized);
    // Exactly representable saddle: every trigger guard is bitwise off.
    const NetworkState state =
        NetworkState::synchronized(fx.lp, vec({0, 1, 1, 0}), vec({28, 38, 38, 28}));
    const NextEvent ne = next_event_time(fx.lp, fx.graph, fx.cfg, state);
    CHECK(std::isinf(ne.dt));
  }
  SUBCASE("distributed with a strictly positive solution") {
    const StandardLp lp = scalar_lp(1.0, 1.0, 0.0);
    const AgentGraph graph = build_graph(lp);
    const TriggerConfig cfg = TriggerConfig::distributed_defaults(graph);
    const KktPoint saddle = oracle_solve_qp(RegularizedQp{lp, 1.0});
    const NetworkState state = NetworkState::synchronized(lp, saddle.x, saddle.z);
    CHECK(std::isinf(next_event_time(lp, graph, cfg, state).dt));
  }
}

TEST_CASE("zero crossings are detected at the exact linear root") {
  AssignmentFixture fx;
  // Broadcasting the saddle multipliers pulls the two losing brokers down:
  // f_hat = (-12, 0.5, 0.5, -7), so component 0 crosses zero at 0.5/12 long
  // before any error trigger (whose earliest root is sqrt(mu) ~ 0.079).
  const NetworkState state =
      NetworkState::synchronized(fx.lp, Eigen::VectorXd::Constant(4, 0.5),
                                 vec({28, 38, 38, 28}));
  const FlowRates rates = flow_rates(fx.lp, state);
  REQUIRE(rates.xdot[0] == doctest::Approx(-12.0));
  const double t_cross = 0.5 / 12.0;
  const NextEvent ne = next_event_time(fx.lp, fx.graph, fx.cfg, state);
  CHECK(ne.dt == doctest::Approx(t_cross).epsilon(1e-12));
  CHECK((ne.imminent.causes_union() & kCauseZero));
  const NetworkState advanced = advance_flow(fx.lp, fx.cfg, state, ne.dt, ne.snap_to_zero);
  CHECK(advanced.x[0] == 0.0);
}

TEST_CASE("closed-form event times agree with the bisection oracle") {
  std::mt19937_64 rng(1234);
  int compared = 0;
  for (int trial = 0; trial < 120 && compared < 1000; ++trial) {
    const StandardLp lp = test::random_feasible_lp(rng);
    const AgentGraph graph = build_graph(lp);
    for (TriggerMode mode : {TriggerMode::kDistributed, TriggerMode::kCentralized}) {
      const TriggerConfig cfg = mode == TriggerMode::kDistributed
                                    ? TriggerConfig::distributed_defaults(graph)
                                    : TriggerConfig::centralized();
      for (int k = 0; k < 5; ++k) {
        NetworkState state;
        try {
          state = test::random_flow_state(lp, graph, cfg, rng);
        } catch (const std::exception&) {
          continue;
        }
        const NextEvent ne = next_event_time(lp, graph, cfg, state);
        const double horizon = std::isfinite(ne.dt) ? 2.0 * ne.dt + 0.1 : 5.0;
        const double ref = test::bisect_first_event(lp, graph, cfg, state, horizon);
        CAPTURE(trial);
        CAPTURE(static_cast<int>(mode));
        if (std::isfinite(ne.dt) || std::isfinite(ref)) {
          REQUIRE(std::isfinite(ne.dt));
          REQUIRE(std::isfinite(ref));
          CHECK(std::abs(ne.dt - ref) <= 1e-10 * (1.0 + ref));
        }
        ++compared;
      }
    }
  }
  CHECK(compared >= 1000);
}

TEST_CASE("flow advance is oblivious to sampling density") {
  AssignmentFixture fx;
  std::mt19937_64 rng(4);
  const NetworkState state = test::random_flow_state(fx.lp, fx.graph, fx.cfg, rng);
  const double dt = 0.002;
  const NetworkState coarse = advance_flow(fx.lp, fx.cfg, state, dt);
  NetworkState fine = state;
  for (int k = 0; k < 10; ++k) fine = advance_flow(fx.lp, fx.cfg, fine, dt / 10.0);
  CHECK((coarse.x - fine.x).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((coarse.z - fine.z).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("distributed assignment run converges to the oracle solution") {
  AssignmentFixture fx;
  const HybridTrajectory traj = simulate(fx.lp, fx.graph, fx.cfg, fx.default_init(),
                                         Horizon{60.0, 2000000}, {}, fx.options());
  REQUIRE(traj.status == SimStatus::kCompleted);
  const Eigen::VectorXd target = vec({0, 1, 1, 0});
  CHECK((traj.samples.back().x - target).cwiseAbs().maxCoeff() <= 0.05);
  CHECK(traj.containment_violations == 0);
  CHECK_FALSE(traj.zeno_suspected);

  SUBCASE("true states never leave the nonnegative orthant") {
    double min_x = 0.0;
    for (const Sample& s : traj.samples) min_x = std::min(min_x, s.x.minCoeff());
    CHECK(min_x >= -1e-12);
  }
  SUBCASE("the lyapunov audit is clean") {
    const LyapunovReport report = lyapunov_audit(traj, fx.lp, fx.params);
    CHECK(report.violations == 0);
  }
  SUBCASE("the mismatch audit passes everywhere") {
    const MismatchReport report = mode_mismatch_audit(traj, fx.lp, fx.graph, fx.cfg);
    CHECK(report.bound_violations == 0);
    CHECK(report.duration_violations == 0);
  }
  SUBCASE("cumulative broadcasts grow linearly in steady state") {
    std::vector<std::pair<double, double>> pts;
    long count = 0;
    for (const BroadcastEvent& e : traj.events) {
      ++count;
      if (e.t >= 30.0) pts.emplace_back(e.t, static_cast<double>(count));
    }
    REQUIRE(pts.size() > 100);
    CHECK(test::linear_fit_r2(pts) >= 0.9);
  }
}

TEST_CASE("a centralized run from the saddle flows forever with no broadcasts") {
  AssignmentFixture fx(TriggerMode::kCentralized);
  const NetworkState init =
      NetworkState::synchronized(fx.lp, vec({0, 1, 1, 0}), vec({28, 38, 38, 28}));
  const HybridTrajectory traj =
      simulate(fx.lp, fx.graph, fx.cfg, init, Horizon{50.0, 1000}, {}, fx.options());
  CHECK(traj.status == SimStatus::kCompleted);
  CHECK(traj.events.empty());
  CHECK(traj.persistence == Persistence::kPFi);
  const LyapunovReport report = lyapunov_audit(traj, fx.lp, fx.params);
  CHECK(report.violations == 0);
  CHECK(report.worst_increase <= 0.0);
}

TEST_CASE("event logs are bit-identical across reruns") {
  AssignmentFixture fx;
  const NoiseSpec noise{true, 1.0, 42};
  const Horizon horizon{20.0, 500000};
  const HybridTrajectory a =
      simulate(fx.lp, fx.graph, fx.cfg, fx.default_init(), horizon, noise, fx.options());
  const HybridTrajectory b =
      simulate(fx.lp, fx.graph, fx.cfg, fx.default_init(), horizon, noise, fx.options());
  REQUIRE(a.events.size() == b.events.size());
  for (size_t k = 0; k < a.events.size(); ++k) {
    CHECK(a.events[k].t == b.events[k].t);
    CHECK(a.events[k].j == b.events[k].j);
    CHECK(a.events[k].agent == b.events[k].agent);
    CHECK(a.events[k].causes == b.events[k].causes);
  }
}

TEST_CASE("noisy runs stay near the solution and report rather than fail") {
  AssignmentFixture fx;
  const HybridTrajectory traj = simulate(fx.lp, fx.graph, fx.cfg, fx.default_init(),
                                         Horizon{120.0, 2000000}, NoiseSpec{true, 1.0, 3},
                                         fx.options());
  REQUIRE(traj.status == SimStatus::kCompleted);
  const Eigen::VectorXd target = vec({0, 1, 1, 0});
  for (int i = 0; i < 4; ++i)
    CHECK(std::round(traj.samples.back().x[i]) == doctest::Approx(target[i]));
  const LyapunovReport report = lyapunov_audit(traj, fx.lp, fx.params, /*noise_mode=*/true);
  CHECK(report.noise_mode);
  CHECK(report.worst_increase >= 0.0);  // excursions are expected and recorded
}

TEST_CASE("a forced mismatch fixture satisfies the energy bound with ratio 1/8") {
  // One variable, one constraint: f(x, z) = 2 - 2x - z. Freeze broadcasts at
  // x_hat = 0, z_hat = 2.5 so f_hat = -0.5 keeps the agent out of
  // sigma(hat); the true flow z' = -1 drives f through zero at t = 0.2.
  const StandardLp lp = scalar_lp(1.0, 1.0, -1.0);
  const AgentGraph graph = build_graph(lp);
  const TriggerConfig cfg = TriggerConfig::distributed_defaults(graph);

  HybridTrajectory traj;
  const double z0 = 2.2;
  for (int k = 0; k <= 400; ++k) {
    const double t = k * 0.001;
    Sample s;
    s.t = t;
    s.j = 0;
    s.x = vec({0.0});
    s.z = vec({z0 - t});
    s.x_hat = vec({0.0});
    s.z_hat = vec({2.5});
    traj.samples.push_back(std::move(s));
  }
  const MismatchReport report = mode_mismatch_audit(traj, lp, graph, cfg);
  REQUIRE(report.intervals.size() == 1);
  CHECK(report.intervals[0].agent == 0);
  CHECK(report.intervals[0].bound_ok);
  CHECK(report.intervals[0].t_enter == doctest::Approx(0.2).epsilon(0.01));
  // f grows as (t - T) while the certified envelope grows as 8 (t - T)^2
  // times unit energy, so the measured ratio approaches exactly 1/8.
  CHECK(report.intervals[0].worst_ratio == doctest::Approx(1.0 / 8.0).epsilon(0.05));
  // The same data with frozen hats never clears, so the duration check
  // reflects the configured tau.
  CHECK_FALSE(report.intervals[0].duration_ok);
}

TEST_CASE("mismatch audit is empty without mismatches") {
  AssignmentFixture fx(TriggerMode::kCentralized);
  const NetworkState init =
      NetworkState::synchronized(fx.lp, vec({0, 1, 1, 0}), vec({28, 38, 38, 28}));
  const HybridTrajectory traj =
      simulate(fx.lp, fx.graph, TriggerConfig::centralized(), init, Horizon{10.0, 1000});
  CHECK(mode_mismatch_audit(traj, fx.lp, fx.graph, fx.cfg).intervals.empty());
}

TEST_CASE("simulate enforces its preconditions") {
  AssignmentFixture fx;
  SUBCASE("unsynchronized initial broadcasts are rejected") {
    NetworkState init = fx.default_init();
    init.x_hat[0] += 0.1;
    CHECK_THROWS_AS(simulate(fx.lp, fx.graph, fx.cfg, init, Horizon{1.0, 10}),
                    PreconditionError);
  }
  SUBCASE("invalid trigger parameters are rejected with the violation list") {
    TriggerConfig bad = fx.cfg;
    bad.tau[2] = 1.0;  // far beyond the admissible bound
    CHECK_THROWS_AS(simulate(fx.lp, fx.graph, bad, fx.default_init(), Horizon{1.0, 10}),
                    ConfigError);
  }
  SUBCASE("the jump budget caps the run") {
    const HybridTrajectory traj =
        simulate(fx.lp, fx.graph, fx.cfg, fx.default_init(), Horizon{60.0, 50}, {},
                 fx.options());
    CHECK(traj.total_jumps == 50);
    CHECK(traj.status == SimStatus::kCompleted);  // budget hit without zeno suspicion
    CHECK(traj.final_t < 60.0);
  }
}

TEST_CASE("persistence witness reports recurring dwell times") {
  AssignmentFixture fx;
  const HybridTrajectory traj = simulate(fx.lp, fx.graph, fx.cfg, fx.default_init(),
                                         Horizon{30.0, 2000000}, {}, fx.options());
  CHECK(traj.persistence == Persistence::kPFii);
  CHECK(traj.pf_tau > 0.0);
  CHECK(traj.min_positive_inter_event_dt > 0.0);
}
