#include <benchmark/benchmark.h>

#include "etlp/assignment.hpp"
#include "etlp/oracle.hpp"
#include "etlp/sim.hpp"

namespace {

struct Fixture {
  etlp::StandardLp lp;
  etlp::AgentGraph graph;
  etlp::TriggerConfig cfg;

  Fixture() {
    const etlp::StandardLp raw = etlp::generate_assignment(etlp::example_assignment());
    lp = etlp::max_consensus_scale(raw, etlp::build_graph(raw)).scaled;
    graph = etlp::build_graph(lp);
    cfg = etlp::TriggerConfig::distributed_defaults(graph);
  }

  etlp::NetworkState init() const {
    return etlp::NetworkState::synchronized(lp, Eigen::VectorXd::Constant(lp.n(), 0.5),
                                            Eigen::VectorXd::Zero(lp.m()));
  }
};

void BM_next_event_time(benchmark::State& state) {
  const Fixture fx;
  const etlp::NetworkState s0 = fx.init();
  for (auto _ : state)
    benchmark::DoNotOptimize(etlp::next_event_time(fx.lp, fx.graph, fx.cfg, s0));
}
BENCHMARK(BM_next_event_time);

void BM_simulate_short_horizon(benchmark::State& state) {
  const Fixture fx;
  for (auto _ : state) {
    benchmark::DoNotOptimize(etlp::simulate(fx.lp, fx.graph, fx.cfg, fx.init(),
                                            etlp::Horizon{double(state.range(0)), 1000000}));
  }
}
BENCHMARK(BM_simulate_short_horizon)->Arg(1)->Arg(5)->Arg(20)->Unit(benchmark::kMillisecond);

}  // namespace
