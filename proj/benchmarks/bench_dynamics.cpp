#include <benchmark/benchmark.h>

#include "etlp/assignment.hpp"
#include "etlp/dynamics.hpp"
#include "etlp/topology.hpp"

namespace {

etlp::StandardLp scaled_assignment(int agents) {
  const etlp::AssignmentSpec spec = etlp::AssignmentSpec::random(agents, 7);
  const etlp::StandardLp lp = etlp::generate_assignment(spec);
  return etlp::max_consensus_scale(lp, etlp::build_graph(lp)).scaled;
}

void BM_flow_map(benchmark::State& state) {
  const etlp::StandardLp lp = scaled_assignment(static_cast<int>(state.range(0)));
  const etlp::PrimalDualPoint pt{Eigen::VectorXd::Constant(lp.n(), 0.5),
                                 Eigen::VectorXd::Zero(lp.m())};
  for (auto _ : state) benchmark::DoNotOptimize(etlp::flow_f(lp, pt));
}
BENCHMARK(BM_flow_map)->Arg(2)->Arg(4)->Arg(8);

void BM_projected_flow(benchmark::State& state) {
  const etlp::StandardLp lp = scaled_assignment(static_cast<int>(state.range(0)));
  const etlp::BroadcastState hat{Eigen::VectorXd::Constant(lp.n(), 0.5),
                                 Eigen::VectorXd::Zero(lp.m())};
  for (auto _ : state) benchmark::DoNotOptimize(etlp::projected_flow(lp, hat));
}
BENCHMARK(BM_projected_flow)->Arg(2)->Arg(4)->Arg(8);

}  // namespace
