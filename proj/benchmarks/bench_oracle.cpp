#include <benchmark/benchmark.h>

#include "etlp/assignment.hpp"
#include "etlp/oracle.hpp"

namespace {

void BM_lp_oracle_assignment(benchmark::State& state) {
  const etlp::StandardLp lp =
      etlp::generate_assignment(etlp::AssignmentSpec::random(static_cast<int>(state.range(0)), 3));
  for (auto _ : state) benchmark::DoNotOptimize(etlp::oracle_solve_lp(lp));
}
BENCHMARK(BM_lp_oracle_assignment)->Arg(2)->Arg(3)->Arg(4);

void BM_qp_oracle_assignment(benchmark::State& state) {
  const etlp::StandardLp lp =
      etlp::generate_assignment(etlp::AssignmentSpec::random(static_cast<int>(state.range(0)), 3));
  const etlp::RegularizedQp qp{lp, 1.0};
  for (auto _ : state) benchmark::DoNotOptimize(etlp::oracle_solve_qp(qp));
}
BENCHMARK(BM_qp_oracle_assignment)->Arg(2)->Arg(3);

}  // namespace
