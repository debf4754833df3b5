#include "etlp/assignment.hpp"

#include <random>
#include <vector>

namespace etlp {

AssignmentSpec AssignmentSpec::random(int N, uint64_t seed) {
  AssignmentSpec spec;
  spec.N = N;
  spec.benefits.resize(N, N);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(1.0, 30.0);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) spec.benefits(i, j) = dist(rng);
  return spec;
}

StandardLp generate_assignment(const AssignmentSpec& spec) {
  if (spec.N < 2) throw PreconditionError("assignment requires N >= 2");
  if (spec.benefits.rows() != spec.N || spec.benefits.cols() != spec.N)
    throw DimensionError("benefits must be N x N");
  const int N = spec.N;
  const int n = N * N;
  const int m = 2 * N;

  Eigen::VectorXd c(n);
  std::vector<MatrixEntry> entries;
  entries.reserve(2 * n);
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < N; ++j) {
      const int var = i * N + j;
      c[var] = -spec.benefits(i, j);
      entries.push_back({i, var, 1.0});      // agent i assigned exactly once
      entries.push_back({N + j, var, 1.0});  // task j assigned exactly once
    }
  }
  return StandardLp::from_entries(n, m, c, Eigen::VectorXd::Ones(m), entries);
}

AssignmentSpec example_assignment() {
  AssignmentSpec spec;
  spec.N = 2;
  spec.benefits.resize(2, 2);
  spec.benefits << 5.0, 15.0, 20.0, 10.0;
  return spec;
}

}  // namespace etlp
