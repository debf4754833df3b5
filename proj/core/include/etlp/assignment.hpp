#pragma once

#include <cstdint>

#include "etlp/lp.hpp"

namespace etlp {

/// N-agent / N-task assignment instance. The relaxed problem has n = N^2
/// variables (x_{i,j} in row-major order), m = 2N equality constraints (the
/// N row sums followed by the N column sums), and every variable appears in
/// exactly two constraints.
struct AssignmentSpec {
  int N = 2;
  Eigen::MatrixXd benefits;  // N x N, nonnegative

  static AssignmentSpec random(int N, uint64_t seed);
};

/// The minimization LP of the relaxation: c is the negated benefit matrix
/// flattened row-major, b is all ones.
StandardLp generate_assignment(const AssignmentSpec& spec);

/// The 2x2 instance used throughout the tests: benefits {{5, 15}, {20, 10}},
/// optimal assignment (0, 1, 1, 0).
AssignmentSpec example_assignment();

}  // namespace etlp
