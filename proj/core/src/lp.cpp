#include "etlp/lp.hpp"

#include <string>
#include <vector>

namespace etlp {

StandardLp StandardLp::from_entries(int n, int m, const Eigen::VectorXd& c,
                                    const Eigen::VectorXd& b,
                                    const std::vector<MatrixEntry>& entries) {
  if (n < 0 || m < 0) throw DimensionError("n and m must be nonnegative");
  StandardLp lp;
  lp.c = c;
  lp.b = b;
  lp.A.resize(m, n);
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(entries.size());
  for (const auto& e : entries) {
    if (e.row < 0 || e.row >= m)
      throw DimensionError("A entry row " + std::to_string(e.row) + " out of range [0," +
                           std::to_string(m) + ")");
    if (e.col < 0 || e.col >= n)
      throw DimensionError("A entry col " + std::to_string(e.col) + " out of range [0," +
                           std::to_string(n) + ")");
    triplets.emplace_back(e.row, e.col, e.value);
  }
  lp.A.setFromTriplets(triplets.begin(), triplets.end());
  lp.check_consistent();
  return lp;
}

void StandardLp::check_consistent() const {
  if (A.rows() != m())
    throw DimensionError("A has " + std::to_string(A.rows()) + " rows but |b| = " +
                         std::to_string(m()));
  if (A.cols() != n())
    throw DimensionError("A has " + std::to_string(A.cols()) + " cols but |c| = " +
                         std::to_string(n()));
}

Eigen::VectorXd equality_residual(const StandardLp& lp, const Eigen::VectorXd& x) {
  if (x.size() != lp.n()) throw DimensionError("x has wrong length for residual");
  return lp.A * x - lp.b;
}

double lp_objective(const StandardLp& lp, const Eigen::VectorXd& x) {
  return lp.c.dot(x);
}

double qp_objective(const RegularizedQp& qp, const Eigen::VectorXd& x) {
  return qp.gamma * qp.base.c.dot(x) + 0.5 * x.squaredNorm();
}

}  // namespace etlp
