#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <vector>

#include "etlp/errors.hpp"

namespace etlp {

using SparseRowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

struct MatrixEntry {
  int row = 0;
  int col = 0;
  double value = 0.0;
};

/// A linear program in standard form: minimize c'x subject to Ax = b, x >= 0.
/// The constraint matrix is stored sparse by row; its sparsity pattern doubles
/// as the communication structure of the agent network (see topology).
struct StandardLp {
  Eigen::VectorXd c;
  SparseRowMatrix A;  // m x n
  Eigen::VectorXd b;

  Eigen::Index n() const { return c.size(); }
  Eigen::Index m() const { return b.size(); }

  static StandardLp from_entries(int n, int m, const Eigen::VectorXd& c,
                                 const Eigen::VectorXd& b,
                                 const std::vector<MatrixEntry>& entries);

  /// Throws DimensionError naming the offending field if the dimensions do
  /// not line up.
  void check_consistent() const;

  Eigen::MatrixXd dense_a() const { return Eigen::MatrixXd(A); }
};

/// Primal-dual candidate produced by the reference solvers or checked by the
/// KKT predicates.
struct KktPoint {
  Eigen::VectorXd x;
  Eigen::VectorXd z;
};

/// The LP with a quadratic term added: minimize gamma*c'x + x'x/2 subject to
/// Ax = b, x >= 0. For gamma at or above a problem-dependent threshold the
/// minimizer is also an LP solution; exactness_probe measures that threshold
/// empirically since it is not computable in closed form.
struct RegularizedQp {
  StandardLp base;
  double gamma = 1.0;
};

/// Ax - b.
Eigen::VectorXd equality_residual(const StandardLp& lp, const Eigen::VectorXd& x);

double lp_objective(const StandardLp& lp, const Eigen::VectorXd& x);
double qp_objective(const RegularizedQp& qp, const Eigen::VectorXd& x);

}  // namespace etlp
