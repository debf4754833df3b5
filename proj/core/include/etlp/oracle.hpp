#pragma once

#include <vector>

#include "etlp/lp.hpp"

namespace etlp {

/// Desk-scale limit of the reference solvers: they enumerate candidate
/// support sets exhaustively, which is only sensible for small instances.
inline constexpr int kOracleSizeLimit = 20;

/// Default feasibility tolerance shared by the reference solvers.
inline constexpr double kOracleTol = 1e-8;

struct KktResiduals {
  double stationarity_min = 0.0;  // min_i (c + [x] + A'z)_i, must be >= -tol
  double equality_inf = 0.0;      // ||Ax - b||_inf
  double nonneg_min = 0.0;        // min_i x_i, must be >= -tol
  double complementarity = 0.0;   // |(c + [x] + A'z)'x|
};

KktResiduals kkt_residuals_lp(const StandardLp& lp, const KktPoint& pt);
KktResiduals kkt_residuals_qp(const RegularizedQp& qp, const KktPoint& pt);

/// True iff all four KKT residuals of the LP are within tol:
/// c + A'z >= -tol, |Ax - b| <= tol, x >= -tol, |(c + A'z)'x| <= tol.
bool kkt_check_lp(const StandardLp& lp, const KktPoint& pt, double tol);

/// Same for the regularized problem, with stationarity gamma*c + x + A'z.
bool kkt_check_qp(const RegularizedQp& qp, const KktPoint& pt, double tol);

/// Reference LP solver: enumerates basic feasible solutions over independent
/// column subsets of size rank(A) and certifies optimality with a dual built
/// from the basis. Deterministic; ties among optimal vertices are broken by
/// lexicographic smallness of the primal vector. Throws OracleError with kind
/// infeasible / unbounded / oracle-size-limit.
KktPoint oracle_solve_lp(const StandardLp& lp, double tol = kOracleTol);

/// Reference solver for the quadratic regularization: enumerates subsets of
/// variables pinned at zero and solves each equality-constrained problem via
/// its linear KKT system. The primal answer is unique (strictly convex
/// objective); the dual is the minimum-norm multiplier of the accepted pin
/// set. Throws OracleError as oracle_solve_lp.
KktPoint oracle_solve_qp(const RegularizedQp& qp, double tol = kOracleTol);

struct ExactnessSample {
  double gamma = 0.0;
  bool matches = false;
};

/// For each gamma, reports whether the regularized minimizer is an optimal
/// point of the LP: feasible to 1e-6 and objective within 1e-6 of the LP
/// optimum. This is the empirical stand-in for the (non-constructive)
/// exact-regularization threshold.
std::vector<ExactnessSample> exactness_probe(const StandardLp& lp,
                                             const std::vector<double>& gammas);

}  // namespace etlp
