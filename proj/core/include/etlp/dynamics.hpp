#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "etlp/lp.hpp"

namespace etlp {

struct PrimalDualPoint {
  Eigen::VectorXd x;
  Eigen::VectorXd z;
};

/// Last-broadcast values. The flow is driven entirely by these, never by the
/// true states.
struct BroadcastState {
  Eigen::VectorXd x_hat;
  Eigen::VectorXd z_hat;
};

/// Indices whose primal components evolve unclamped: f_i >= 0 or x_i > 0,
/// both tested exactly (no epsilon).
struct ActiveSet {
  std::vector<int> members;  // sorted ascending

  bool contains(int i) const;
  uint64_t mask() const;  // valid for n <= 64
  bool operator==(const ActiveSet&) const = default;
};

ActiveSet set_difference(const ActiveSet& a, const ActiveSet& b);
bool is_subset(const ActiveSet& a, const ActiveSet& b);

/// Sum over members of v_i^2 (the selector quadratic form v' I_S v).
double selector_quadratic(const ActiveSet& s, const Eigen::VectorXd& v);

/// The unprojected primal descent direction -(A'z + c + x) - A'(Ax - b).
Eigen::VectorXd flow_f(const StandardLp& lp, const PrimalDualPoint& pt);

ActiveSet active_set(const StandardLp& lp, const PrimalDualPoint& pt);

/// The projected saddle-point vector field evaluated at broadcast values:
/// xdot_i = f_i(hat) when xhat_i > 0, max{0, f_i(hat)} when xhat_i = 0
/// (equivalently I_sigma(hat) f(hat)); zdot = A xhat - b.
/// Requires hat.x_hat >= 0.
std::pair<Eigen::VectorXd, Eigen::VectorXd> projected_flow(const StandardLp& lp,
                                                           const BroadcastState& hat);

/// Saddle point of the augmented Lagrangian, computed by the reference QP
/// solver. Used for diagnostics only; the executed dynamics never see it.
struct SaddleReference {
  Eigen::VectorXd x_bar;
  Eigen::VectorXd z_bar;
};

struct LagrangianParams {
  double penalty_k = 0.0;  // weight of the one-sided penalty on x < 0
  std::optional<SaddleReference> saddle;
};

/// c'x + x'x/2 + ||Ax-b||^2/2 + z'(Ax-b) + K sum_i max{0, -x_i}.
double lagrangian(const StandardLp& lp, const LagrangianParams& params,
                  const PrimalDualPoint& pt);

/// ||x - xbar||^2/2 + ||z - zbar||^2/2. Throws PreconditionError when the
/// saddle reference is missing.
double lyapunov_v1(const LagrangianParams& params, const PrimalDualPoint& pt);

/// f' I_sigma f / 2 + ||Ax-b||^2/2, evaluated with sigma at the true point;
/// piecewise smooth, zero exactly on the saddle set.
double lyapunov_v2(const StandardLp& lp, const PrimalDualPoint& pt);

double lyapunov_v(const StandardLp& lp, const LagrangianParams& params,
                  const PrimalDualPoint& pt);

struct LieBoundReport {
  double lhs = 0.0;   // measured directional derivative of V along F(hat)
  double rhs = 0.0;   // certified upper bound at this state pair
  bool holds = false; // lhs <= rhs + tol_fd
  bool used_central = false;
};

/// Numerically checks the decrease certificate for V along the projected
/// flow at broadcast values: the directional derivative must not exceed
///   -f(hat)'I_sigma(hat)f(hat)/2 - ||A xhat - b||^2/4
///   + 40||e_x||^2 + 20||e_z||^2 + 15 f(pt)'I_{sigma(pt)\sigma(hat)}f(pt).
/// Preconditions: sigma(hat) subset of sigma(pt) and sigma constant along the
/// step; violations raise ModePreconditionError rather than reporting a bound
/// failure. V restricted to a constant-sigma segment is an exact quadratic in
/// the step, so the differencing stencils below are exact up to rounding.
/// tol_fd < 0 selects the default 1e-8 * (1 + |V(pt)|).
LieBoundReport lie_derivative_check(const StandardLp& lp, const LagrangianParams& params,
                                    const PrimalDualPoint& pt, const BroadcastState& hat,
                                    double h = 1e-6, double tol_fd = -1.0);

/// True iff lie_derivative_check would not raise ModePreconditionError.
bool lie_preconditions_hold(const StandardLp& lp, const PrimalDualPoint& pt,
                            const BroadcastState& hat, double h = 1e-6);

}  // namespace etlp
