#include "etlp/dynamics.hpp"

#include <algorithm>
#include <cmath>

namespace etlp {

bool ActiveSet::contains(int i) const {
  return std::binary_search(members.begin(), members.end(), i);
}

uint64_t ActiveSet::mask() const {
  uint64_t m = 0;
  for (int i : members)
    if (i < 64) m |= (uint64_t{1} << i);
  return m;
}

ActiveSet set_difference(const ActiveSet& a, const ActiveSet& b) {
  ActiveSet out;
  std::set_difference(a.members.begin(), a.members.end(), b.members.begin(), b.members.end(),
                      std::back_inserter(out.members));
  return out;
}

bool is_subset(const ActiveSet& a, const ActiveSet& b) {
  return std::includes(b.members.begin(), b.members.end(), a.members.begin(), a.members.end());
}

double selector_quadratic(const ActiveSet& s, const Eigen::VectorXd& v) {
  double sum = 0.0;
  for (int i : s.members) sum += v[i] * v[i];
  return sum;
}

namespace {

void check_pt_dims(const StandardLp& lp, const Eigen::VectorXd& x, const Eigen::VectorXd& z) {
  if (x.size() != lp.n())
    throw DimensionError("x has length " + std::to_string(x.size()) + ", expected n = " +
                         std::to_string(lp.n()));
  if (z.size() != lp.m())
    throw DimensionError("z has length " + std::to_string(z.size()) + ", expected m = " +
                         std::to_string(lp.m()));
}

}  // namespace

Eigen::VectorXd flow_f(const StandardLp& lp, const PrimalDualPoint& pt) {
  lp.check_consistent();
  check_pt_dims(lp, pt.x, pt.z);
  Eigen::VectorXd f = -(lp.A.transpose() * pt.z + lp.c + pt.x);
  if (lp.m() > 0) f -= lp.A.transpose() * (lp.A * pt.x - lp.b);
  return f;
}

ActiveSet active_set(const StandardLp& lp, const PrimalDualPoint& pt) {
  const Eigen::VectorXd f = flow_f(lp, pt);
  ActiveSet s;
  for (int i = 0; i < static_cast<int>(lp.n()); ++i)
    if (f[i] >= 0.0 || pt.x[i] > 0.0) s.members.push_back(i);
  return s;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> projected_flow(const StandardLp& lp,
                                                           const BroadcastState& hat) {
  check_pt_dims(lp, hat.x_hat, hat.z_hat);
  if (hat.x_hat.size() > 0 && hat.x_hat.minCoeff() < 0.0)
    throw PreconditionError("projected_flow requires x_hat >= 0");
  const Eigen::VectorXd f = flow_f(lp, {hat.x_hat, hat.z_hat});
  Eigen::VectorXd xdot(lp.n());
  for (int i = 0; i < static_cast<int>(lp.n()); ++i)
    xdot[i] = hat.x_hat[i] > 0.0 ? f[i] : std::max(0.0, f[i]);
  Eigen::VectorXd zdot = lp.A * hat.x_hat - lp.b;
  return {std::move(xdot), std::move(zdot)};
}

double lagrangian(const StandardLp& lp, const LagrangianParams& params,
                  const PrimalDualPoint& pt) {
  check_pt_dims(lp, pt.x, pt.z);
  const Eigen::VectorXd eq = lp.A * pt.x - lp.b;
  double value = lp.c.dot(pt.x) + 0.5 * pt.x.squaredNorm() + 0.5 * eq.squaredNorm() +
                 pt.z.dot(eq);
  for (int i = 0; i < static_cast<int>(lp.n()); ++i)
    value += params.penalty_k * std::max(0.0, -pt.x[i]);
  return value;
}

double lyapunov_v1(const LagrangianParams& params, const PrimalDualPoint& pt) {
  if (!params.saddle.has_value())
    throw PreconditionError("lyapunov_v1 requires a saddle reference");
  const SaddleReference& s = *params.saddle;
  if (s.x_bar.size() != pt.x.size() || s.z_bar.size() != pt.z.size())
    throw DimensionError("saddle reference dimensions do not match the point");
  return 0.5 * (pt.x - s.x_bar).squaredNorm() + 0.5 * (pt.z - s.z_bar).squaredNorm();
}

double lyapunov_v2(const StandardLp& lp, const PrimalDualPoint& pt) {
  const Eigen::VectorXd f = flow_f(lp, pt);
  const ActiveSet sigma = active_set(lp, pt);
  const Eigen::VectorXd eq = lp.A * pt.x - lp.b;
  return 0.5 * selector_quadratic(sigma, f) + 0.5 * eq.squaredNorm();
}

double lyapunov_v(const StandardLp& lp, const LagrangianParams& params,
                  const PrimalDualPoint& pt) {
  return lyapunov_v1(params, pt) + lyapunov_v2(lp, pt);
}

namespace {

struct LieSetup {
  Eigen::VectorXd xdot, zdot;
  ActiveSet sigma_pt, sigma_hat;
  bool preconditions_ok = false;
  bool central_ok = false;
};

LieSetup lie_setup(const StandardLp& lp, const PrimalDualPoint& pt, const BroadcastState& hat,
                   double h) {
  LieSetup s;
  std::tie(s.xdot, s.zdot) = projected_flow(lp, hat);
  s.sigma_pt = active_set(lp, pt);
  s.sigma_hat = active_set(lp, {hat.x_hat, hat.z_hat});
  auto shifted = [&](double a) {
    return PrimalDualPoint{pt.x + a * s.xdot, pt.z + a * s.zdot};
  };
  s.preconditions_ok = is_subset(s.sigma_hat, s.sigma_pt) &&
                       active_set(lp, shifted(h)) == s.sigma_pt &&
                       active_set(lp, shifted(0.5 * h)) == s.sigma_pt;
  if (s.preconditions_ok) s.central_ok = active_set(lp, shifted(-h)) == s.sigma_pt;
  return s;
}

}  // namespace

bool lie_preconditions_hold(const StandardLp& lp, const PrimalDualPoint& pt,
                            const BroadcastState& hat, double h) {
  return lie_setup(lp, pt, hat, h).preconditions_ok;
}

LieBoundReport lie_derivative_check(const StandardLp& lp, const LagrangianParams& params,
                                    const PrimalDualPoint& pt, const BroadcastState& hat,
                                    double h, double tol_fd) {
  const LieSetup s = lie_setup(lp, pt, hat, h);
  if (!s.preconditions_ok)
    throw ModePreconditionError("mode-precondition: sigma not constant along the step");

  auto v_at = [&](double a) {
    return lyapunov_v(lp, params, {pt.x + a * s.xdot, pt.z + a * s.zdot});
  };
  const double v0 = v_at(0.0);

  LieBoundReport report;
  report.used_central = s.central_ok;
  if (s.central_ok) {
    report.lhs = (v_at(h) - v_at(-h)) / (2.0 * h);
  } else {
    // Two forward nodes recover the exact slope of a quadratic.
    report.lhs = (4.0 * v_at(0.5 * h) - v_at(h) - 3.0 * v0) / h;
  }

  const Eigen::VectorXd f_hat = flow_f(lp, {hat.x_hat, hat.z_hat});
  const Eigen::VectorXd g_hat = lp.A * hat.x_hat - lp.b;
  const Eigen::VectorXd f_pt = flow_f(lp, pt);
  const ActiveSet gained = set_difference(s.sigma_pt, s.sigma_hat);
  report.rhs = -0.5 * selector_quadratic(s.sigma_hat, f_hat) - 0.25 * g_hat.squaredNorm() +
               40.0 * (pt.x - hat.x_hat).squaredNorm() +
               20.0 * (pt.z - hat.z_hat).squaredNorm() +
               15.0 * selector_quadratic(gained, f_pt);
  if (tol_fd < 0.0) tol_fd = 1e-8 * (1.0 + std::abs(v0));
  report.holds = report.lhs <= report.rhs + tol_fd;
  return report;
}

}  // namespace etlp
