#include "etlp/oracle.hpp"

#include <Eigen/Dense>
#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "etlp/log.hpp"

namespace etlp {

namespace {

void check_point_dims(const StandardLp& lp, const KktPoint& pt) {
  lp.check_consistent();
  if (pt.x.size() != lp.n())
    throw DimensionError("x has length " + std::to_string(pt.x.size()) + ", expected n = " +
                         std::to_string(lp.n()));
  if (pt.z.size() != lp.m())
    throw DimensionError("z has length " + std::to_string(pt.z.size()) + ", expected m = " +
                         std::to_string(lp.m()));
}

KktResiduals residuals(const StandardLp& lp, const KktPoint& pt, double gamma_on_c,
                       bool quadratic) {
  check_point_dims(lp, pt);
  Eigen::VectorXd stat = gamma_on_c * lp.c + lp.A.transpose() * pt.z;
  if (quadratic) stat += pt.x;
  KktResiduals r;
  r.stationarity_min = stat.size() > 0 ? stat.minCoeff() : 0.0;
  Eigen::VectorXd eq = lp.A * pt.x - lp.b;
  r.equality_inf = eq.size() > 0 ? eq.cwiseAbs().maxCoeff() : 0.0;
  r.nonneg_min = pt.x.size() > 0 ? pt.x.minCoeff() : 0.0;
  r.complementarity = std::abs(stat.dot(pt.x));
  return r;
}

bool residuals_ok(const KktResiduals& r, double tol) {
  return r.stationarity_min >= -tol && r.equality_inf <= tol && r.nonneg_min >= -tol &&
         r.complementarity <= tol;
}

void check_oracle_size(const StandardLp& lp) {
  if (lp.n() > kOracleSizeLimit || lp.m() > kOracleSizeLimit)
    throw OracleError(OracleFailure::kSizeLimit,
                      "n = " + std::to_string(lp.n()) + ", m = " + std::to_string(lp.m()) +
                          " exceeds desk-scale limit " + std::to_string(kOracleSizeLimit));
}

// Visits all k-subsets of {0..n-1} in lexicographic order.
template <typename Fn>
void for_each_subset(int n, int k, Fn&& fn) {
  if (k > n) return;
  std::vector<int> idx(k);
  std::iota(idx.begin(), idx.end(), 0);
  while (true) {
    fn(idx);
    int i = k - 1;
    while (i >= 0 && idx[i] == n - k + i) --i;
    if (i < 0) break;
    ++idx[i];
    for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

bool lex_less(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a[i] < b[i]) return true;
    if (a[i] > b[i]) return false;
  }
  return false;
}

struct BasicSolution {
  double value = 0.0;
  Eigen::VectorXd x;
  std::vector<int> basis;
};

}  // namespace

KktResiduals kkt_residuals_lp(const StandardLp& lp, const KktPoint& pt) {
  return residuals(lp, pt, 1.0, false);
}

KktResiduals kkt_residuals_qp(const RegularizedQp& qp, const KktPoint& pt) {
  return residuals(qp.base, pt, qp.gamma, true);
}

bool kkt_check_lp(const StandardLp& lp, const KktPoint& pt, double tol) {
  return residuals_ok(kkt_residuals_lp(lp, pt), tol);
}

bool kkt_check_qp(const RegularizedQp& qp, const KktPoint& pt, double tol) {
  return residuals_ok(kkt_residuals_qp(qp, pt), tol);
}

KktPoint oracle_solve_lp(const StandardLp& lp, double tol) {
  lp.check_consistent();
  check_oracle_size(lp);
  const int n = static_cast<int>(lp.n());
  const int m = static_cast<int>(lp.m());
  const Eigen::MatrixXd a = lp.dense_a();

  // Rank and a spanning set of rows. Duals are searched with support on the
  // spanning rows only; any attainable A'z is attainable that way.
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> rank_qr(a.transpose());
  rank_qr.setThreshold(1e-10);
  const int rank = static_cast<int>(rank_qr.rank());
  std::vector<int> row_basis(rank_qr.colsPermutation().indices().data(),
                             rank_qr.colsPermutation().indices().data() + rank);
  std::sort(row_basis.begin(), row_basis.end());

  const double feas_tol = tol * (1.0 + (m > 0 ? lp.b.cwiseAbs().maxCoeff() : 0.0));

  std::vector<BasicSolution> candidates;
  for_each_subset(n, rank, [&](const std::vector<int>& cols) {
    Eigen::MatrixXd as(m, rank);
    for (int k = 0; k < rank; ++k) as.col(k) = a.col(cols[k]);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(as);
    qr.setThreshold(1e-10);
    if (static_cast<int>(qr.rank()) < rank) return;  // dependent columns
    Eigen::VectorXd xs = qr.solve(lp.b);
    if (rank > 0 && (as * xs - lp.b).cwiseAbs().maxCoeff() > feas_tol) return;
    if (rank == 0 && m > 0 && lp.b.cwiseAbs().maxCoeff() > feas_tol) return;
    if (rank > 0 && xs.minCoeff() < -tol) return;
    BasicSolution sol;
    sol.x = Eigen::VectorXd::Zero(n);
    for (int k = 0; k < rank; ++k) sol.x[cols[k]] = std::max(0.0, xs[k]);
    sol.value = lp.c.dot(sol.x);
    sol.basis = cols;
    candidates.push_back(std::move(sol));
  });

  if (candidates.empty()) throw OracleError(OracleFailure::kInfeasible);

  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const BasicSolution& p, const BasicSolution& q) {
                     const double tie = 1e-12 * (1.0 + std::abs(p.value) + std::abs(q.value));
                     if (p.value < q.value - tie) return true;
                     if (q.value < p.value - tie) return false;
                     return lex_less(p.x, q.x);
                   });

  // Dual certificate for basis T: z supported on the spanning rows solving
  // (A_{R,T})' z_R = -c_T. The first certified candidate is optimal; if no
  // feasible basis certifies, the objective is unbounded below.
  int skipped_singular = 0;
  for (const BasicSolution& cand : candidates) {
    Eigen::VectorXd z = Eigen::VectorXd::Zero(m);
    if (rank > 0) {
      Eigen::MatrixXd art(rank, rank);
      Eigen::VectorXd ct(rank);
      for (int k = 0; k < rank; ++k) {
        for (int r = 0; r < rank; ++r) art(r, k) = a(row_basis[r], cand.basis[k]);
        ct[k] = lp.c[cand.basis[k]];
      }
      Eigen::FullPivLU<Eigen::MatrixXd> lu(art.transpose());
      lu.setThreshold(1e-10);
      if (!lu.isInvertible()) {
        ++skipped_singular;
        continue;
      }
      Eigen::VectorXd zr = lu.solve(-ct);
      for (int r = 0; r < rank; ++r) z[row_basis[r]] = zr[r];
    }
    KktPoint pt{cand.x, z};
    if (kkt_check_lp(lp, pt, tol)) return pt;
  }
  if (skipped_singular > 0)
    log_debug("lp oracle: skipped %d degenerate basis system(s)", skipped_singular);
  throw OracleError(OracleFailure::kUnbounded);
}

KktPoint oracle_solve_qp(const RegularizedQp& qp, double tol) {
  const StandardLp& lp = qp.base;
  lp.check_consistent();
  check_oracle_size(lp);
  const int n = static_cast<int>(lp.n());
  const int m = static_cast<int>(lp.m());
  const Eigen::MatrixXd a = lp.dense_a();

  int skipped_inconsistent = 0;
  KktPoint result;
  bool have_result = false;
  auto try_pin_set = [&](const std::vector<int>& pin) -> bool {
      std::vector<int> free_cols;
      free_cols.reserve(n - pin.size());
      {
        size_t p = 0;
        for (int i = 0; i < n; ++i) {
          if (p < pin.size() && pin[p] == i) {
            ++p;
          } else {
            free_cols.push_back(i);
          }
        }
      }
      const int nf = static_cast<int>(free_cols.size());
      // KKT system of the equality-constrained problem with x_pin = 0:
      //   [ I   A_F' ] [x_F]   [-gamma c_F]
      //   [ A_F  0   ] [ z ] = [     b    ]
      Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(nf + m, nf + m);
      kkt.topLeftCorner(nf, nf).setIdentity();
      for (int k = 0; k < nf; ++k) {
        for (int r = 0; r < m; ++r) {
          kkt(k, nf + r) = a(r, free_cols[k]);
          kkt(nf + r, k) = a(r, free_cols[k]);
        }
      }
      Eigen::VectorXd rhs(nf + m);
      for (int k = 0; k < nf; ++k) rhs[k] = -qp.gamma * lp.c[free_cols[k]];
      rhs.tail(m) = lp.b;

      Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(kkt);
      cod.setThreshold(1e-10);
      Eigen::VectorXd sol = cod.solve(rhs);  // minimum-norm least squares
      const double scale = 1.0 + rhs.cwiseAbs().maxCoeff();
      if ((kkt * sol - rhs).cwiseAbs().maxCoeff() > 1e-9 * scale) {
        ++skipped_inconsistent;
        return false;  // pin set incompatible with the constraints
      }
      Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
      for (int k = 0; k < nf; ++k) x[free_cols[k]] = sol[k];
      // Free components that land a rounding error below zero are zeros of
      // the true minimizer.
      for (int i = 0; i < n; ++i)
        if (x[i] < 0.0 && x[i] >= -tol) x[i] = 0.0;
      KktPoint pt{x, sol.tail(m)};
      if (kkt_check_qp(qp, pt, tol)) {
        result = pt;
        have_result = true;
        return true;
      }
      return false;
  };

  // Pin sets are visited smallest first; the first KKT-certified candidate
  // carries the unique minimizer, so the scan can stop there.
  for (int pinned = 0; pinned <= n && !have_result; ++pinned) {
    for_each_subset(n, pinned, [&](const std::vector<int>& pin) {
      if (!have_result) try_pin_set(pin);
    });
  }
  if (skipped_inconsistent > 0)
    log_debug("qp oracle: skipped %d inconsistent pin set(s)", skipped_inconsistent);
  if (!have_result) throw OracleError(OracleFailure::kInfeasible);

  // Re-solve with the full zero set of the minimizer pinned: the multiplier
  // then satisfies strict complementarity whenever one exists, which keeps
  // the active set at the returned point stable under tiny perturbations.
  std::vector<int> zero_set;
  for (int i = 0; i < n; ++i)
    if (result.x[i] == 0.0) zero_set.push_back(i);
  KktPoint first = result;
  if (!try_pin_set(zero_set)) result = first;
  return result;
}

std::vector<ExactnessSample> exactness_probe(const StandardLp& lp,
                                             const std::vector<double>& gammas) {
  const KktPoint lp_opt = oracle_solve_lp(lp);
  const double lp_value = lp_objective(lp, lp_opt.x);
  constexpr double kMembershipTol = 1e-6;

  std::vector<ExactnessSample> out;
  out.reserve(gammas.size());
  for (double gamma : gammas) {
    const KktPoint qp_opt = oracle_solve_qp(RegularizedQp{lp, gamma});
    const Eigen::VectorXd eq = equality_residual(lp, qp_opt.x);
    const bool feasible = (eq.size() == 0 || eq.cwiseAbs().maxCoeff() <= kMembershipTol) &&
                          (qp_opt.x.size() == 0 || qp_opt.x.minCoeff() >= -kMembershipTol);
    const bool matches = feasible && lp_objective(lp, qp_opt.x) <= lp_value + kMembershipTol;
    out.push_back({gamma, matches});
  }
  return out;
}

}  // namespace etlp
