#include <doctest.h>

#include <random>

#include "etlp/assignment.hpp"
#include "etlp/dynamics.hpp"
#include "etlp/oracle.hpp"
#include "etlp/topology.hpp"
#include "test_support.hpp"

using namespace etlp;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

StandardLp scalar_lp(double a, double b, double c) {
  return StandardLp::from_entries(1, 1, Eigen::VectorXd::Constant(1, c),
                                  Eigen::VectorXd::Constant(1, b), {{0, 0, a}});
}

StandardLp scaled_assignment() {
  const StandardLp lp = generate_assignment(example_assignment());
  return max_consensus_scale(lp, build_graph(lp)).scaled;
}

struct SaddleFixture {
  StandardLp lp = scaled_assignment();
  KktPoint saddle = oracle_solve_qp(RegularizedQp{lp, 1.0});
  LagrangianParams params{0.0, SaddleReference{saddle.x, saddle.z}};
};

}  // namespace

TEST_CASE("flow map evaluates the descent direction") {
  SUBCASE("all-zero data gives a zero flow") {
    const StandardLp lp = StandardLp::from_entries(2, 1, Eigen::VectorXd::Zero(2),
                                                   Eigen::VectorXd::Zero(1), {});
    CHECK(flow_f(lp, {Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(1)}).isZero());
  }
  SUBCASE("hand arithmetic on the scalar instance") {
    const StandardLp lp = scalar_lp(1.0, 1.0, 0.0);
    CHECK(flow_f(lp, {vec({0}), vec({0})})[0] == doctest::Approx(1.0));
  }
  SUBCASE("stationary on the active set at the saddle") {
    SaddleFixture fx;
    const Eigen::VectorXd f = flow_f(fx.lp, {fx.saddle.x, fx.saddle.z});
    const ActiveSet sigma = active_set(fx.lp, {fx.saddle.x, fx.saddle.z});
    for (int i : sigma.members) CHECK(std::abs(f[i]) < 1e-9);
  }
}

TEST_CASE("flow map difference is affine in the primal argument") {
  std::mt19937_64 rng(321);
  const StandardLp lp = scaled_assignment();
  const Eigen::MatrixXd a = test::dense(lp);
  const Eigen::MatrixXd ata = a.transpose() * a;
  std::uniform_real_distribution<double> dist(-2.0, 2.0);
  for (int trial = 0; trial < 25; ++trial) {
    Eigen::VectorXd x(4), z(4), delta(4);
    for (int i = 0; i < 4; ++i) {
      x[i] = dist(rng);
      z[i] = dist(rng);
      delta[i] = dist(rng);
    }
    const Eigen::VectorXd lhs = flow_f(lp, {x + delta, z}) - flow_f(lp, {x, z});
    const Eigen::VectorXd rhs = -delta - ata * delta;
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("active set membership") {
  SUBCASE("strictly positive states are always members") {
    SaddleFixture fx;
    const ActiveSet s = active_set(fx.lp, {Eigen::VectorXd::Ones(4), Eigen::VectorXd::Zero(4)});
    CHECK(s.members == std::vector<int>{0, 1, 2, 3});
  }
  SUBCASE("negative flow at a pinned component leaves the set empty") {
    const StandardLp lp = scalar_lp(1.0, 1.0, 5.0);
    // f = -(0 + 5 + 0) - (0 - 1) = -4
    CHECK(flow_f(lp, {vec({0}), vec({0})})[0] == doctest::Approx(-4.0));
    CHECK(active_set(lp, {vec({0}), vec({0})}).members.empty());
  }
  SUBCASE("membership at the saddle is stable under tiny perturbations") {
    SaddleFixture fx;
    const ActiveSet base = active_set(fx.lp, {fx.saddle.x, fx.saddle.z});
    for (double bump : {1e-12, -1e-12}) {
      Eigen::VectorXd x = fx.saddle.x;
      for (int i = 0; i < 4; ++i)
        if (x[i] > 0.5) x[i] += bump;
      CHECK(active_set(fx.lp, {x, fx.saddle.z}) == base);
    }
  }
}

TEST_CASE("projected flow") {
  SUBCASE("vanishes at the saddle") {
    SaddleFixture fx;
    const auto [xdot, zdot] = projected_flow(fx.lp, {fx.saddle.x, fx.saddle.z});
    CHECK(xdot.cwiseAbs().maxCoeff() < 1e-9);
    CHECK(zdot.cwiseAbs().maxCoeff() < 1e-9);
  }
  SUBCASE("clamps outgoing flow at the boundary") {
    const StandardLp lp = scalar_lp(1.0, 1.0, 5.0);
    const auto [xdot, zdot] = projected_flow(lp, {vec({0}), vec({0})});
    CHECK(xdot[0] == 0.0);  // f = -4 clamped exactly
    CHECK(zdot[0] == doctest::Approx(-1.0));
  }
  SUBCASE("passes positive flow through at the boundary") {
    const StandardLp lp = scalar_lp(1.0, 1.0, 0.0);
    const auto [xdot, zdot] = projected_flow(lp, {vec({0}), vec({0})});
    CHECK(xdot[0] == doctest::Approx(1.0));
    CHECK(zdot[0] == doctest::Approx(-1.0));
  }
  SUBCASE("rejects negative broadcast values") {
    const StandardLp lp = scalar_lp(1.0, 1.0, 0.0);
    CHECK_THROWS_AS(projected_flow(lp, {vec({-0.1}), vec({0})}), PreconditionError);
  }
  SUBCASE("never pulls a pinned component negative") {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 50; ++trial) {
      const StandardLp lp = test::random_feasible_lp(rng);
      Eigen::VectorXd x = Eigen::VectorXd::Zero(lp.n());
      Eigen::VectorXd z = Eigen::VectorXd::Random(lp.m());
      const auto [xdot, zdot] = projected_flow(lp, {x, z});
      for (int i = 0; i < lp.n(); ++i) CHECK(xdot[i] >= 0.0);
    }
  }
}

TEST_CASE("augmented lagrangian") {
  SaddleFixture fx;
  fx.params.penalty_k =
      (fx.lp.c + fx.saddle.x + test::dense(fx.lp).transpose() * fx.saddle.z)
          .cwiseAbs()
          .maxCoeff() +
      1.0;
  SUBCASE("independent of z at the primal optimum") {
    const double at_saddle = lagrangian(fx.lp, fx.params, {fx.saddle.x, fx.saddle.z});
    for (double shift : {-3.0, 0.7, 12.0}) {
      Eigen::VectorXd z = fx.saddle.z.array() + shift;
      CHECK(lagrangian(fx.lp, fx.params, {fx.saddle.x, z}) == doctest::Approx(at_saddle));
    }
  }
  SUBCASE("zero at the origin with zero data") {
    const StandardLp lp = StandardLp::from_entries(2, 1, Eigen::VectorXd::Zero(2),
                                                   Eigen::VectorXd::Zero(1), {{0, 0, 1.0}});
    CHECK(lagrangian(lp, fx.params, {Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(1)}) ==
          doctest::Approx(0.0));
  }
  SUBCASE("saddle inequality holds on random perturbations") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    const double center = lagrangian(fx.lp, fx.params, {fx.saddle.x, fx.saddle.z});
    for (int trial = 0; trial < 100; ++trial) {
      Eigen::VectorXd dx(4), dz(4);
      for (int i = 0; i < 4; ++i) {
        dx[i] = dist(rng);
        dz[i] = dist(rng);
      }
      const double left = lagrangian(fx.lp, fx.params, {fx.saddle.x, fx.saddle.z + dz});
      const double right = lagrangian(fx.lp, fx.params, {fx.saddle.x + dx, fx.saddle.z});
      CHECK(left <= center + 1e-10);
      CHECK(center <= right + 1e-10);
    }
  }
}

TEST_CASE("lyapunov functions") {
  SaddleFixture fx;
  SUBCASE("v1 distances") {
    CHECK(lyapunov_v1(fx.params, {fx.saddle.x, fx.saddle.z}) == doctest::Approx(0.0));
    Eigen::VectorXd x = fx.saddle.x;
    x[0] += 1.0;
    CHECK(lyapunov_v1(fx.params, {x, fx.saddle.z}) == doctest::Approx(0.5));
    const double at_origin =
        lyapunov_v1(fx.params, {Eigen::VectorXd::Zero(4), Eigen::VectorXd::Zero(4)});
    CHECK(at_origin ==
          doctest::Approx(0.5 * (fx.saddle.x.squaredNorm() + fx.saddle.z.squaredNorm())));
  }
  SUBCASE("v1 requires the saddle reference") {
    LagrangianParams empty;
    CHECK_THROWS_AS(lyapunov_v1(empty, {fx.saddle.x, fx.saddle.z}), PreconditionError);
  }
  SUBCASE("v2 vanishes exactly on the saddle set") {
    CHECK(lyapunov_v2(fx.lp, {fx.saddle.x, fx.saddle.z}) < 1e-18);
  }
  SUBCASE("v2 hand value on the scalar instance") {
    const StandardLp lp = scalar_lp(1.0, 1.0, 0.0);
    CHECK(lyapunov_v2(lp, {vec({0}), vec({0})}) == doctest::Approx(1.0));
  }
  SUBCASE("v is nonnegative everywhere") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> dist(-3.0, 3.0);
    for (int trial = 0; trial < 200; ++trial) {
      Eigen::VectorXd x(4), z(4);
      for (int i = 0; i < 4; ++i) {
        x[i] = std::abs(dist(rng));
        z[i] = dist(rng);
      }
      CHECK(lyapunov_v(fx.lp, fx.params, {x, z}) >= 0.0);
    }
  }
}

TEST_CASE("selector matrices are symmetric idempotent contractions") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 9);
    ActiveSet s;
    for (int i = 0; i < n; ++i)
      if (rng() % 2 == 0) s.members.push_back(i);
    Eigen::MatrixXd sel = Eigen::MatrixXd::Zero(n, n);
    for (int i : s.members) sel(i, i) = 1.0;
    CHECK(sel.isApprox(sel.transpose()));
    CHECK((sel * sel).isApprox(sel));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sel);
    CHECK(eig.eigenvalues().minCoeff() >= -1e-15);
    CHECK(eig.eigenvalues().maxCoeff() <= 1.0 + 1e-15);
    // The quadratic-form helper agrees with the explicit matrix.
    Eigen::VectorXd v = Eigen::VectorXd::Random(n);
    CHECK(selector_quadratic(s, v) == doctest::Approx(v.dot(sel * v)));
  }
}

TEST_CASE("directional derivative certificate") {
  SaddleFixture fx;
  SUBCASE("flat at the saddle") {
    const PrimalDualPoint pt{fx.saddle.x, fx.saddle.z};
    const BroadcastState hat{fx.saddle.x, fx.saddle.z};
    const LieBoundReport report = lie_derivative_check(fx.lp, fx.params, pt, hat);
    CHECK(report.holds);
    CHECK(report.lhs == doctest::Approx(0.0).epsilon(1e-6));
    CHECK(report.rhs == doctest::Approx(0.0).epsilon(1e-6));
  }
  SUBCASE("fresh broadcasts have nonpositive certified slope") {
    std::mt19937_64 rng(47);
    std::uniform_real_distribution<double> dist(0.0, 2.0);
    int checked = 0;
    for (int trial = 0; trial < 60; ++trial) {
      Eigen::VectorXd x(4), z(4);
      for (int i = 0; i < 4; ++i) {
        x[i] = dist(rng);
        z[i] = dist(rng) - 1.0;
      }
      const PrimalDualPoint pt{x, z};
      const BroadcastState hat{x, z};
      if (!lie_preconditions_hold(fx.lp, pt, hat)) continue;
      const LieBoundReport report = lie_derivative_check(fx.lp, fx.params, pt, hat);
      CHECK(report.rhs <= 1e-12);  // error terms vanish at a fresh broadcast
      CHECK(report.holds);
      ++checked;
    }
    CHECK(checked > 40);
  }
  SUBCASE("mode mismatch in the wrong direction raises the precondition error") {
    // hat strictly positive puts every index in sigma(hat); a pinned true
    // state with negative flow leaves sigma(pt) smaller.
    const StandardLp lp = scalar_lp(1.0, 1.0, 5.0);
    const PrimalDualPoint pt{vec({0}), vec({0})};
    const BroadcastState hat{vec({0.5}), vec({0})};
    CHECK_FALSE(lie_preconditions_hold(lp, pt, hat));
    CHECK_THROWS_AS(lie_derivative_check(lp, LagrangianParams{0.0, SaddleReference{vec({1}),
                                                                                   vec({-1})}},
                                         pt, hat),
                    ModePreconditionError);
  }
}
