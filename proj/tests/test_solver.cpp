#include <gtest/gtest.h>

#include <cmath>

#include "hopflab/solver.hpp"

using namespace hopflab;

namespace {

SolverConfig quick(double tol = 1e-10) {
  SolverConfig c;
  c.residual_tol = tol;
  c.max_iters = 200;
  return c;
}

}  // namespace

TEST(SolverConfig, Validation) {
  SolverConfig c;
  c.delta_ladder = {1e-2, 1e-1};
  EXPECT_THROW(c.validate(), Error);
  c.delta_ladder = {1e-1, -1.0};
  EXPECT_THROW(c.validate(), Error);
  c = SolverConfig{};
  c.damping = 0.0;
  EXPECT_THROW(c.validate(), Error);
}

TEST(SolveRadial, ZeroDataGivesZero) {
  for (double alpha : {0.0, 1.0, 2.0}) {
    RadialProblem pb{OperatorSpec::pucci_minus(EllipticParams{3, 1, 2, alpha})};
    const auto s = solve_radial(pb, quick(), 65);
    ASSERT_TRUE(s.converged);
    EXPECT_LE(s.u.values.cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(SolveRadial, ManufacturedQuadratic) {
  // u = r^2, n = 2, alpha = 1, Laplacian: f = |u'| 4 = 8 r.
  RadialProblem pb{OperatorSpec::laplacian(EllipticParams{2, 1, 1, 1})};
  pb.rhs = [](double r) { return 8 * r; };
  pb.outer_value = 1.0;
  std::vector<double> err;
  for (int m : {65, 129, 257}) {
    const auto s = solve_radial(pb, quick(), m);
    ASSERT_TRUE(s.converged) << s.diagnostics;
    double e = 0;
    for (int i = 0; i < m; ++i) e = std::max(e, std::abs(s.u[i] - std::pow(s.u.grid.node(i), 2)));
    err.push_back(e);
  }
  EXPECT_LT(err.back(), 1e-3);
  EXPECT_GE(std::log2(err[0] / err[2]) / 2, 1.5);
}

TEST(SolveRadial, AnnulusHarmonicProfile) {
  const double M = 2.0;
  RadialProblem pb{OperatorSpec::pucci_minus(EllipticParams{2, 1, 1, 0})};
  pb.R = 1.0;
  pb.r_inner = 0.5;
  pb.inner_value = M;
  double prev = 0;
  for (int m : {65, 129, 257}) {
    const auto s = solve_radial(pb, quick(), m);
    ASSERT_TRUE(s.converged);
    double e = 0;
    for (int i = 0; i < m; ++i) {
      const double r = s.u.grid.node(i);
      e = std::max(e, std::abs(s.u[i] - M * std::log(1 / r) / std::log(2.0)));
    }
    if (prev > 0) {
      EXPECT_GT(prev / e, 3.5);
    }
    prev = e;
  }
  EXPECT_LT(prev, 1e-5);
}

TEST(SolveRadial, ResidualContract) {
  RadialProblem pb = manufactured_problem(OperatorSpec::pucci_plus(EllipticParams{2, 1, 2, 1}),
                                          ManufacturedRadial::standard());
  const auto cfg = quick(1e-9);
  const auto s = solve_radial(pb, cfg, 129);
  ASSERT_TRUE(s.converged);
  EXPECT_LE(s.residual_norm, cfg.residual_tol);
  EXPECT_EQ(s.delta_final, cfg.delta_ladder.back());
}

TEST(SolveRadial, NonIsotropicTraceRejected) {
  const Eigen::MatrixXd A = Eigen::Vector2d(1.0, 1.5).asDiagonal();
  RadialProblem pb{OperatorSpec::linear_trace(A, EllipticParams{2, 1, 2, 0})};
  EXPECT_THROW(solve_radial(pb, quick(), 33), Error);
}

TEST(SolveRadial, DeltaContinuationTrendIsMonotone) {
  RadialProblem pb{OperatorSpec::pucci_minus(EllipticParams{2, 1, 2, 1})};
  pb.rhs = [](double) { return -1.0; };
  const auto s = solve_radial(pb, quick(1e-9), 257);
  ASSERT_TRUE(s.converged);
  ASSERT_GE(s.delta_increments.size(), 2u);
  for (size_t k = 1; k < s.delta_increments.size(); ++k)
    EXPECT_LE(s.delta_increments[k], s.delta_increments[k - 1] + 1e-12);
}

TEST(Convergence, ManufacturedStudies) {
  const auto exact = ManufacturedRadial::standard();
  const std::vector<OperatorSpec> specs{
      OperatorSpec::pucci_minus(EllipticParams{2, 1, 2, 0}),
      OperatorSpec::linear_trace(1.5 * Eigen::MatrixXd::Identity(2, 2), EllipticParams{2, 1, 2, 2})};
  for (const auto& spec : specs) {
    const auto st = convergence_study(spec, exact, quick(1e-8), 65, 3);
    EXPECT_TRUE(st.all_converged);
    EXPECT_GE(st.slope, 1.5) << spec.name();
  }
}

TEST(Residual, ExactPairsAndZero) {
  const auto exact = ManufacturedRadial::standard();
  const auto spec = OperatorSpec::pucci_minus(EllipticParams{3, 1, 2, 1});
  const auto pb = manufactured_problem(spec, exact);
  const RadialGrid g(0, 1, 1025, 3);
  const auto res = residual(pb, sample(g, exact.u));
  EXPECT_LT(res.values.cwiseAbs().maxCoeff(), 1e-4);
  RadialProblem zero{spec};
  const auto r0 = residual(zero, sample(g, [](double) { return 0.0; }));
  EXPECT_EQ(r0.values.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Rescale, IdentityAndResidualIdentity) {
  const auto spec = OperatorSpec::pucci_minus(EllipticParams{2, 1, 2, 1});
  RadialProblem pb{spec};
  pb.rhs = [](double r) { return -1 - r * r; };
  pb.outer_value = 0.5;
  const auto s = solve_radial(pb, quick(), 129);
  const auto id = rescale_solution(pb, s, 1, 1);
  EXPECT_EQ(id.solution.u.values, s.u.values);
  EXPECT_EQ(id.residual_factor, 1.0);

  for (auto [a, b] : {std::pair{0.5, 2.0}, {3.0, 0.25}}) {
    const auto rs = rescale_solution(pb, s, a, b);
    EXPECT_NEAR(rs.residual_factor, std::pow(a, 2) * std::pow(b, 3), 1e-14);
    const auto r0 = residual(pb, s.u);
    const auto r1 = residual(rs.problem, rs.solution.u);
    for (int i = 0; i < r0.size(); ++i) EXPECT_NEAR(r1[i], rs.residual_factor * r0[i], 1e-10 * (1 + std::abs(r1[i])));
  }
}

TEST(Rescale, SimplerRescaledEquation) {
  // a = 1/b, b = 2: f~(x) = b f(b x).
  RadialProblem pb{OperatorSpec::pucci_minus(EllipticParams{2, 1, 1, 1})};
  pb.rhs = [](double r) { return -1 - r; };
  const auto s = solve_radial(pb, quick(), 65);
  const auto rs = rescale_solution(pb, s, 0.5, 2.0);
  for (double r : {0.0, 0.1, 0.3, 0.5}) EXPECT_NEAR(rs.problem.rhs(r), 2 * pb.rhs(2 * r), 1e-14);
}

TEST(Rescale, DirectSolveAgrees) {
  RadialProblem pb{OperatorSpec::pucci_plus(EllipticParams{3, 1, 2, 0})};
  pb.rhs = [](double r) { return 1 + r; };
  pb.outer_value = 1.0;
  const auto s = solve_radial(pb, quick(), 257);
  const auto rs = rescale_solution(pb, s, 0.5, 2.0);
  const auto direct = solve_radial(rs.problem, quick(), 257);
  ASSERT_TRUE(direct.converged);
  EXPECT_LT((direct.u.values - rs.solution.u.values).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(WideStencil, ZeroData) {
  PlanarProblem pb{OperatorSpec::pucci_minus(EllipticParams{2, 1, 2, 0})};
  const auto s = solve_2d_wide_stencil(pb, quick(), 17, 8);
  ASSERT_TRUE(s.converged);
  EXPECT_LE(s.u.values.cwiseAbs().maxCoeff(), 1e-12);
}

TEST(WideStencil, LaplacianQuadratic) {
  PlanarProblem pb{OperatorSpec::laplacian(EllipticParams{2, 1, 1, 0})};
  pb.rhs = [](const Eigen::Vector2d&) { return 4.0; };
  pb.boundary = [](const Eigen::Vector2d& x) { return x.squaredNorm(); };
  const auto s = solve_2d_wide_stencil(pb, quick(), 33, 8);
  ASSERT_TRUE(s.converged);
  double e = 0;
  for (int k = 0; k < s.u.size(); ++k)
    if (s.u.grid.in_disk(k)) e = std::max(e, std::abs(s.u[k] - s.u.grid.point(k).squaredNorm()));
  EXPECT_LT(e, 1e-8);
}

TEST(WideStencil, AgreesWithRadialSolver) {
  // The rim band carries Dirichlet data, so agreement is first order in h.
  const auto spec = OperatorSpec::pucci_minus(EllipticParams{2, 1, 2, 0});
  RadialProblem rp{spec};
  rp.rhs = [](double) { return -1.0; };
  const auto rs = solve_radial(rp, quick(1e-8), 2049);
  ASSERT_TRUE(rs.converged);
  std::vector<double> err;
  for (int m : {25, 49, 97}) {
    PlanarProblem pp{spec};
    pp.rhs = [](const Eigen::Vector2d&) { return -1.0; };
    const auto ws = solve_2d_wide_stencil(pp, quick(), m, 8);
    ASSERT_TRUE(ws.converged);
    double e = 0;
    for (int k = 0; k < ws.u.size(); ++k)
      if (ws.u.grid.in_disk(k)) e = std::max(e, std::abs(ws.u[k] - interpolate(rs.u, ws.u.grid.point(k).norm())));
    EXPECT_LT(e, 2.0 * ws.u.grid.spacing());
    err.push_back(e);
  }
  EXPECT_GT(err[0] / err[1], 1.7);
  EXPECT_GT(err[1] / err[2], 1.7);
}

TEST(Flame, ZeroReactionReducesToPlainSolve) {
  RadialProblem pb{OperatorSpec::laplacian(EllipticParams{2, 1, 1, 0})};
  pb.rhs = [](double) { return 1.0; };
  pb.outer_value = 1.0;
  const auto a = solve_radial(pb, quick(), 129);
  const auto b = solve_flame(pb, ReactionProfile::zero(), 0.125, quick(), 129);
  ASSERT_TRUE(b.converged);
  EXPECT_LT((a.u.values - b.u.values).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Flame, NoDeadCoreOnUnitBall) {
  // u = 1 > eps solves the problem on B_1 with u(1) = 1: beta_eps(1) = 0.
  RadialProblem pb{OperatorSpec::laplacian(EllipticParams{2, 1, 1, 0})};
  pb.outer_value = 1.0;
  const auto s = solve_flame(pb, ReactionProfile::standard_bump(), 0.125, quick(), 257);
  ASSERT_TRUE(s.converged) << s.diagnostics;
  EXPECT_LT((s.u.values.array() - 1.0).abs().maxCoeff(), 1e-10);
}

TEST(Flame, StandardBumpTransitionLayer) {
  RadialProblem pb{OperatorSpec::laplacian(EllipticParams{2, 1, 1, 0})};
  pb.R = 4.0;
  pb.outer_value = 1.0;
  // The discrete core is exponentially small, not zero: the layer is read on eps/100 < u < eps.
  const auto beta = ReactionProfile::standard_bump();
  EXPECT_NEAR(beta.sup(), 1.5, 1e-6);
  double prev_width = 1e9;
  for (double eps : {1.0 / 8, 1.0 / 16, 1.0 / 32}) {
    const auto cfg = quick(1e-8);
    const auto s = solve_flame(pb, beta, eps, cfg, 4097);
    ASSERT_TRUE(s.converged) << eps << " " << s.diagnostics;
    EXPECT_GE(s.u.values.minCoeff(), -1e-8);
    double lo = 1e9, hi = -1e9;
    for (int i = 0; i < s.u.size(); ++i)
      if (s.u[i] > eps / 100 && s.u[i] < eps) lo = std::min(lo, s.u.grid.node(i)), hi = std::max(hi, s.u.grid.node(i));
    ASSERT_LT(lo, hi) << eps;
    const double width = hi - lo;
    EXPECT_LT(width, 4 * eps);
    EXPECT_LT(width, prev_width);
    prev_width = width;
  }
}
