#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hopflab/regularity.hpp"

using namespace hopflab;

namespace {

std::vector<Eigen::VectorXd> line_samples(double r, int k) {
  std::vector<Eigen::VectorXd> pts;
  for (int i = 0; i <= k; ++i) pts.push_back(Eigen::VectorXd::Constant(1, -r + 2 * r * i / k));
  return pts;
}

// Brute-force minimax over a (slope, intercept) lattice.
double brute_force_error(const std::vector<Eigen::VectorXd>& pts, const std::vector<double>& vals) {
  double best = 1e300;
  for (int a = -100; a <= 100; ++a)
    for (int b = -200; b <= 200; ++b) {
      const double slope = a * 0.01, icpt = b * 0.005;
      double e = 0;
      for (size_t i = 0; i < pts.size(); ++i) e = std::max(e, std::abs(vals[i] - slope * pts[i][0] - icpt));
      best = std::min(best, e);
    }
  return best;
}

const ScalarField kSquare = [](const Eigen::VectorXd& x) { return x.squaredNorm(); };

}  // namespace

TEST(Minimax, AffineIsExact) {
  const auto pts = ball_samples(Eigen::Vector2d(0.2, -0.1), 0.3, 4);
  std::vector<double> v;
  for (const auto& p : pts) v.push_back(1.5 - 2 * p[0] + 0.5 * p[1]);
  const auto fit = minimax_affine_fit(pts, v, Eigen::Vector2d::Zero());
  EXPECT_LT(fit.sup_error, 1e-12);
  EXPECT_NEAR(fit.map.value, 1.5, 1e-12);
  EXPECT_NEAR((fit.map.gradient - Eigen::Vector2d(-2, 0.5)).norm(), 0.0, 1e-12);
}

TEST(Minimax, ChebyshevLineForSquare) {
  for (double r : {0.5, 1.0}) {
    const auto pts = line_samples(r, 40);
    std::vector<double> v;
    for (const auto& p : pts) v.push_back(p[0] * p[0]);
    const auto fit = minimax_affine_fit(pts, v);
    EXPECT_NEAR(fit.sup_error, r * r / 2, 1e-12);
    EXPECT_NEAR(fit.map.gradient[0], 0.0, 1e-12);
    if (r == 1.0) {
      EXPECT_NEAR(brute_force_error(pts, v), fit.sup_error, 1e-9);
    }
  }
}

TEST(Minimax, PlanarSquareNorm) {
  for (double r : {0.25, 0.5}) {
    const auto pts = ball_samples(Eigen::Vector2d::Zero(), r, 6);
    std::vector<double> v;
    for (const auto& p : pts) v.push_back(p.squaredNorm());
    const auto fit = minimax_affine_fit(pts, v, Eigen::Vector2d::Zero());
    EXPECT_NEAR(fit.sup_error, r * r / 2, 1e-12);
    EXPECT_LT(fit.map.gradient.norm(), 1e-10);
  }
}

TEST(Minimax, AffineShiftInvariance) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> U(-1, 1);
  const auto pts = ball_samples(Eigen::Vector2d(0.1, 0.2), 0.4, 5);
  std::vector<double> v;
  for (const auto& p : pts) v.push_back(std::sin(3 * p[0]) * std::cos(2 * p[1]) + p[0] * p[0] * p[1]);
  const auto base = minimax_affine_fit(pts, v, Eigen::Vector2d::Zero());
  for (int t = 0; t < 10; ++t) {
    const double c = U(rng);
    const Eigen::Vector2d g(U(rng), U(rng));
    std::vector<double> w;
    for (size_t i = 0; i < pts.size(); ++i) w.push_back(v[i] + c + g.dot(pts[i]));
    const auto f = minimax_affine_fit(pts, w, Eigen::Vector2d::Zero());
    EXPECT_NEAR(f.sup_error, base.sup_error, 1e-10);
    EXPECT_NEAR(f.map.value, base.map.value + c, 1e-8);
    EXPECT_NEAR((f.map.gradient - base.map.gradient - g).norm(), 0.0, 1e-8);
  }
}

TEST(Minimax, DegenerateGeometryRejected) {
  std::vector<Eigen::VectorXd> pts;
  for (int i = 0; i < 6; ++i) pts.push_back(Eigen::Vector2d(i, 2 * i));
  EXPECT_THROW(minimax_affine_fit(pts, std::vector<double>(6, 1.0)), Error);
  EXPECT_THROW(minimax_affine_fit({Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1)},
                                  {0.0, 1.0, 2.0}),
               Error);
}

TEST(Campanato, AffineSquareHomogeneityShift) {
  const Ball B1 = Ball::origin(2, 1);
  const std::vector<Eigen::VectorXd> centers{Eigen::Vector2d::Zero(), Eigen::Vector2d(0.3, -0.2)};
  const std::vector<double> radii{0.5, 0.25, 0.125};
  const ScalarField aff = [](const Eigen::VectorXd& x) { return 2 + x[0] - 3 * x[1]; };
  EXPECT_LT(campanato_seminorm(aff, B1, 1.0, centers, radii).A, 1e-12);
  const double A = campanato_seminorm(kSquare, B1, 1.0, centers, radii).A;
  EXPECT_NEAR(A, 0.5, 1e-3);
  const ScalarField scaled = [](const Eigen::VectorXd& x) { return 3 * x.squaredNorm(); };
  EXPECT_NEAR(campanato_seminorm(scaled, B1, 1.0, centers, radii).A, 3 * A, 1e-10);
  const ScalarField shifted = [](const Eigen::VectorXd& x) { return x.squaredNorm() - 1 + 4 * x[0]; };
  EXPECT_NEAR(campanato_seminorm(shifted, B1, 1.0, centers, radii).A, A, 1e-10);
}

TEST(Campanato, PlanarGridVersion) {
  const CartesianGrid2D g(1.0, 257);
  const auto u = sample(g, [](const Eigen::Vector2d& x) { return x.squaredNorm(); });
  const auto rep = campanato_seminorm(u, Ball::origin(2, 1), 1.0, {Eigen::Vector2d::Zero()}, {0.5, 0.25, 0.01});
  EXPECT_TRUE(rep.truncated);  // 0.01 is below eight nodes per diameter
  EXPECT_NEAR(rep.A, 0.5, 1e-3);
}

TEST(Dyadic, AffineAndSquare) {
  const ScalarField aff = [](const Eigen::VectorXd& x) { return 1 + 2 * x[0] - x[1]; };
  const auto a = dyadic_expansion(aff, Eigen::Vector2d(0.1, 0.1), 1.0, 8);
  EXPECT_TRUE(a.pass) << a.notes;
  EXPECT_NEAR((a.gradient - Eigen::Vector2d(2, -1)).norm(), 0.0, 1e-10);
  for (const auto& st : a.steps) {
    EXPECT_LT(st.dp, 1e-10);
    EXPECT_LT(st.dc, 1e-10);
  }
  const auto s = dyadic_expansion(kSquare, Eigen::Vector2d::Zero(), 1.0, 10);
  EXPECT_TRUE(s.pass) << s.notes;
  EXPECT_LT(s.gradient.norm(), 1e-6);
  EXPECT_NEAR(s.remainder, 1.0, 1e-9);
  EXPECT_LT(s.value_gap, 1e-6);
}

TEST(Dyadic, PowerFieldsRecoverGradient) {
  for (double gamma : {0.25, 0.5, 1.0}) {
    const ScalarField u = [gamma](const Eigen::VectorXd& x) { return std::pow(x.norm(), 1 + gamma); };
    const auto at0 = dyadic_expansion(u, Eigen::Vector2d::Zero(), gamma, 10);
    EXPECT_TRUE(at0.pass) << gamma << " " << at0.notes;
    EXPECT_LT(at0.gradient.norm(), 8 * at0.A * std::pow(std::pow(2.0, -10), gamma));
    EXPECT_TRUE(std::isfinite(at0.remainder));

    const Eigen::Vector2d x0(0.3, 0.1);
    const auto e = dyadic_expansion(u, x0, gamma, 10);
    EXPECT_TRUE(e.pass) << gamma << " " << e.notes;
    const Eigen::Vector2d exact = (1 + gamma) * std::pow(x0.norm(), gamma - 1) * x0;
    EXPECT_LT((e.gradient - exact).norm(), 8 * e.A * std::pow(std::pow(2.0, -10), gamma));
  }
}

TEST(Modulus, PowerAndTabulated) {
  const auto p = ModulusOfContinuity::power(0.5);
  EXPECT_NEAR(p(0.25), 0.5, 1e-15);
  EXPECT_NO_THROW(p.validate());
  EXPECT_THROW(ModulusOfContinuity::power(1.5).validate(), Error);
  const auto t = ModulusOfContinuity::tabulated({0.0, 0.5, 1.0}, {0.0, 0.5, 0.75});
  EXPECT_NEAR(t(0.25), 0.25, 1e-15);
  EXPECT_NEAR(t(2.0), 0.75, 1e-15);
  EXPECT_NO_THROW(t.validate());
  EXPECT_THROW(ModulusOfContinuity::tabulated({0.0, 0.5, 1.0}, {0.0, 0.5, 0.4}).validate(), Error);
  EXPECT_THROW(ModulusOfContinuity::tabulated({0.0, 0.5, 1.0}, {0.0, 0.1, 0.9}).validate(), Error);
}

TEST(ConstantsCheck, AffineAndSquare) {
  const ScalarField aff = [](const Eigen::VectorXd& x) { return 1 + x[0]; };
  const VectorField daff = [](const Eigen::VectorXd&) { return Eigen::VectorXd(Eigen::Vector2d(1, 0)); };
  for (double T : {0.0, 1.0}) {
    const auto r = c1omega_constants_check(aff, daff, 2, 0.5, 0.25, 1.0, ModulusOfContinuity::power(1.0), T);
    EXPECT_TRUE(r.pass);
    EXPECT_LT(r.hypothesis_T, 1e-12);
  }
  const VectorField dsq = [](const Eigen::VectorXd& x) { return Eigen::VectorXd(2 * x); };
  const auto r = c1omega_constants_check(kSquare, dsq, 2, 0.5, 0.25, 1.0, ModulusOfContinuity::power(1.0), 1.0);
  EXPECT_TRUE(r.pass);
  EXPECT_NEAR(r.hypothesis_T, 1.0, 1e-12);
  for (const auto& c : r.checks) {
    EXPECT_TRUE(c.pass) << c.name;
    if (c.name == "grad_seminorm_half") {
      EXPECT_NEAR(c.lhs, 2.0, 1e-9);
      EXPECT_NEAR(c.rhs, 8.0, 1e-12);
    }
  }
}

TEST(ConstantsCheck, RefusesUncertifiedT) {
  const VectorField dsq = [](const Eigen::VectorXd& x) { return Eigen::VectorXd(2 * x); };
  try {
    c1omega_constants_check(kSquare, dsq, 2, 0.5, 0.25, 1.0, ModulusOfContinuity::power(1.0), 0.5);
    FAIL() << "expected refusal";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::CheckFailed);
  }
}

TEST(ConstantsCheck, SoundOnCertifiedFields) {
  for (double gamma : {0.5, 1.0}) {
    const ScalarField u = [gamma](const Eigen::VectorXd& x) { return std::pow(x.norm(), 1 + gamma) + x[1]; };
    const VectorField du = [gamma](const Eigen::VectorXd& x) {
      const double r = x.norm();
      Eigen::VectorXd g = r > 0 ? Eigen::VectorXd((1 + gamma) * std::pow(r, gamma - 1) * x) : Eigen::VectorXd::Zero(2);
      g[1] += 1;
      return g;
    };
    const auto omega = ModulusOfContinuity::power(gamma);
    const auto probe = c1omega_constants_check(u, du, 2, 0.5, 0.25, 1.0, omega, 10.0);
    const auto r = c1omega_constants_check(u, du, 2, 0.5, 0.25, 1.0, omega, probe.hypothesis_T);
    EXPECT_TRUE(r.pass) << gamma;
  }
}
