#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "hopflab/grid.hpp"

using namespace hopflab;
using std::numbers::pi;

TEST(Grid, UnitBallVolumes) {
  EXPECT_NEAR(unit_ball_volume(2), pi, 1e-14);
  EXPECT_NEAR(unit_ball_volume(3), 4 * pi / 3, 1e-14);
  EXPECT_NEAR(unit_sphere_area(3), 4 * pi, 1e-13);
}

TEST(Grid, RadialQuadratureReproducesBallVolume) {
  for (int n : {2, 3, 5}) {
    const RadialGrid g(0, 1, 513, n);
    const auto one = sample(g, [](double) { return 1.0; });
    for (double r : {0.5, 0.75, 1.0}) {
      const double vol = unit_ball_volume(n) * std::pow(r, n);
      EXPECT_NEAR(lp_norm(one, 1.0, Ball::origin(n, r)) / vol, 1.0, 1e-6) << n << " " << r;
    }
  }
}

TEST(Grid, PlanarQuadratureReproducesDiskArea) {
  const CartesianGrid2D g(1.0, 257);
  const auto one = sample(g, [](const Eigen::Vector2d&) { return 1.0; });
  for (double r : {0.5, 1.0}) EXPECT_NEAR(lp_norm(one, 1.0, Ball::origin(2, r)) / (pi * r * r), 1.0, 1e-6);
}

TEST(Grid, LpNormExamples) {
  const RadialGrid g(0, 1, 1025, 2);
  const auto one = sample(g, [](double) { return 1.0; });
  const double eps = 0.5;
  EXPECT_NEAR(lp_norm(one, eps, Ball::origin(2, 0.5)), std::pow(pi / 4, 1 / eps), 1e-6);
  const auto zero = sample(g, [](double) { return 0.0; });
  for (double p : {0.25, 1.0, 2.0, std::numeric_limits<double>::infinity()}) EXPECT_EQ(lp_norm(zero, p, Ball::origin(2, 1)), 0.0);
  const auto d = dist_to_boundary(g, Ball::origin(2, 1));
  EXPECT_NEAR(lp_norm(d, std::numeric_limits<double>::infinity(), Ball::origin(2, 1)), 1.0, 1e-15);
}

TEST(Grid, LpNormHomogeneous) {
  const RadialGrid g(0, 1, 257, 3);
  const auto u = sample(g, [](double r) { return std::cos(3 * r) - 0.2; });
  for (double p : {0.25, 0.5, 1.0, 2.0, std::numeric_limits<double>::infinity()})
    for (double c : {-3.0, 0.1, 7.0}) {
      RadialFunction cu(g, c * u.values);
      EXPECT_NEAR(lp_norm(cu, p, Ball::origin(3, 0.8)), std::abs(c) * lp_norm(u, p, Ball::origin(3, 0.8)),
                  1e-12 * std::abs(c) * lp_norm(u, p, Ball::origin(3, 0.8)));
    }
}

TEST(Grid, EmptyRegionThrows) {
  const CartesianGrid2D g(1.0, 5);
  Ball tiny{Eigen::Vector2d(0.1, 0.1), 0.01, false};
  EXPECT_THROW(region_nodes(g, tiny), Error);
}

TEST(Grid, InfSup) {
  const CartesianGrid2D g(1.0, 129);
  const auto c = sample(g, [](const Eigen::Vector2d&) { return 2.5; });
  auto [lo, hi] = inf_sup(c, Ball::origin(2, 1));
  EXPECT_EQ(lo, 2.5);
  EXPECT_EQ(hi, 2.5);
  const auto cone = sample(g, [](const Eigen::Vector2d& x) { return x.norm(); });
  std::tie(lo, hi) = inf_sup(cone, Ball::origin(2, 1));
  EXPECT_NEAR(lo, 0.0, 1e-15);
  EXPECT_NEAR(hi, 1.0, 1e-12);
  const auto tent = sample(g, [](const Eigen::Vector2d& x) { return 1 - x.norm(); });
  std::tie(lo, hi) = inf_sup(tent, Ball::origin(2, 0.5));
  EXPECT_NEAR(lo, 0.5, g.spacing());
  EXPECT_NEAR(hi, 1.0, 1e-15);
}

TEST(Grid, PlanarDifferencesExactOnQuadratics) {
  const CartesianGrid2D g(1.0, 33);
  const auto aff = sample(g, [](const Eigen::Vector2d& x) { return 1 + 2 * x[0] - 3 * x[1]; });
  const auto ga = discrete_gradient(aff);
  const auto ha = discrete_hessian(aff);
  const auto sq = sample(g, [](const Eigen::Vector2d& x) { return x.squaredNorm(); });
  const auto gs = discrete_gradient(sq);
  const auto hs = discrete_hessian(sq);
  const auto xy = sample(g, [](const Eigen::Vector2d& x) { return x[0] * x[1]; });
  const auto hx = discrete_hessian(xy);
  for (int k = 0; k < g.size(); ++k) {
    EXPECT_NEAR((ga.row(k) - Eigen::RowVector2d(2, -3)).norm(), 0.0, 1e-10);
    EXPECT_NEAR(ha[k].norm(), 0.0, 1e-9);
    EXPECT_NEAR((gs.row(k).transpose() - 2 * g.point(k)).norm(), 0.0, 1e-10);
    EXPECT_NEAR((hs[k] - 2 * Eigen::Matrix2d::Identity()).norm(), 0.0, 1e-9);
    EXPECT_NEAR(hx[k](0, 1), 1.0, 1e-9);
  }
}

namespace {

double radial_error(int m) {
  const RadialGrid g(0, 1, m, 3);
  const auto u = sample(g, [](double r) { return std::exp(-r * r) * std::cos(r); });
  const auto d = radial_derivatives(u);
  double e = 0;
  for (int i = 0; i < m; ++i) {
    const double r = g.node(i);
    const double du = -std::exp(-r * r) * (2 * r * std::cos(r) + std::sin(r));
    e = std::max(e, std::abs(d.d1[i] - du));
  }
  return e;
}

double planar_error(int m) {
  const CartesianGrid2D g(1.0, m);
  const auto u = sample(g, [](const Eigen::Vector2d& x) { return std::sin(x[0]) * std::exp(x[1]); });
  const auto H = discrete_hessian(u);
  double e = 0;
  for (int k = 0; k < g.size(); ++k) {
    const auto x = g.point(k);
    Eigen::Matrix2d ex;
    ex << -std::sin(x[0]) * std::exp(x[1]), std::cos(x[0]) * std::exp(x[1]), std::cos(x[0]) * std::exp(x[1]),
        std::sin(x[0]) * std::exp(x[1]);
    e = std::max(e, (H[k] - ex).cwiseAbs().maxCoeff());
  }
  return e;
}

}  // namespace

TEST(Grid, SecondOrderConsistency) {
  std::vector<double> lh, le, ph, pe;
  for (int m : {33, 65, 129, 257}) {
    lh.push_back(std::log(1.0 / (m - 1)));
    le.push_back(std::log(radial_error(m)));
    ph.push_back(std::log(2.0 / (m - 1)));
    pe.push_back(std::log(planar_error(m)));
  }
  auto slope = [](const std::vector<double>& x, const std::vector<double>& y) {
    const double n = x.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < x.size(); ++i) sx += x[i], sy += y[i], sxx += x[i] * x[i], sxy += x[i] * y[i];
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
  };
  EXPECT_GE(slope(lh, le), 1.9);
  EXPECT_GE(slope(ph, pe), 1.9);
}

TEST(Grid, Distances) {
  const CartesianGrid2D g(1.0, 21);
  const auto d = dist_to_boundary(g, Ball::origin(2, 1));
  EXPECT_NEAR(d[g.index(10, 10)], 1.0, 1e-15);
  EXPECT_NEAR(d[g.index(20, 10)], 0.0, 1e-15);
  const auto ds = dist_to_set(g, {Eigen::Vector2d::Zero()});
  for (int k = 0; k < g.size(); ++k) EXPECT_NEAR(ds[k], g.point(k).norm(), 1e-15);
}

TEST(Grid, CsvHeader) {
  const RadialGrid g(0, 1, 3, 2);
  std::ostringstream os;
  write_csv(os, sample(g, [](double r) { return r; }));
  EXPECT_EQ(os.str().substr(0, 8), "r,value\n");
}

TEST(Grid, InvalidConstruction) {
  EXPECT_THROW(RadialGrid(0, 1, 2, 2), Error);
  EXPECT_THROW(RadialGrid(1, 1, 5, 2), Error);
  EXPECT_THROW(CartesianGrid2D(1.0, 4), Error);
}
