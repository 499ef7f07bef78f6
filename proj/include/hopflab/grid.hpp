#pragma once

#include <Eigen/Dense>

#include <functional>
#include <iosfwd>
#include <utility>
#include <vector>

#include "hopflab/common.hpp"

namespace hopflab {

/// Closed ball B_radius(center), optionally cut to the upper half {x_last > center_last}.
struct Ball {
  Eigen::VectorXd center;
  double radius = 1.0;
  bool upper_half = false;

  static Ball origin(int dim, double radius) { return {Eigen::VectorXd::Zero(dim), radius, false}; }
  bool contains(const Eigen::VectorXd& x, double slack = 1e-12) const;
};

/// Uniform radial grid on [r_min, r_max]; `dim` is the ambient dimension used
/// for the surface-measure weight r^(dim-1).
struct RadialGrid {
  double r_min = 0.0;
  double r_max = 1.0;
  int m = 3;
  int dim = 2;

  RadialGrid() = default;
  RadialGrid(double r_min_, double r_max_, int m_, int dim_);
  double spacing() const { return (r_max - r_min) / (m - 1); }
  double node(int i) const { return i == m - 1 ? r_max : r_min + i * spacing(); }
  Eigen::VectorXd nodes() const;
  int size() const { return m; }
};

/// m x m node lattice on [-L, L]^2; the working domain is the closed disk of radius L.
struct CartesianGrid2D {
  double half_width = 1.0;
  int m = 3;

  CartesianGrid2D() = default;
  CartesianGrid2D(double half_width_, int m_);
  double spacing() const { return 2.0 * half_width / (m - 1); }
  double coord(int i) const { return -half_width + i * spacing(); }
  int index(int i, int j) const { return j * m + i; }
  Eigen::Vector2d point(int k) const { return {coord(k % m), coord(k / m)}; }
  int size() const { return m * m; }
  bool in_disk(int k) const { return point(k).norm() <= half_width * (1.0 + 1e-12); }
  /// Disk nodes within one spacing of the rim; they carry Dirichlet data.
  bool is_boundary(int k, int band = 1) const;
};

template <typename Grid>
struct GridFunction {
  Grid grid;
  Eigen::VectorXd values;

  GridFunction() = default;
  GridFunction(Grid g, Eigen::VectorXd v) : grid(std::move(g)), values(std::move(v)) {
    require(values.size() == grid.size(), "GridFunction: value count must match the grid");
  }
  int size() const { return grid.size(); }
  double operator[](int k) const { return values[k]; }
};

using RadialFunction = GridFunction<RadialGrid>;
using PlanarFunction = GridFunction<CartesianGrid2D>;

RadialFunction sample(const RadialGrid& grid, const std::function<double(double)>& f);
PlanarFunction sample(const CartesianGrid2D& grid, const std::function<double(const Eigen::Vector2d&)>& f);

/// Position of node k as a point (radial nodes are placed on the e1 axis).
Eigen::VectorXd node_point(const RadialGrid& grid, int k);
Eigen::VectorXd node_point(const CartesianGrid2D& grid, int k);

/// Indices of the nodes lying in the region (empty region throws).
std::vector<int> region_nodes(const RadialGrid& grid, const Ball& region);
std::vector<int> region_nodes(const CartesianGrid2D& grid, const Ball& region);

/// Quadrature weights of the nodes for integration over the region. Radial:
/// product trapezoid with exact r^(n-1) moments; planar: exact area of each
/// node's cell intersected with the region.
Eigen::VectorXd quadrature_weights(const RadialGrid& grid, const Ball& region);
Eigen::VectorXd quadrature_weights(const CartesianGrid2D& grid, const Ball& region);

/// Volume of the unit ball in R^n and area of the unit sphere S^(n-1).
double unit_ball_volume(int n);
double unit_sphere_area(int n);

/// (int_region |u|^p)^(1/p); p = +inf gives the sup over region nodes. For p < 1
/// this is the non-averaged quasi-norm.
double lp_norm(const RadialFunction& u, double p, const Ball& region);
double lp_norm(const PlanarFunction& u, double p, const Ball& region);

std::pair<double, double> inf_sup(const RadialFunction& u, const Ball& region);
std::pair<double, double> inf_sup(const PlanarFunction& u, const Ball& region);

/// Radial first and second derivatives. Interior nodes use central
/// differences, end nodes one-sided second-order stencils; a node at r = 0
/// uses the even extension (u'(0) = 0, u''(0) = 2 (u_1 - u_0) / h^2).
struct RadialDerivatives {
  Eigen::VectorXd d1, d2;
};
RadialDerivatives radial_derivatives(const RadialFunction& u);

/// Planar gradient (rows = nodes) and Hessians.
Eigen::MatrixX2d discrete_gradient(const PlanarFunction& u);
std::vector<Eigen::Matrix2d> discrete_hessian(const PlanarFunction& u);

/// Radius-R-minus-distance for a ball; negative outside.
RadialFunction dist_to_boundary(const RadialGrid& grid, const Ball& region);
PlanarFunction dist_to_boundary(const CartesianGrid2D& grid, const Ball& region);
/// Brute-force distance from each node to the nearest point of a node set.
PlanarFunction dist_to_set(const CartesianGrid2D& grid, const std::vector<Eigen::Vector2d>& set);

/// Piecewise-linear (radial) and bilinear (planar) interpolation.
double interpolate(const RadialFunction& u, double r);
double interpolate(const PlanarFunction& u, const Eigen::Vector2d& x);

/// CSV with a header row: "r,value" or "x,y,value".
void write_csv(std::ostream& os, const RadialFunction& u);
void write_csv(std::ostream& os, const PlanarFunction& u);

}  // namespace hopflab
