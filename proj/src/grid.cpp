#include "hopflab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>

namespace hopflab {

bool Ball::contains(const Eigen::VectorXd& x, double slack) const {
  if ((x - center).norm() > radius + slack) return false;
  if (upper_half && x[x.size() - 1] <= center[center.size() - 1]) return false;
  return true;
}

RadialGrid::RadialGrid(double r_min_, double r_max_, int m_, int dim_) : r_min(r_min_), r_max(r_max_), m(m_), dim(dim_) {
  require(r_min >= 0.0 && r_min < r_max, "RadialGrid: need 0 <= r_min < r_max");
  require(m >= 3, "RadialGrid: need at least 3 nodes");
  require(dim >= 1, "RadialGrid: dimension must be >= 1");
}

Eigen::VectorXd RadialGrid::nodes() const {
  Eigen::VectorXd r(m);
  for (int i = 0; i < m; ++i) r[i] = node(i);
  return r;
}

CartesianGrid2D::CartesianGrid2D(double half_width_, int m_) : half_width(half_width_), m(m_) {
  require(half_width > 0.0, "CartesianGrid2D: half-width must be positive");
  require(m >= 3 && m % 2 == 1, "CartesianGrid2D: m must be odd and >= 3");
}

bool CartesianGrid2D::is_boundary(int k, int band) const {
  return in_disk(k) && point(k).norm() > half_width - band * spacing() * (1.0 - 1e-12);
}

RadialFunction sample(const RadialGrid& grid, const std::function<double(double)>& f) {
  Eigen::VectorXd v(grid.size());
  for (int i = 0; i < grid.size(); ++i) v[i] = f(grid.node(i));
  return {grid, std::move(v)};
}

PlanarFunction sample(const CartesianGrid2D& grid, const std::function<double(const Eigen::Vector2d&)>& f) {
  Eigen::VectorXd v(grid.size());
  for (int k = 0; k < grid.size(); ++k) v[k] = f(grid.point(k));
  return {grid, std::move(v)};
}

Eigen::VectorXd node_point(const RadialGrid& grid, int k) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(grid.dim);
  x[0] = grid.node(k);
  return x;
}

Eigen::VectorXd node_point(const CartesianGrid2D& grid, int k) { return grid.point(k); }

namespace {

void check_radial_region(const RadialGrid& grid, const Ball& region) {
  require(region.center.size() == grid.dim, "radial region: center dimension mismatch");
  require(region.center.norm() == 0.0, "radial region: balls must be centred at the origin");
  require(!region.upper_half, "radial region: half balls are not radial");
  require(region.radius > grid.r_min, "radial region: empty region");
}

void check_planar_region(const CartesianGrid2D& grid, const Ball& region) {
  require(region.center.size() == 2, "planar region: center must be 2D");
  require(region.radius > 0.0, "planar region: empty region");
  require(region.center.norm() + region.radius <= grid.half_width * (1.0 + 1e-9),
          "planar region: region must lie inside the grid disk");
}

// Antiderivative of sqrt(R^2 - x^2).
double circle_primitive(double x, double R) {
  x = std::clamp(x, -R, R);
  return 0.5 * (x * std::sqrt(std::max(0.0, R * R - x * x)) + R * R * std::asin(x / R));
}

// Exact area of [x0,x1] x [y0,y1] intersected with the disk of radius R at the origin.
double rect_disk_area(double x0, double x1, double y0, double y1, double R) {
  const double a = std::max(x0, -R), b = std::min(x1, R);
  if (a >= b || y0 >= y1) return 0.0;
  std::vector<double> cuts{a, b};
  for (double y : {y0, y1}) {
    if (std::abs(y) < R) {
      const double xc = std::sqrt(R * R - y * y);
      for (double c : {-xc, xc})
        if (c > a && c < b) cuts.push_back(c);
    }
  }
  std::sort(cuts.begin(), cuts.end());
  double area = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double lo = cuts[i], hi = cuts[i + 1];
    if (hi <= lo) continue;
    const double mid = 0.5 * (lo + hi);
    const double s = std::sqrt(std::max(0.0, R * R - mid * mid));
    const bool upper_is_circle = s < y1;
    const bool lower_is_circle = -s > y0;
    const double up_mid = upper_is_circle ? s : y1;
    const double low_mid = lower_is_circle ? -s : y0;
    if (up_mid <= low_mid) continue;
    const double arc = circle_primitive(hi, R) - circle_primitive(lo, R);
    const double upper = upper_is_circle ? arc : y1 * (hi - lo);
    const double lower = lower_is_circle ? -arc : y0 * (hi - lo);
    area += upper - lower;
  }
  return area;
}

}  // namespace

std::vector<int> region_nodes(const RadialGrid& grid, const Ball& region) {
  check_radial_region(grid, region);
  std::vector<int> out;
  for (int i = 0; i < grid.size(); ++i)
    if (grid.node(i) <= region.radius * (1.0 + 1e-12)) out.push_back(i);
  require(!out.empty(), "region contains no grid nodes");
  return out;
}

std::vector<int> region_nodes(const CartesianGrid2D& grid, const Ball& region) {
  check_planar_region(grid, region);
  std::vector<int> out;
  const double slack = 1e-12 * grid.half_width;
  for (int k = 0; k < grid.size(); ++k)
    if (region.contains(grid.point(k), slack)) out.push_back(k);
  require(!out.empty(), "region contains no grid nodes");
  return out;
}

double unit_ball_volume(int n) { return std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n + 1.0); }
double unit_sphere_area(int n) { return n * unit_ball_volume(n); }

Eigen::VectorXd quadrature_weights(const RadialGrid& grid, const Ball& region) {
  check_radial_region(grid, region);
  const int k = grid.dim - 1;
  const double sphere = grid.dim == 1 ? 2.0 : unit_sphere_area(grid.dim);
  const double h = grid.spacing();
  auto moment = [](double lo, double hi, int j) { return (std::pow(hi, j + 1) - std::pow(lo, j + 1)) / (j + 1); };
  Eigen::VectorXd w = Eigen::VectorXd::Zero(grid.size());
  for (int i = 0; i + 1 < grid.size(); ++i) {
    const double a = grid.node(i), b = grid.node(i + 1);
    const double c = std::min(b, region.radius);
    if (c <= a) break;
    const double Ik = moment(a, c, k), Ik1 = moment(a, c, k + 1);
    w[i] += sphere * (b * Ik - Ik1) / h;
    w[i + 1] += sphere * (Ik1 - a * Ik) / h;
  }
  return w;
}

Eigen::VectorXd quadrature_weights(const CartesianGrid2D& grid, const Ball& region) {
  check_planar_region(grid, region);
  const double h = grid.spacing();
  Eigen::VectorXd w = Eigen::VectorXd::Zero(grid.size());
  for (int k = 0; k < grid.size(); ++k) {
    const Eigen::Vector2d x = grid.point(k) - region.center.head<2>();
    if (x.norm() > region.radius + h) continue;
    double y0 = x.y() - h / 2, y1 = x.y() + h / 2;
    if (region.upper_half) y0 = std::max(y0, 0.0);
    w[k] = rect_disk_area(x.x() - h / 2, x.x() + h / 2, y0, y1, region.radius);
  }
  return w;
}

namespace {

template <typename Grid>
double lp_norm_impl(const GridFunction<Grid>& u, double p, const Ball& region) {
  require(p > 0.0, "lp_norm: exponent must be positive");
  if (std::isinf(p)) {
    double sup = 0.0;
    for (int k : region_nodes(u.grid, region)) sup = std::max(sup, std::abs(u.values[k]));
    return sup;
  }
  const Eigen::VectorXd w = quadrature_weights(u.grid, region);
  double acc = 0.0;
  for (int k = 0; k < u.size(); ++k)
    if (w[k] != 0.0) acc += w[k] * std::pow(std::abs(u.values[k]), p);
  return acc == 0.0 ? 0.0 : std::pow(acc, 1.0 / p);
}

template <typename Grid>
std::pair<double, double> inf_sup_impl(const GridFunction<Grid>& u, const Ball& region) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (int k : region_nodes(u.grid, region)) {
    lo = std::min(lo, u.values[k]);
    hi = std::max(hi, u.values[k]);
  }
  return {lo, hi};
}

}  // namespace

double lp_norm(const RadialFunction& u, double p, const Ball& region) { return lp_norm_impl(u, p, region); }
double lp_norm(const PlanarFunction& u, double p, const Ball& region) { return lp_norm_impl(u, p, region); }
std::pair<double, double> inf_sup(const RadialFunction& u, const Ball& region) { return inf_sup_impl(u, region); }
std::pair<double, double> inf_sup(const PlanarFunction& u, const Ball& region) { return inf_sup_impl(u, region); }

namespace {

// First and second derivatives along a strided line of `count` values.
void line_derivatives(const double* v, int stride, int count, double h, double* d1, double* d2, int out_stride) {
  auto at = [&](int i) { return v[i * stride]; };
  for (int i = 1; i + 1 < count; ++i) {
    d1[i * out_stride] = (at(i + 1) - at(i - 1)) / (2 * h);
    if (d2) d2[i * out_stride] = (at(i + 1) - 2 * at(i) + at(i - 1)) / (h * h);
  }
  const int e = count - 1;
  d1[0] = (-3 * at(0) + 4 * at(1) - at(2)) / (2 * h);
  d1[e * out_stride] = (3 * at(e) - 4 * at(e - 1) + at(e - 2)) / (2 * h);
  if (d2) {
    if (count >= 4) {
      d2[0] = (2 * at(0) - 5 * at(1) + 4 * at(2) - at(3)) / (h * h);
      d2[e * out_stride] = (2 * at(e) - 5 * at(e - 1) + 4 * at(e - 2) - at(e - 3)) / (h * h);
    } else {
      d2[0] = d2[e * out_stride] = (at(0) - 2 * at(1) + at(2)) / (h * h);
    }
  }
}

}  // namespace

RadialDerivatives radial_derivatives(const RadialFunction& u) {
  const int m = u.size();
  const double h = u.grid.spacing();
  RadialDerivatives d{Eigen::VectorXd(m), Eigen::VectorXd(m)};
  line_derivatives(u.values.data(), 1, m, h, d.d1.data(), d.d2.data(), 1);
  if (u.grid.r_min == 0.0) {
    d.d1[0] = 0.0;
    d.d2[0] = 2.0 * (u.values[1] - u.values[0]) / (h * h);
  }
  return d;
}

Eigen::MatrixX2d discrete_gradient(const PlanarFunction& u) {
  const int m = u.grid.m;
  const double h = u.grid.spacing();
  Eigen::MatrixX2d g(u.size(), 2);
  Eigen::VectorXd gx(u.size()), gy(u.size());
  for (int j = 0; j < m; ++j) line_derivatives(u.values.data() + j * m, 1, m, h, gx.data() + j * m, nullptr, 1);
  for (int i = 0; i < m; ++i) line_derivatives(u.values.data() + i, m, m, h, gy.data() + i, nullptr, m);
  g.col(0) = gx;
  g.col(1) = gy;
  return g;
}

std::vector<Eigen::Matrix2d> discrete_hessian(const PlanarFunction& u) {
  const int m = u.grid.m;
  const double h = u.grid.spacing();
  const int N = u.size();
  Eigen::VectorXd gx(N), gy(N), gxx(N), gyy(N), gxy(N);
  for (int j = 0; j < m; ++j)
    line_derivatives(u.values.data() + j * m, 1, m, h, gx.data() + j * m, gxx.data() + j * m, 1);
  for (int i = 0; i < m; ++i) line_derivatives(u.values.data() + i, m, m, h, gy.data() + i, gyy.data() + i, m);
  // Mixed derivative: x-derivative of the y-derivative.
  for (int j = 0; j < m; ++j) line_derivatives(gy.data() + j * m, 1, m, h, gxy.data() + j * m, nullptr, 1);
  std::vector<Eigen::Matrix2d> H(N);
  for (int k = 0; k < N; ++k) H[k] << gxx[k], gxy[k], gxy[k], gyy[k];
  return H;
}

RadialFunction dist_to_boundary(const RadialGrid& grid, const Ball& region) {
  check_radial_region(grid, region);
  return sample(grid, [&](double r) { return region.radius - r; });
}

PlanarFunction dist_to_boundary(const CartesianGrid2D& grid, const Ball& region) {
  require(region.center.size() == 2, "dist_to_boundary: center must be 2D");
  const Eigen::Vector2d c = region.center.head<2>();
  return sample(grid, [&](const Eigen::Vector2d& x) { return region.radius - (x - c).norm(); });
}

PlanarFunction dist_to_set(const CartesianGrid2D& grid, const std::vector<Eigen::Vector2d>& set) {
  require(!set.empty(), "dist_to_set: node set must be nonempty");
  return sample(grid, [&](const Eigen::Vector2d& x) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& y : set) best = std::min(best, (x - y).squaredNorm());
    return std::sqrt(best);
  });
}

double interpolate(const RadialFunction& u, double r) {
  const auto& g = u.grid;
  require(r >= g.r_min - 1e-12 && r <= g.r_max + 1e-12, "interpolate: radius outside grid");
  const double s = (std::clamp(r, g.r_min, g.r_max) - g.r_min) / g.spacing();
  const int i = std::min(int(s), g.m - 2);
  const double t = s - i;
  return (1 - t) * u.values[i] + t * u.values[i + 1];
}

double interpolate(const PlanarFunction& u, const Eigen::Vector2d& x) {
  const auto& g = u.grid;
  const double L = g.half_width;
  require(std::abs(x.x()) <= L * (1 + 1e-12) && std::abs(x.y()) <= L * (1 + 1e-12), "interpolate: point outside grid");
  const double sx = (std::clamp(x.x(), -L, L) + L) / g.spacing();
  const double sy = (std::clamp(x.y(), -L, L) + L) / g.spacing();
  const int i = std::min(int(sx), g.m - 2), j = std::min(int(sy), g.m - 2);
  const double tx = sx - i, ty = sy - j;
  auto v = [&](int a, int b) { return u.values[g.index(a, b)]; };
  return (1 - tx) * (1 - ty) * v(i, j) + tx * (1 - ty) * v(i + 1, j) + (1 - tx) * ty * v(i, j + 1) +
         tx * ty * v(i + 1, j + 1);
}

namespace {
void put(std::ostream& os, double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  os << buf;
}
}  // namespace

void write_csv(std::ostream& os, const RadialFunction& u) {
  os << "r,value\n";
  for (int i = 0; i < u.size(); ++i) {
    put(os, u.grid.node(i));
    os << ',';
    put(os, u.values[i]);
    os << '\n';
  }
}

void write_csv(std::ostream& os, const PlanarFunction& u) {
  os << "x,y,value\n";
  for (int k = 0; k < u.size(); ++k) {
    if (!u.grid.in_disk(k)) continue;
    const auto x = u.grid.point(k);
    put(os, x.x());
    os << ',';
    put(os, x.y());
    os << ',';
    put(os, u.values[k]);
    os << '\n';
  }
}

}  // namespace hopflab
