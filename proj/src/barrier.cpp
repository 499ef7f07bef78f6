#include "hopflab/barrier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace hopflab {

BarrierConstants barrier_constants(const BarrierSpec& spec) {
  spec.validate();
  const auto& p = spec.params;
  BarrierConstants c;
  c.beta = spec.beta();
  const double slope = spec.slope();
  c.pucci_lower = slope * ((c.beta + 1.0) * p.lambda - (p.n - 1) * p.Lambda);
  // |x|^-(beta+2) and |x|^-(beta+1) are >= 1 on the unit annulus, so the
  // weighted inequality is sharp at |x| = 1.
  c.c0 = std::pow(slope, p.alpha) * c.pucci_lower;
  c.A1 = slope;
  c.A3 = slope;
  c.A2 = slope * std::pow(2.0, c.beta + 1.0);
  c.A4 = c.A2;
  return c;
}

namespace {

/// Unit direction number k out of count, spread over the (e1, e2) circle and
/// tilted towards e3 in higher dimension.
Eigen::VectorXd direction(int n, int k, int count) {
  Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
  const double theta = 2.0 * std::numbers::pi * (k + 0.5) / count;
  e[0] = std::cos(theta);
  e[1] = std::sin(theta);
  if (n >= 3) e[2] = 0.5 * std::sin(3.0 * theta);
  return e.normalized();
}

}  // namespace

BarrierCertificate certify_barrier(const BarrierSpec& spec, int samples, double tol) {
  require(samples >= 1, "certify_barrier: samples must be >= 1");
  spec.validate();
  BarrierCertificate cert;
  cert.spec = spec;
  cert.constants = barrier_constants(spec);
  cert.samples = samples;
  cert.tol = tol;

  const auto& p = spec.params;
  const auto& k = cert.constants;
  const double M = spec.M, R = spec.R;
  const double pucci_rhs = k.c0 * std::pow(M, 1.0 + p.alpha) / std::pow(R, 2.0 + p.alpha);

  auto& m = cert.margins;
  const double inf = std::numeric_limits<double>::infinity();
  m = {inf, inf, inf, inf, inf, inf};
  std::string worst_name;
  double worst = inf;
  Eigen::VectorXd worst_point;

  auto update = [&](double& slot, double value, const char* name, const Eigen::VectorXd& x) {
    slot = std::min(slot, value);
    if (value < worst) {
      worst = value;
      worst_name = name;
      worst_point = x;
    }
  };

  const int n_angle = std::min(samples, 8);
  const int n_radius = std::max(1, samples / n_angle);
  for (int i = 0; i < n_radius; ++i) {
    // Radii include both end points of the closed annulus.
    const double t = n_radius == 1 ? 0.0 : double(i) / (n_radius - 1);
    const double r = R / 2.0 + t * (R / 2.0);
    const double gamma = barrier_profile(spec, r);
    const double d1 = barrier_profile_d1(spec, r);
    const double d2 = barrier_profile_d2(spec, r);
    const double grad = std::abs(d1);
    const double dist = R - r;
    const double weighted = (p.alpha == 0.0 ? 1.0 : std::pow(grad, p.alpha)) *
                            radial_pucci(d2, d1, r, p, PucciSign::Minus);
    for (int a = 0; a < n_angle; ++a) {
      const Eigen::VectorXd x = r * direction(p.n, a, n_angle);
      update(m.pucci, weighted - pucci_rhs, "degenerate Pucci inequality", x);
      update(m.lower_sandwich, gamma - k.A1 * (M / R) * dist, "lower geometric bound", x);
      update(m.upper_sandwich, k.A2 * (M / R) * dist - gamma, "upper geometric bound", x);
      update(m.grad_lower, grad - k.A3 * M / R, "lower gradient bound", x);
      update(m.grad_upper, k.A4 * M / R - grad, "upper gradient bound", x);
    }
  }
  for (int a = 0; a < n_angle; ++a) {
    const Eigen::VectorXd e = direction(p.n, a, n_angle);
    const Eigen::VectorXd outer = R * e;
    const Eigen::VectorXd inner = (R / 2.0) * e;
    const double err = std::max(std::abs(barrier_eval(spec, outer)), std::abs(barrier_eval(spec, inner) - M));
    update(m.boundary, -err, "boundary values", err > 0 ? outer : inner);
  }
  cert.pass = worst >= -tol;
  if (!cert.pass) {
    cert.failed_property = worst_name;
    cert.witness = worst_point;
  }
  return cert;
}

}  // namespace hopflab
