#include "hopflab/regularity.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hopflab {

// ---------------------------------------------------------------------------
// Modulus of continuity

ModulusOfContinuity ModulusOfContinuity::power(double gamma) {
  ModulusOfContinuity w;
  w.kind = Kind::Power;
  w.gamma = gamma;
  w.validate();
  return w;
}

ModulusOfContinuity ModulusOfContinuity::tabulated(std::vector<double> t, std::vector<double> w) {
  ModulusOfContinuity m;
  m.kind = Kind::Tabulated;
  m.t = std::move(t);
  m.w = std::move(w);
  m.validate();
  return m;
}

double ModulusOfContinuity::operator()(double s) const {
  require(s >= 0.0, "modulus: argument must be >= 0");
  if (kind == Kind::Power) return std::pow(s, gamma);
  if (s >= t.back()) return w.back();
  const auto it = std::upper_bound(t.begin(), t.end(), s);
  const std::size_t i = std::size_t(it - t.begin()) - 1;
  return w[i] + (w[i + 1] - w[i]) * (s - t[i]) / (t[i + 1] - t[i]);
}

bool ModulusOfContinuity::strictly_positive() const {
  if (kind == Kind::Power) return true;
  return std::all_of(w.begin() + 1, w.end(), [](double v) { return v > 0.0; });
}

void ModulusOfContinuity::validate() const {
  if (kind == Kind::Power) {
    require(gamma > 0.0 && gamma <= 1.0, "modulus: power exponent must lie in (0, 1]");
    return;
  }
  require(t.size() == w.size() && t.size() >= 2, "modulus: need matching knot lists of length >= 2");
  require(t[0] == 0.0 && w[0] == 0.0, "modulus: must start at (0, 0)");
  for (std::size_t i = 1; i < t.size(); ++i) {
    require(t[i] > t[i - 1], "modulus: knots must increase");
    require(w[i] >= w[i - 1], "modulus: must be nondecreasing");
  }
  for (double a : t)
    for (double b : t)
      require((*this)(a + b) <= (*this)(a) + (*this)(b) + 1e-12, "modulus: not subadditive on the knots");
}

// ---------------------------------------------------------------------------
// Minimax affine fit

namespace {

// max c.y  s.t.  A y = b (b >= 0), y >= 0; dense tableau, two phases, Bland's rule.
// Returns the simplex multipliers pi (B^T pi = c_B), which solve the primal min b.pi, A^T pi >= c.
Eigen::VectorXd simplex_duals(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const Eigen::VectorXd& c) {
  const int m = int(A.rows()), n = int(A.cols()), cols = n + m;
  Eigen::MatrixXd T(m, cols + 1);
  T << A, Eigen::MatrixXd::Identity(m, m), b;
  std::vector<int> basis(m);
  for (int i = 0; i < m; ++i) basis[i] = n + i;
  const double tol = 1e-11;

  auto pivot = [&](int r, int q) {
    T.row(r) /= T(r, q);
    for (int i = 0; i < m; ++i)
      if (i != r && T(i, q) != 0.0) T.row(i) -= T(i, q) * T.row(r);
    basis[r] = q;
  };
  auto run = [&](const Eigen::VectorXd& cost, int allowed) {
    const int cap = 50 * (cols + 1);
    for (int it = 0; it < cap; ++it) {
      int q = -1;
      for (int j = 0; j < allowed && q < 0; ++j) {
        double d = -cost[j];
        for (int i = 0; i < m; ++i) d += cost[basis[i]] * T(i, j);
        if (d < -tol) q = j;
      }
      if (q < 0) return;
      int r = -1;
      double best = 0.0;
      for (int i = 0; i < m; ++i) {
        if (T(i, q) <= tol) continue;
        const double ratio = T(i, cols) / T(i, q);
        if (r < 0 || ratio < best - tol || (ratio <= best + tol && basis[i] < basis[r])) r = i, best = ratio;
      }
      if (r < 0) fail(ErrorKind::NumericalDegeneracy, "minimax fit: linear program is unbounded");
      pivot(r, q);
    }
    fail(ErrorKind::NumericalDegeneracy, "minimax fit: simplex iteration cap reached");
  };

  Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(cols);
  phase1.tail(m).setConstant(-1.0);
  run(phase1, cols);
  double infeas = 0.0;
  for (int i = 0; i < m; ++i)
    if (basis[i] >= n) infeas += T(i, cols);
  if (infeas > 1e-9) fail(ErrorKind::NumericalDegeneracy, "minimax fit: linear program is infeasible");
  for (int i = 0; i < m; ++i) {
    if (basis[i] < n) continue;
    for (int j = 0; j < n; ++j)
      if (std::abs(T(i, j)) > 1e-9) {
        pivot(i, j);
        break;
      }
  }
  Eigen::VectorXd phase2 = Eigen::VectorXd::Zero(cols);
  phase2.head(n) = c;
  run(phase2, n);

  Eigen::MatrixXd B(m, m);
  Eigen::VectorXd cB(m);
  for (int i = 0; i < m; ++i) {
    B.col(i) = basis[i] < n ? Eigen::VectorXd(A.col(basis[i])) : Eigen::VectorXd::Unit(m, basis[i] - n);
    cB[i] = phase2[basis[i]];
  }
  return B.transpose().partialPivLu().solve(cB);
}

}  // namespace

AffineFit minimax_affine_fit(const std::vector<Eigen::VectorXd>& points, const std::vector<double>& values,
                             const Eigen::VectorXd& anchor_in) {
  require(!points.empty() && points.size() == values.size(), "minimax_affine_fit: need matching samples");
  const int d = int(points[0].size());
  const int N = int(points.size());
  require(N >= d + 2, "minimax_affine_fit: need at least dim + 2 samples");

  Eigen::VectorXd anchor = anchor_in;
  if (anchor.size() == 0) {
    anchor = Eigen::VectorXd::Zero(d);
    for (const auto& p : points) anchor += p;
    anchor /= N;
  }
  require(anchor.size() == d, "minimax_affine_fit: anchor dimension mismatch");

  // normalise geometry and values; the fit is equivariant under both
  double spread = 0.0;
  for (const auto& p : points) {
    require(p.size() == d, "minimax_affine_fit: mixed sample dimensions");
    spread = std::max(spread, (p - anchor).norm());
  }
  Eigen::MatrixXd X(N, d + 1);
  for (int i = 0; i < N; ++i) {
    X(i, 0) = 1.0;
    X.row(i).tail(d) = (points[i] - anchor).transpose() / (spread > 0 ? spread : 1.0);
  }
  if (Eigen::FullPivLU<Eigen::MatrixXd>(X).setThreshold(1e-10).rank() < d + 1)
    fail(ErrorKind::InvalidArgument, "minimax_affine_fit: degenerate sample geometry");

  const Eigen::Map<const Eigen::VectorXd> u(values.data(), N);
  const double mean = u.mean();
  const double scale = std::max((u.array() - mean).abs().maxCoeff(), 1e-300);

  AffineFit fit;
  fit.map.anchor = anchor;
  if ((u.array() - mean).abs().maxCoeff() == 0.0) {
    fit.map.value = mean;
    fit.map.gradient = Eigen::VectorXd::Zero(d);
    return fit;
  }
  const int m = d + 2;
  Eigen::MatrixXd A(m, 2 * N);
  Eigen::VectorXd c(2 * N), b = Eigen::VectorXd::Zero(m);
  b[m - 1] = 1.0;
  for (int i = 0; i < N; ++i) {
    const double ui = (u[i] - mean) / scale;
    A.col(i).head(d + 1) = X.row(i).transpose();
    A.col(N + i).head(d + 1) = -X.row(i).transpose();
    A(m - 1, i) = A(m - 1, N + i) = 1.0;
    c[i] = ui;
    c[N + i] = -ui;
  }
  const Eigen::VectorXd pi = simplex_duals(A, b, c);
  fit.map.value = mean + scale * pi[0];
  fit.map.gradient = scale * pi.segment(1, d) / (spread > 0 ? spread : 1.0);
  for (int i = 0; i < N; ++i) fit.sup_error = std::max(fit.sup_error, std::abs(values[i] - fit.map(points[i])));
  return fit;
}

std::vector<Eigen::VectorXd> ball_samples(const Eigen::VectorXd& center, double rho, int per_radius) {
  require(rho > 0.0 && per_radius >= 1, "ball_samples: need rho > 0 and per_radius >= 1");
  const int d = int(center.size());
  require(d >= 1 && d <= 3, "ball_samples: dimension must be 1, 2 or 3");
  const double step = rho / per_radius;
  std::vector<Eigen::VectorXd> out;
  std::vector<int> idx(d, -per_radius);
  while (true) {
    Eigen::VectorXd off(d);
    long sq = 0;
    for (int a = 0; a < d; ++a) off[a] = idx[a] * step, sq += long(idx[a]) * idx[a];
    if (sq <= long(per_radius) * per_radius) out.push_back(center + off);
    int a = 0;
    while (a < d && ++idx[a] > per_radius) idx[a++] = -per_radius;
    if (a == d) break;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Campanato

namespace {

void check_ball_inside(const Ball& region, const Eigen::VectorXd& c, double rho) {
  require(c.size() == region.center.size(), "campanato: center dimension mismatch");
  if ((c - region.center).norm() + rho > region.radius * (1 + 1e-12))
    fail(ErrorKind::InvalidArgument, "campanato: ball B_rho(x) leaves the region");
}

void finish(CampanatoReport& rep) {
  for (const auto& s : rep.scales) rep.A = std::max(rep.A, s.scaled);
  std::ostringstream os;
  os << rep.scales.size() << " balls; minimax on finite samples attains the infimum, so A may sit slightly below "
     << "the continuum seminorm";
  if (rep.truncated) os << "; scale truncation: under-resolved balls skipped";
  rep.notes = os.str();
}

}  // namespace

CampanatoReport campanato_seminorm(const ScalarField& u, const Ball& region, double gamma,
                                   const std::vector<Eigen::VectorXd>& centers, const std::vector<double>& radii,
                                   int per_radius) {
  require(gamma > 0.0 && gamma <= 1.0, "campanato: gamma must lie in (0, 1]");
  require(!centers.empty() && !radii.empty(), "campanato: need centers and radii");
  CampanatoReport rep;
  for (const auto& c : centers)
    for (double rho : radii) {
      require(rho > 0.0, "campanato: radii must be positive");
      check_ball_inside(region, c, rho);
      const auto pts = ball_samples(c, rho, per_radius);
      std::vector<double> vals;
      for (const auto& p : pts) vals.push_back(u(p));
      const AffineFit fit = minimax_affine_fit(pts, vals, c);
      rep.scales.push_back({c, rho, fit.sup_error, fit.sup_error / std::pow(rho, 1.0 + gamma), int(pts.size())});
    }
  finish(rep);
  return rep;
}

CampanatoReport campanato_seminorm(const PlanarFunction& u, const Ball& region, double gamma,
                                   const std::vector<Eigen::VectorXd>& centers, const std::vector<double>& radii) {
  require(gamma > 0.0 && gamma <= 1.0, "campanato: gamma must lie in (0, 1]");
  require(!centers.empty() && !radii.empty(), "campanato: need centers and radii");
  const auto& g = u.grid;
  const double h = g.spacing();
  CampanatoReport rep;
  for (const auto& c : centers)
    for (double rho : radii) {
      require(rho > 0.0, "campanato: radii must be positive");
      check_ball_inside(region, c, rho);
      if (2.0 * rho / h < 8.0) {
        rep.truncated = true;
        continue;
      }
      std::vector<Eigen::VectorXd> pts;
      std::vector<double> vals;
      for (int k = 0; k < g.size(); ++k) {
        const Eigen::VectorXd x = g.point(k);
        if (g.in_disk(k) && (x - c).norm() <= rho * (1 + 1e-12)) {
          pts.push_back(x);
          vals.push_back(u.values[k]);
        }
      }
      const AffineFit fit = minimax_affine_fit(pts, vals, c);
      rep.scales.push_back({c, rho, fit.sup_error, fit.sup_error / std::pow(rho, 1.0 + gamma), int(pts.size())});
    }
  finish(rep);
  return rep;
}

// ---------------------------------------------------------------------------
// Dyadic expansion

DyadicExpansion dyadic_expansion(const ScalarField& u, const Eigen::VectorXd& x0, double gamma, int k_max, double A,
                                 int per_radius, double tol) {
  require(gamma > 0.0 && gamma <= 1.0, "dyadic_expansion: gamma must lie in (0, 1]");
  require(k_max >= 1, "dyadic_expansion: k_max must be >= 1");
  require(x0.norm() <= 0.5 + 1e-12, "dyadic_expansion: x0 must lie in B_1/2");
  DyadicExpansion out;
  std::vector<Eigen::VectorXd> remainder_pts;
  for (int k = 1; k <= k_max; ++k) {
    DyadicStep s;
    s.k = k;
    s.r = std::ldexp(1.0, -k);
    const auto pts = ball_samples(x0, s.r, per_radius);
    std::vector<double> vals;
    for (const auto& p : pts) vals.push_back(u(p));
    const AffineFit fit = minimax_affine_fit(pts, vals, x0);
    s.p = fit.map.gradient;
    s.c = fit.map.value;
    s.fit_error = fit.sup_error;
    out.steps.push_back(s);
    if (s.r <= 0.25) remainder_pts.insert(remainder_pts.end(), pts.begin(), pts.end());
  }
  out.A = A;
  if (out.A <= 0.0)
    for (const auto& s : out.steps) out.A = std::max(out.A, s.fit_error / std::pow(s.r, 1.0 + gamma));

  bool ok = true;
  for (std::size_t k = 0; k < out.steps.size(); ++k) {
    auto& s = out.steps[k];
    s.dp_bound = 8.0 * out.A * std::pow(s.r, gamma);
    s.dc_bound = 4.0 * out.A * std::pow(s.r, 1.0 + gamma);
    if (k + 1 < out.steps.size()) {
      s.dp = (s.p - out.steps[k + 1].p).norm();
      s.dc = std::abs(s.c - out.steps[k + 1].c);
    }
    ok = ok && s.dp <= s.dp_bound + tol && s.dc <= s.dc_bound + tol;
  }
  const auto& last = out.steps.back();
  out.gradient = last.p;
  out.c_limit = last.c;
  const double u0 = u(x0);
  out.value_gap = std::abs(last.c - u0);
  ok = ok && out.value_gap <= 2.0 * out.A * std::pow(last.r, 1.0 + gamma) + tol;

  for (const auto& x : remainder_pts) {
    const double d = (x - x0).norm();
    if (d == 0.0) continue;
    const double l = u0 + out.gradient.dot(x - x0);
    out.remainder = std::max(out.remainder, std::abs(u(x) - l) / std::pow(d, 1.0 + gamma));
  }
  out.pass = ok;
  std::ostringstream os;
  os << "A = " << out.A << ", |c - u(x0)| = " << out.value_gap << ", remainder constant " << out.remainder;
  if (!ok) os << "; telescoping bound violated (u may not be C^{1,gamma} at these scales)";
  out.notes = os.str();
  return out;
}

// ---------------------------------------------------------------------------
// Uniform C^{1,omega} constants

namespace {

double gradient_seminorm(const std::vector<Eigen::VectorXd>& pts, const std::vector<Eigen::VectorXd>& grads,
                         const ModulusOfContinuity& omega) {
  double out = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      const double w = omega((pts[i] - pts[j]).norm());
      if (w > 0.0) out = std::max(out, (grads[i] - grads[j]).norm() / w);
    }
  return out;
}

InequalityReport bound(const std::string& name, double lhs, double rhs, double tol) {
  InequalityReport r;
  r.name = name;
  r.lhs = lhs;
  r.rhs = rhs;
  r.tolerance = tol;
  r.measured_constant = lhs;
  r.decide();
  return r;
}

}  // namespace

C1OmegaReport c1omega_constants_check(const ScalarField& u, const VectorField& grad_u, int dim, double rho,
                                      double sigma, double R, const ModulusOfContinuity& omega, double T,
                                      int per_radius, double tol) {
  omega.validate();
  require(0.0 < rho && rho < R, "c1omega: need 0 < rho < R");
  require(0.0 < sigma && sigma <= R - rho + 1e-12, "c1omega: need 0 < sigma <= R - rho");
  require(T >= 0.0, "c1omega: T must be >= 0");
  const Eigen::VectorXd o = Eigen::VectorXd::Zero(dim);
  C1OmegaReport out;

  const auto inner = ball_samples(o, sigma, per_radius);
  std::vector<Eigen::VectorXd> grads;
  for (const auto& x0 : inner) {
    const Eigen::VectorXd p = grad_u(x0);
    grads.push_back(p);
    out.S = std::max(out.S, p.norm());
    const double u0 = u(x0);
    for (const auto& x : ball_samples(x0, rho, per_radius)) {
      const double d = (x - x0).norm();
      const double w = omega(d);
      if (d == 0.0 || w == 0.0) continue;
      out.hypothesis_T = std::max(out.hypothesis_T, std::abs(u(x) - u0 - p.dot(x - x0)) / (d * w));
    }
  }
  if (out.hypothesis_T > T + tol) {
    std::ostringstream os;
    os << "c1omega: expansion hypothesis fails: needs T >= " << out.hypothesis_T << ", given " << T;
    fail(ErrorKind::CheckFailed, os.str());
  }
  for (const auto& x : ball_samples(o, R, per_radius)) out.sup_u = std::max(out.sup_u, std::abs(u(x)));

  out.checks.push_back(bound("grad_sup", out.S, 2.0 * out.sup_u / rho + T * omega(rho / 2), tol));
  if (rho / 2 <= sigma + 1e-12) {
    const auto half = ball_samples(o, rho / 2, per_radius);
    std::vector<Eigen::VectorXd> gh;
    for (const auto& x : half) gh.push_back(grad_u(x));
    out.checks.push_back(bound("grad_seminorm_half", gradient_seminorm(half, gh, omega), 8.0 * T, tol));
  }
  const double semi = gradient_seminorm(inner, grads, omega);
  if (omega.strictly_positive()) {
    out.checks.push_back(bound("grad_seminorm_S", semi, 8.0 * T + 2.0 * out.S / omega(rho), tol));
    out.checks.push_back(bound("grad_seminorm", semi, 10.0 * T + 4.0 * out.sup_u / (rho * omega(rho)), tol));
  }
  if (omega.kind == ModulusOfContinuity::Kind::Power) {
    const double g = omega.gamma;
    out.checks.push_back(bound("power_S", semi, 8.0 * (1.0 + std::pow(rho, -g)) * (T + out.S), tol));
    out.checks.push_back(bound("power_noS", semi, 10.0 * (1.0 + std::pow(rho, -(1.0 + g))) * (T + out.sup_u), tol));
  }
  out.pass = std::all_of(out.checks.begin(), out.checks.end(), [](const auto& r) { return r.pass; });
  return out;
}

}  // namespace hopflab
