#include "hopflab/freeboundary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "hopflab/report.hpp"

namespace hopflab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string short_num(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

}  // namespace

RadialPositivePart positive_part(const RadialFunction& u) {
  RadialPositivePart out{u, Eigen::VectorXd::Zero(u.size())};
  out.u.values = u.values.cwiseMax(0.0);
  const auto der = radial_derivatives(u);
  for (int i = 0; i < u.size(); ++i)
    if (u.values[i] > 0.0) out.grad[i] = der.d1[i];
  return out;
}

PlanarPositivePart positive_part(const PlanarFunction& u) {
  PlanarPositivePart out{u, Eigen::MatrixX2d::Zero(u.size(), 2)};
  out.u.values = u.values.cwiseMax(0.0);
  const Eigen::MatrixX2d g = discrete_gradient(u);
  for (int k = 0; k < u.size(); ++k)
    if (u.values[k] > 0.0) out.grad.row(k) = g.row(k);
  return out;
}

double gradient_norm(const RadialPositivePart& pp, double p, const Ball& region) {
  return lp_norm(RadialFunction(pp.u.grid, pp.grad.cwiseAbs()), p, region);
}

double gradient_norm(const PlanarPositivePart& pp, double p, const Ball& region) {
  return lp_norm(PlanarFunction(pp.u.grid, pp.grad.rowwise().norm()), p, region);
}

// ---------------------------------------------------------------------------

double truncate_eta(double t, double eta) {
  if (t > eta) return t - eta;
  if (t < -eta) return t + eta;
  return 0.0;
}

double cutoff_s(double d, double s) {
  if (d <= s / 2) return 0.0;
  if (d >= s) return 1.0;
  return 2.0 * (d - s / 2) / s;
}

namespace {

// Nodes read by discrete_gradient at (i, j): central neighbours inside, one-sided pairs at the edges.
std::vector<int> gradient_stencil(const CartesianGrid2D& g, int k) {
  const int i = k % g.m, j = k / g.m, e = g.m - 1;
  std::vector<int> out;
  auto axis = [&](int c, auto idx) {
    if (c == 0) {
      out.push_back(idx(1));
      out.push_back(idx(2));
    } else if (c == e) {
      out.push_back(idx(e - 1));
      out.push_back(idx(e - 2));
    } else {
      out.push_back(idx(c - 1));
      out.push_back(idx(c + 1));
    }
  };
  axis(i, [&](int a) { return g.index(a, j); });
  axis(j, [&](int b) { return g.index(i, b); });
  return out;
}

}  // namespace

GlueResult glue(const GlueInput& in, double eta, double s, double rel_tol) {
  require(eta > 0.0 && s > 0.0, "glue: eta and s must be positive");
  const auto& g = in.u.grid;
  require(in.v.grid.m == g.m && in.v.grid.half_width == g.half_width, "glue: u and v must share the grid");
  require(int(in.side.size()) == g.size(), "glue: one side label per node required");
  const int N = g.size();
  const double h = g.spacing();

  // trace hypothesis
  double worst = 0.0;
  int worst_k = -1;
  std::vector<Eigen::Vector2d> gamma;
  for (int k = 0; k < N; ++k) {
    if (in.side[k] != Side::Interface) continue;
    gamma.push_back(g.point(k));
    const double t = std::max(std::abs(in.u.values[k]), std::abs(in.v.values[k]));
    if (t > worst) worst = t, worst_k = k;
  }
  if (worst > in.trace_tol) {
    const Eigen::Vector2d x = g.point(worst_k);
    fail(ErrorKind::InvalidArgument, "glue: trace hypothesis violated at node " + std::to_string(worst_k) + " (" +
                                         short_num(x.x()) + ", " + short_num(x.y()) + "), |value| = " +
                                         short_num(worst));
  }

  GlueResult out;
  Eigen::VectorXd w = Eigen::VectorXd::Zero(N);
  for (int k = 0; k < N; ++k) {
    if (in.side[k] == Side::A) w[k] = in.u.values[k];
    if (in.side[k] == Side::B) w[k] = in.v.values[k];
  }
  out.w = PlanarFunction(g, w);
  out.dist = gamma.empty() ? PlanarFunction(g, Eigen::VectorXd::Constant(N, kInf)) : dist_to_set(g, gamma);
  Eigen::VectorXd we(N);
  for (int k = 0; k < N; ++k) we[k] = truncate_eta(w[k], eta) * cutoff_s(out.dist.values[k], s);
  out.w_eta = PlanarFunction(g, we);

  const Eigen::MatrixX2d gu = discrete_gradient(in.u), gv = discrete_gradient(in.v), gw = discrete_gradient(out.w);
  out.grad = Eigen::MatrixX2d::Zero(N, 2);
  for (int k = 0; k < N; ++k) {
    if (in.side[k] == Side::A) out.grad.row(k) = gu.row(k);
    if (in.side[k] == Side::B) out.grad.row(k) = gv.row(k);
  }

  // gradient identity away from a 2h collar, where the whole stencil sits on one side
  double scale = 0.0;
  std::vector<char> clear(N, 0);
  for (int k = 0; k < N; ++k) {
    const Side sk = in.side[k];
    if ((sk != Side::A && sk != Side::B) || out.dist.values[k] < 2.0 * h) continue;
    bool same = true;
    for (int q : gradient_stencil(g, k)) same = same && in.side[q] == sk;
    if (!same) continue;
    clear[k] = 1;
    ++out.collar_nodes_checked;
    out.collar_identity_error = std::max(out.collar_identity_error, (gw.row(k) - out.grad.row(k)).norm());
    scale = std::max(scale, out.grad.row(k).norm());
  }

  const Eigen::VectorXd qw = quadrature_weights(g, Ball::origin(2, g.half_width));
  auto norm = [&](const Eigen::VectorXd& f, double p, auto&& keep) {
    double acc = 0.0;
    for (int k = 0; k < N; ++k) {
      if (!keep(k) || qw[k] == 0.0) continue;
      acc = std::isinf(p) ? std::max(acc, std::abs(f[k])) : acc + qw[k] * std::pow(std::abs(f[k]), p);
    }
    return std::isinf(p) || acc == 0.0 ? acc : std::pow(acc, 1.0 / p);
  };
  auto on = [&](Side sd) { return [&, sd](int k) { return in.side[k] == sd; }; };
  auto any = [&](int k) { return in.side[k] != Side::None; };
  auto outside_collar = [&](int k) { return clear[k] != 0; };
  const Eigen::VectorXd ngrad = out.grad.rowwise().norm(), ngu = gu.rowwise().norm(), ngv = gv.rowwise().norm(),
                        ngw = gw.rowwise().norm();

  bool ok = true;
  std::ostringstream notes;
  auto leq = [&](double a, double b) { return a <= b * (1.0 + rel_tol) + 1e-300; };
  for (double p : {1.0, 2.0, kInf}) {
    GlueNorms nm;
    nm.p = p;
    nm.w = norm(w, p, any);
    nm.u_on_A = norm(in.u.values, p, on(Side::A));
    nm.v_on_B = norm(in.v.values, p, on(Side::B));
    nm.grad_w = norm(ngrad, p, any);
    nm.grad_u_on_A = norm(ngu, p, on(Side::A));
    nm.grad_v_on_B = norm(ngv, p, on(Side::B));
    nm.grad_w_outside_collar = norm(ngw, p, outside_collar);
    const bool here = leq(nm.w, nm.u_on_A + nm.v_on_B) && leq(nm.grad_w, nm.grad_u_on_A + nm.grad_v_on_B) &&
                      leq(nm.grad_w_outside_collar, nm.grad_u_on_A + nm.grad_v_on_B);
    if (!here) notes << "norm inequality fails for p = " << p << "; ";
    ok = ok && here;
    out.norms.push_back(nm);
  }
  const double id_tol = rel_tol * std::max(1.0, scale) + 2.0 * in.trace_tol / h;
  if (out.collar_identity_error > id_tol) {
    ok = false;
    notes << "gradient identity off by " << out.collar_identity_error << " outside the collar; ";
  }
  notes << out.collar_nodes_checked << " nodes outside the 2h collar";
  out.notes = notes.str();
  out.pass = ok;
  return out;
}

GlueInput random_glue_input(std::uint64_t seed, int m, bool v_zero) {
  require(m >= 9, "random_glue_input: m must be >= 9");
  std::seed_seq seq{seed, std::uint64_t(m), std::uint64_t(v_zero)};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> sym(-1.0, 1.0), unit(0.0, 1.0);
  const CartesianGrid2D g(1.0, m);
  const int N = g.size();

  std::function<double(const Eigen::Vector2d&)> phi;
  if (unit(rng) < 0.5) {
    const double th = M_PI * sym(rng), b = 0.4 * sym(rng), amp = 0.2 * unit(rng), k = 1.0 + 4.0 * unit(rng);
    const Eigen::Vector2d nu(std::cos(th), std::sin(th)), tau(-nu.y(), nu.x());
    phi = [=](const Eigen::Vector2d& x) { return x.dot(nu) - b - amp * std::sin(k * x.dot(tau)); };
  } else {
    const Eigen::Vector2d c(0.3 * sym(rng), 0.3 * sym(rng));
    const double rho = 0.25 + 0.35 * unit(rng);
    const double sgn = unit(rng) < 0.5 ? 1.0 : -1.0;
    phi = [=](const Eigen::Vector2d& x) { return sgn * ((x - c).norm() - rho); };
  }
  auto random_psi = [&] {
    const double a0 = sym(rng), a1 = sym(rng), a2 = sym(rng), f1 = 1 + 3 * unit(rng), f2 = 1 + 3 * unit(rng);
    return std::function<double(const Eigen::Vector2d&)>(
        [=](const Eigen::Vector2d& x) { return a0 + a1 * std::sin(f1 * x.x()) + a2 * std::cos(f2 * x.y()); });
  };
  const auto psi_u = random_psi(), psi_v = random_psi();

  GlueInput in;
  in.side.assign(N, Side::None);
  std::vector<Eigen::Vector2d> gamma;
  for (int k = 0; k < N; ++k) {
    if (!g.in_disk(k)) continue;
    const Eigen::Vector2d x = g.point(k);
    if (phi(x) <= 0.0) {
      in.side[k] = Side::B;
      continue;
    }
    const int i = k % m, j = k / m;
    bool touches = false;
    for (auto [di, dj] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
      const int ii = i + di, jj = j + dj;
      if (ii < 0 || jj < 0 || ii >= m || jj >= m) continue;
      const int q = g.index(ii, jj);
      if (g.in_disk(q) && phi(g.point(q)) <= 0.0) touches = true;
    }
    in.side[k] = touches ? Side::Interface : Side::A;
    if (touches) gamma.push_back(x);
  }
  const PlanarFunction d =
      gamma.empty() ? PlanarFunction(g, Eigen::VectorXd::Ones(N)) : dist_to_set(g, gamma);
  in.u = sample(g, [&](const Eigen::Vector2d& x) { return psi_u(x); });
  in.v = sample(g, [&](const Eigen::Vector2d& x) { return v_zero ? 0.0 : psi_v(x); });
  in.u.values.array() *= d.values.array();
  in.v.values.array() *= d.values.array();
  return in;
}

GluePropertyReport glue_property_test(int cases, std::uint64_t seed, int m, double eta, double s, double rel_tol) {
  require(cases >= 1, "glue_property_test: cases must be >= 1");
  GluePropertyReport rep;
  for (int c = 0; c < cases; ++c) {
    GlueCase gc;
    gc.index = c;
    gc.v_zero = c % 2 == 1;
    const GlueInput in = random_glue_input(seed * 1000003ull + std::uint64_t(c), m, gc.v_zero);
    const GlueResult res = glue(in, eta, s, rel_tol);
    gc.pass = res.pass;
    gc.notes = res.notes;
    if (gc.v_zero) {
      auto rel = [](double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); };
      for (const auto& nm : res.norms) {
        if (std::isinf(nm.p)) continue;
        gc.equality_error = std::max({gc.equality_error, rel(nm.w, nm.u_on_A), rel(nm.grad_w, nm.grad_u_on_A)});
      }
      if (gc.equality_error > rel_tol) {
        gc.pass = false;
        gc.notes += "; equality for v = 0 off by " + short_num(gc.equality_error);
      }
      rep.max_equality_error = std::max(rep.max_equality_error, gc.equality_error);
    }
    if (!gc.pass) ++rep.failures;
    rep.cases.push_back(std::move(gc));
  }
  rep.pass = rep.failures == 0;
  return rep;
}

// ---------------------------------------------------------------------------

double log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size() && x.size() >= 2, "log_slope: need at least two points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = x.size();
  for (std::size_t i = 0; i < x.size(); ++i) {
    require(x[i] > 0.0 && y[i] > 0.0, "log_slope: values must be positive");
    const double a = std::log(1.0 / x[i]), b = std::log(y[i]);
    sx += a, sy += b, sxx += a * a, sxy += a * b;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

FlameSweep flame_sweep(const FlameProblem& problem, const SolverConfig& config) {
  require(!problem.epsilons.empty(), "flame_sweep: epsilon list must be nonempty");
  require(problem.R >= 1.0, "flame_sweep: the domain must contain B_1");
  for (double e : problem.epsilons) require(e > 0.0 && e <= 0.125, "flame_sweep: epsilon must lie in (0, 1/8]");
  const double alpha = problem.spec.params.alpha;
  const double expo = 1.0 / (1.0 + alpha);

  FlameSweep out;
  out.all_converged = true;
  std::vector<double> eps_all, c_all, eps_sharp, c_sharp;
  for (double eps : problem.epsilons) {
    FlameRow row;
    row.epsilon = eps;
    RadialProblem prob;
    prob.spec = problem.spec;
    prob.R = problem.R;
    prob.rhs = problem.rhs;
    prob.outer_value = problem.outer_value;
    RadialSolution sol;
    try {
      sol = solve_flame(prob, problem.beta, eps, config, problem.grid_m);
    } catch (const Error& e) {
      row.diagnostics = e.what();
      out.all_converged = false;
      out.rows.push_back(row);
      continue;
    }
    row.converged = sol.converged;
    row.residual = sol.residual_norm;
    row.iterations = sol.iterations;
    row.diagnostics = sol.diagnostics;
    out.all_converged = out.all_converged && sol.converged;

    const auto& g = sol.u.grid;
    const auto& u = sol.u.values;
    const double h = g.spacing();
    const auto der = radial_derivatives(sol.u);
    for (int i = 0; i < g.m; ++i) {
      const double r = g.node(i);
      if (r > 1.0 + 1e-12) break;
      row.sup_u = std::max(row.sup_u, std::abs(u[i]));
      row.f_sup = std::max(row.f_sup, std::abs(problem.rhs(r)));
      if (r <= 0.5 + 1e-12) row.lip_norm = std::max(row.lip_norm, std::abs(der.d1[i]));
      if (r <= 0.25 + 1e-12) row.lip_quarter = std::max(row.lip_quarter, std::abs(der.d1[i]));
    }
    // one-sided quotient of (u - eps)+ at the crossings of the eps level
    for (int i = 0; i + 1 < g.m; ++i) {
      const bool up = u[i] <= eps && u[i + 1] > eps, down = u[i] > eps && u[i + 1] <= eps;
      if (!up && !down) continue;
      const int x = up ? i + 1 : i, z = up ? i + 2 : i - 1;
      double q = (u[x] - eps) / h;
      if (z >= 0 && z < g.m && u[z] > eps) q = std::abs(u[z] - u[x]) / h;
      row.fb_quotient_max = std::max(row.fb_quotient_max, q);
    }
    row.beta_sup = problem.beta.sup();
    const double base = 1.0 + std::pow(row.beta_sup, expo) + std::pow(row.f_sup, expo);
    row.measured_C = row.lip_norm / (base + row.sup_u);
    row.u_center = u[0];
    row.sharp_case = u[0] <= eps;
    if (row.sharp_case) {
      row.sharp_C = row.lip_quarter / base;
      eps_sharp.push_back(eps);
      c_sharp.push_back(row.sharp_C);
    }
    if (sol.converged) {
      eps_all.push_back(eps);
      c_all.push_back(row.measured_C);
    }
    out.rows.push_back(row);
  }

  out.sharp_rows = int(eps_sharp.size());
  bool ok = out.all_converged && eps_all.size() >= 2;
  auto all_zero = [](const std::vector<double>& c) {
    return std::all_of(c.begin(), c.end(), [](double v) { return v == 0.0; });
  };
  if (eps_all.size() >= 2) {
    out.slope = all_zero(c_all) ? 0.0 : log_slope(eps_all, c_all);
    ok = ok && out.slope <= kFlameSlopeLimit;
  }
  bool sharp_ok = true;
  for (double c : c_sharp) sharp_ok = sharp_ok && std::isfinite(c);
  if (eps_sharp.size() >= 2) {
    out.sharp_slope = all_zero(c_sharp) ? 0.0 : log_slope(eps_sharp, c_sharp);
    sharp_ok = sharp_ok && out.sharp_slope <= kFlameSlopeLimit;
  }
  out.pass = ok && sharp_ok;
  std::ostringstream os;
  os << "log-slope of C vs log(1/eps) = " << out.slope << " (limit " << kFlameSlopeLimit << "); " << out.sharp_rows
     << " rows with u(0) <= eps, sharp slope " << out.sharp_slope;
  if (!out.all_converged) os << "; some solves did not converge";
  out.notes = os.str();
  return out;
}

// ---------------------------------------------------------------------------

namespace {

struct PairScan {
  int pairs = 0;
  double qmax = 0.0;
  bool near_origin = false;
};

FBReport finish_fb(const FBProblem& pb, const PairScan& scan, double lip, double sup_pos, double d2max, double hgrid,
                   bool any_positive, double tol, const std::string& digest) {
  FBReport out;
  out.free_boundary_pairs = scan.pairs;
  out.quotient_max = scan.qmax;
  out.lip_norm = lip;
  out.sup_positive = sup_pos;
  out.near_origin = scan.near_origin;
  out.discretization_tol = 2.0 * hgrid * d2max;
  auto& r = out.report;
  r.name = "fb_lipschitz";
  r.inputs_digest = digest;
  if (!any_positive) {
    r.pass = true;
    r.notes = "empty positivity set: vacuous";
    return out;
  }
  const double forcing = std::pow(pb.f_sup, 1.0 / (1.0 + pb.spec.params.alpha));
  const double den = pb.h + sup_pos + forcing;
  out.measured_C = den > 0 ? lip / den : (lip == 0 ? 0.0 : kInf);
  if (scan.near_origin) {
    const double d = pb.h + forcing;
    out.sharp_C = d > 0 ? lip / d : (lip == 0 ? 0.0 : kInf);
  }
  r.lhs = scan.qmax;
  r.rhs = pb.h;
  r.tolerance = tol + out.discretization_tol;
  r.measured_constant = out.measured_C;
  r.decide();
  r.pass = r.pass && std::isfinite(out.measured_C);
  r.notes = std::to_string(scan.pairs) + " free-boundary pairs; one-sided quotients stand in for the touching test";
  if (scan.pairs == 0) r.notes = "no free boundary: interior gradient bound only";
  return out;
}

}  // namespace

FBReport fb_lipschitz_check(const FBProblem& pb, const RadialFunction& u, double tol) {
  require(pb.h >= 0.0, "fb_lipschitz_check: h must be >= 0");
  const auto& g = u.grid;
  const auto& v = u.values;
  const double h = g.spacing();
  PairScan scan;
  for (int i = 0; i + 1 < g.m; ++i) {
    const bool a = v[i] > 0.0 && v[i + 1] <= 0.0, b = v[i + 1] > 0.0 && v[i] <= 0.0;
    if (!a && !b) continue;
    const int x = a ? i : i + 1, z = a ? i - 1 : i + 2;
    double q = v[x] / h;
    if (z >= 0 && z < g.m && v[z] > 0.0) q = std::abs(v[z] - v[x]) / h;
    ++scan.pairs;
    scan.qmax = std::max(scan.qmax, q);
    scan.near_origin = scan.near_origin || std::min(g.node(i), g.node(i + 1)) <= h * (1 + 1e-12);
  }
  const auto pp = positive_part(u);
  const auto der = radial_derivatives(u);
  double lip = 0.0, sup_pos = 0.0, d2max = 0.0;
  bool any_positive = false;
  for (int i = 0; i < g.m; ++i) {
    const double r = g.node(i);
    if (v[i] > 0.0 && r <= 1.0 + 1e-12) {
      any_positive = true;
      sup_pos = std::max(sup_pos, v[i]);
    }
    if (r <= 0.5 + 1e-12) lip = std::max(lip, std::abs(pp.grad[i]));
    if (i > 0 && i + 1 < g.m && v[i - 1] > 0 && v[i] > 0 && v[i + 1] > 0) d2max = std::max(d2max, std::abs(der.d2[i]));
  }
  return finish_fb(pb, scan, lip, sup_pos, d2max, h, any_positive, tol, field_digest(v));
}

FBReport fb_lipschitz_check(const FBProblem& pb, const PlanarFunction& u, double tol) {
  require(pb.h >= 0.0, "fb_lipschitz_check: h must be >= 0");
  const auto& g = u.grid;
  const auto& v = u.values;
  const double h = g.spacing();
  const int m = g.m;
  PairScan scan;
  auto inside = [&](int i, int j) { return i >= 0 && j >= 0 && i < m && j < m && g.in_disk(g.index(i, j)); };
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < m; ++i) {
      if (!inside(i, j) || !(v[g.index(i, j)] > 0.0)) continue;
      const int k = g.index(i, j);
      for (auto [di, dj] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
        if (!inside(i + di, j + dj) || v[g.index(i + di, j + dj)] > 0.0) continue;
        double q = v[k] / h;
        if (inside(i - di, j - dj) && v[g.index(i - di, j - dj)] > 0.0) q = std::abs(v[g.index(i - di, j - dj)] - v[k]) / h;
        ++scan.pairs;
        scan.qmax = std::max(scan.qmax, q);
        scan.near_origin = scan.near_origin || g.point(k).norm() <= h * (1 + 1e-12) ||
                           g.point(g.index(i + di, j + dj)).norm() <= h * (1 + 1e-12);
      }
    }
  const auto pp = positive_part(u);
  const auto hess = discrete_hessian(u);
  double lip = 0.0, sup_pos = 0.0, d2max = 0.0;
  bool any_positive = false;
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < m; ++i) {
      const int k = g.index(i, j);
      if (!g.in_disk(k)) continue;
      const double r = g.point(k).norm();
      if (v[k] > 0.0 && r <= 1.0 + 1e-12) {
        any_positive = true;
        sup_pos = std::max(sup_pos, v[k]);
      }
      if (r <= 0.5 + 1e-12) lip = std::max(lip, pp.grad.row(k).norm());
      bool interior = v[k] > 0.0;
      for (auto [di, dj] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}})
        interior = interior && inside(i + di, j + dj) && v[g.index(i + di, j + dj)] > 0.0;
      if (interior) d2max = std::max(d2max, hess[k].norm());
    }
  return finish_fb(pb, scan, lip, sup_pos, d2max, h, any_positive, tol, field_digest(v));
}

}  // namespace hopflab
