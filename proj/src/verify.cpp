#include "hopflab/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <tuple>

#include "hopflab/report.hpp"

namespace hopflab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <typename Grid>
Ball unit_region(const Grid&, double radius);
template <>
Ball unit_region(const RadialGrid& g, double radius) { return Ball::origin(g.dim, radius); }
template <>
Ball unit_region(const CartesianGrid2D&, double radius) { return Ball::origin(2, radius); }

template <typename Grid>
void require_nonnegative(const GridFunction<Grid>& u, const char* who) {
  const auto region = region_nodes(u.grid, unit_region(u.grid, 1.0));
  for (int k : region)
    if (u.values[k] < -kCheckTolerance)
      fail(ErrorKind::InvalidArgument, std::string(who) + ": u is negative on B_1");
}

std::string short_num(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

InequalityReport ratio_report(std::string name, double num, double den, std::string digest) {
  InequalityReport r;
  r.name = std::move(name);
  r.inputs_digest = std::move(digest);
  if (num == 0.0 && den == 0.0) {
    r.lhs = 0.0;
    r.notes = "0/0 counted as 0";
  } else {
    r.lhs = den > 0.0 ? num / den : kInf;
    r.notes = "numerator " + short_num(num) + ", denominator " + short_num(den);
  }
  r.measured_constant = r.lhs;
  r.rhs = kInf;
  r.pass = std::isfinite(r.lhs);
  return r;
}

}  // namespace

template <typename Grid>
double forcing_term(const GridFunction<Grid>& f, double alpha) {
  const double sup = f.values.size() ? f.values.cwiseAbs().maxCoeff() : 0.0;
  return std::pow(sup, 1.0 / (1.0 + alpha));
}

template <typename Grid>
InequalityReport weak_harnack_ratio(const GridFunction<Grid>& u, const GridFunction<Grid>& f,
                                    const EllipticParams& params, double epsilon_exp) {
  require(epsilon_exp > 0.0, "weak_harnack_ratio: epsilon must be positive");
  require_nonnegative(u, "weak_harnack_ratio");
  const Ball half = unit_region(u.grid, 0.5);
  const double num = lp_norm(u, epsilon_exp / 2.0, half);
  const double den = std::max(0.0, inf_sup(u, half).first) + forcing_term(f, params.alpha);
  return ratio_report("weak_harnack", num, den, field_digest(u.values));
}

template <typename Grid>
InequalityReport harnack_ratio(const GridFunction<Grid>& u, const GridFunction<Grid>& f,
                               const EllipticParams& params) {
  require_nonnegative(u, "harnack_ratio");
  const Ball half = unit_region(u.grid, 0.5);
  const auto [lo, hi] = inf_sup(u, half);
  const double den = std::max(0.0, lo) + forcing_term(f, params.alpha);
  return ratio_report("harnack", std::max(0.0, hi), den, field_digest(u.values));
}

template <typename Grid>
HopfGrowth hopf_growth_check(const GridFunction<Grid>& u, const GridFunction<Grid>& f,
                             const EllipticParams& params, double A2, double epsilon_exp) {
  require(A2 >= 0.0, "hopf_growth_check: A2 must be >= 0");
  require_nonnegative(u, "hopf_growth_check");
  HopfGrowth out;
  out.norm_eps = lp_norm(u, epsilon_exp, unit_region(u.grid, 0.5));
  const double fplus = f.values.size() ? std::max(0.0, f.values.maxCoeff()) : 0.0;
  out.forcing = std::pow(fplus, 1.0 / (1.0 + params.alpha));
  const auto d = dist_to_boundary(u.grid, unit_region(u.grid, 1.0));
  out.min_quotient = kInf;
  for (int k = 0; k < u.size(); ++k)
    if (d.values[k] > 1e-12) out.min_quotient = std::min(out.min_quotient, u.values[k] / d.values[k]);

  auto& r = out.report;
  r.name = "hopf_growth";
  r.inputs_digest = field_digest(u.values);
  if (out.norm_eps == 0.0) {
    out.vacuous = true;
    r.notes = "||u||_eps = 0: vacuous";
    r.pass = true;
    return out;
  }
  out.A1 = (out.min_quotient + A2 * out.forcing) / out.norm_eps;
  r.measured_constant = out.A1;
  r.lhs = -out.A1;
  r.rhs = 0.0;
  r.tolerance = 0.0;
  r.pass = out.A1 > 0.0;
  r.notes = "A1 * ||u||_eps = " + short_num(out.A1 * out.norm_eps);
  return out;
}

#define HOPFLAB_VERIFY_INSTANTIATE(G)                                                                      \
  template double forcing_term(const GridFunction<G>&, double);                                            \
  template InequalityReport weak_harnack_ratio(const GridFunction<G>&, const GridFunction<G>&,             \
                                               const EllipticParams&, double);                             \
  template InequalityReport harnack_ratio(const GridFunction<G>&, const GridFunction<G>&,                  \
                                          const EllipticParams&);                                          \
  template HopfGrowth hopf_growth_check(const GridFunction<G>&, const GridFunction<G>&, const EllipticParams&, \
                                        double, double);
HOPFLAB_VERIFY_INSTANTIATE(RadialGrid)
HOPFLAB_VERIFY_INSTANTIATE(CartesianGrid2D)
#undef HOPFLAB_VERIFY_INSTANTIATE

// ---------------------------------------------------------------------------

namespace {

NormalDerivative extrapolate(std::vector<double> offsets, std::vector<double> q) {
  NormalDerivative out;
  out.offsets = std::move(offsets);
  out.quotients = std::move(q);
  const std::size_t k = out.offsets.size();
  if (k == 1) {
    out.estimate = out.quotients[0];
    return out;
  }
  // linear extrapolation to t = 0 through the two smallest offsets
  const double t1 = out.offsets[k - 2], t2 = out.offsets[k - 1];
  const double q1 = out.quotients[k - 2], q2 = out.quotients[k - 1];
  out.estimate = (t1 * q2 - t2 * q1) / (t1 - t2);
  out.error_estimate = std::abs(out.estimate - q2);
  return out;
}

void check_offsets(const std::vector<double>& offsets) {
  require(!offsets.empty(), "normal_derivative: need at least one offset");
  for (std::size_t i = 0; i < offsets.size(); ++i) {
    require(offsets[i] > 0.0, "normal_derivative: offsets must be positive");
    if (i) require(offsets[i] < offsets[i - 1], "normal_derivative: offsets must be decreasing");
  }
}

}  // namespace

NormalDerivative normal_derivative(const std::function<double(const Eigen::VectorXd&)>& u,
                                   const Eigen::VectorXd& x0, const std::vector<double>& offsets, double radius,
                                   double tol) {
  check_offsets(offsets);
  if (std::abs(x0.norm() - radius) > 1e-12 * radius)
    fail(ErrorKind::InvalidArgument, "normal_derivative: point is not on the boundary sphere");
  const double u0 = u(x0);
  if (std::abs(u0) > tol) fail(ErrorKind::InvalidArgument, "normal_derivative: u does not vanish at the point");
  const Eigen::VectorXd nu = -x0 / x0.norm();
  std::vector<double> q;
  for (double t : offsets) q.push_back((u(x0 + t * nu) - u0) / t);
  return extrapolate(offsets, std::move(q));
}

NormalDerivative normal_derivative(const RadialFunction& u, const std::vector<double>& offsets, double tol) {
  check_offsets(offsets);
  const double R = u.grid.r_max;
  const double u0 = u.values[u.size() - 1];
  if (std::abs(u0) > tol) fail(ErrorKind::InvalidArgument, "normal_derivative: u does not vanish at r = R");
  std::vector<double> q;
  for (double t : offsets) q.push_back((interpolate(u, R - t) - u0) / t);
  return extrapolate(offsets, std::move(q));
}

NormalDerivative normal_derivative(const PlanarFunction& u, const Eigen::Vector2d& x0,
                                   const std::vector<double>& offsets, double tol) {
  return normal_derivative([&](const Eigen::VectorXd& x) { return interpolate(u, Eigen::Vector2d(x)); },
                           Eigen::VectorXd(x0), offsets, u.grid.half_width, tol);
}

std::vector<double> grid_offsets(const RadialGrid& grid, int count) {
  require(count >= 1 && count < grid.m, "grid_offsets: count out of range");
  std::vector<double> out;
  for (int k = count; k >= 1; --k) out.push_back(k * grid.spacing());
  return out;
}

InequalityReport hopf_consistency_check(const HopfGrowth& growth, const NormalDerivative& dnu, double A2) {
  InequalityReport r;
  r.name = "hopf_A_vs_B";
  if (growth.vacuous) {
    r.pass = true;
    r.notes = "vacuous";
    return r;
  }
  r.lhs = growth.A1;
  r.rhs = (dnu.estimate + A2 * growth.forcing) / growth.norm_eps;
  r.tolerance = kCheckTolerance + dnu.error_estimate / growth.norm_eps;
  r.measured_constant = r.rhs;
  r.decide();
  r.notes = "d_nu u = " + short_num(dnu.estimate) + " +- " + short_num(dnu.error_estimate);
  return r;
}

InequalityReport large_gradient_reduction_check(const RadialFunction& u, const RadialFunction& f,
                                                const EllipticParams& params, double gamma, double tol) {
  require(gamma > 0.0, "large_gradient_reduction_check: gamma must be positive");
  require(f.size() == u.size(), "large_gradient_reduction_check: f must live on the grid of u");
  const auto der = radial_derivatives(u);
  const auto& g = u.grid;
  const double h = g.spacing();
  const int m = g.m;

  // crossings of |u'| = gamma, located by linear interpolation
  std::vector<double> crossings;
  for (int i = 0; i + 1 < m; ++i) {
    const double a = std::abs(der.d1[i]) - gamma, b = std::abs(der.d1[i + 1]) - gamma;
    if ((a < 0) != (b < 0)) crossings.push_back(g.node(i) + h * a / (a - b));
  }

  InequalityReport r;
  r.name = "large_gradient_reduction";
  r.inputs_digest = field_digest(u.values);
  r.tolerance = tol;
  r.rhs = std::pow(gamma, -params.alpha) * f.values.cwiseAbs().maxCoeff();
  r.lhs = -kInf;
  int checked = 0;
  for (int i = 1; i + 1 < m; ++i) {
    const double ri = g.node(i);
    if (ri <= 0.0 || std::abs(der.d1[i]) < gamma) continue;
    bool near = false;
    for (double c : crossings) near = near || std::abs(ri - c) <= 2.0 * h;
    if (near) continue;
    ++checked;
    r.lhs = std::max(r.lhs, radial_pucci(der.d2[i], der.d1[i], ri, params, PucciSign::Minus));
  }
  if (checked == 0) {
    r.lhs = 0.0;
    r.pass = true;
    r.notes = "no node with |grad u| >= gamma outside the 2h margin";
    return r;
  }
  r.measured_constant = r.lhs;
  r.decide();
  r.notes = std::to_string(checked) + " nodes checked";
  return r;
}

CounterexampleAudit counterexample_audit(int n, int m) {
  require(n >= 2, "counterexample_audit: n must be >= 2");
  require(m >= 5, "counterexample_audit: m must be >= 5");
  CounterexampleAudit a;
  a.n = n;
  auto lap = [n](double r) { return 2.0 * n - 2.0 * (n - 1) / r; };
  a.laplacian_at_half = lap(0.5);
  a.grad_at_half = 2.0 * (1.0 - 0.5);

  const RadialGrid grid(0.0, 1.0, m, n);
  const auto u = sample(grid, [](double r) { return (1.0 - r) * (1.0 - r); });
  const auto der = radial_derivatives(u);
  a.max_laplacian_large_grad = -kInf;
  for (int i = 1; i + 1 < m; ++i) {
    const double r = grid.node(i);
    a.discrete_mismatch = std::max(a.discrete_mismatch, std::abs(der.d2[i] + (n - 1) * der.d1[i] / r - lap(r)));
    if (2.0 * (1.0 - r) >= 1.0) a.max_laplacian_large_grad = std::max(a.max_laplacian_large_grad, lap(r));
  }
  a.max_laplacian_large_grad = std::max(a.max_laplacian_large_grad, a.laplacian_at_half);

  auto closed = [](const Eigen::VectorXd& x) {
    const double s = 1.0 - x.norm();
    return s * s;
  };
  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(n);
  x0[0] = 1.0;
  std::vector<double> offsets;
  for (int k = 1; k <= 8; ++k) offsets.push_back(std::ldexp(1.0, -k));
  a.dnu = normal_derivative(closed, x0, offsets);
  double st = 0, sq = 0, stt = 0, stq = 0;
  const double cnt = offsets.size();
  for (std::size_t k = 0; k < offsets.size(); ++k) {
    const double t = offsets[k], q = a.dnu.quotients[k];
    st += t, sq += q, stt += t * t, stq += t * q;
    a.max_quotient_error = std::max(a.max_quotient_error, std::abs(q - t));
  }
  a.quotient_slope = (cnt * stq - st * sq) / (cnt * stt - st * st);
  a.boundary_value = u.values[m - 1];
  a.min_value = u.values.minCoeff();

  auto& r = a.report;
  r.name = "counterexample";
  r.lhs = a.max_laplacian_large_grad;
  r.rhs = 0.0;
  r.tolerance = 1e-12;
  r.measured_constant = a.dnu.estimate;
  r.decide();
  const bool boundary_ok = std::abs(a.dnu.estimate) <= 1e-12 && std::abs(a.quotient_slope - 1.0) <= 0.05 &&
                           a.max_quotient_error <= 1e-12;
  const bool sign_ok = a.min_value >= 0.0 && a.boundary_value == 0.0;
  r.pass = r.pass && boundary_ok && sign_ok && a.discrete_mismatch <= 1e-8;
  r.notes = "Delta u(1/2) = " + short_num(a.laplacian_at_half) + ", d_nu u = " + short_num(a.dnu.estimate) +
            ", quotient slope " + short_num(a.quotient_slope);
  return a;
}

InequalityReport comparison_check(const RadialFunction& u, const RadialFunction& lower, double r_in, double r_out,
                                  double tol) {
  require(u.size() == lower.size(), "comparison_check: fields must share the grid");
  require(r_in < r_out, "comparison_check: need r_in < r_out");
  std::vector<int> idx;
  for (int i = 0; i < u.size(); ++i) {
    const double r = u.grid.node(i);
    if (r >= r_in - 1e-12 && r <= r_out + 1e-12) idx.push_back(i);
  }
  require(!idx.empty(), "comparison_check: region has no nodes");
  std::vector<int> boundary{idx.back()};
  if (u.grid.node(idx.front()) > 0.0) boundary.push_back(idx.front());
  for (int i : boundary)
    if (lower.values[i] > u.values[i] + tol)
      fail(ErrorKind::InvalidArgument, "comparison_check: lower > u on the region boundary at r = " +
                                           short_num(u.grid.node(i)));
  InequalityReport r;
  r.name = "comparison";
  r.tolerance = tol;
  r.lhs = -kInf;
  for (int i : idx) r.lhs = std::max(r.lhs, lower.values[i] - u.values[i]);
  r.rhs = 0.0;
  r.measured_constant = -r.lhs;
  r.decide();
  r.inputs_digest = field_digest(u.values);
  return r;
}

ComparisonStudy comparison_study(const OperatorSpec& spec, int pairs, std::uint64_t seed, int m,
                                 const SolverConfig& config, double tol) {
  require(pairs >= 1, "comparison_study: pairs must be >= 1");
  std::seed_seq seq{seed, std::uint64_t(spec.params.n), std::uint64_t(spec.params.alpha * 1000 + 0.5)};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> sym(-1.0, 1.0), unit(0.0, 1.0);
  std::uniform_int_distribution<int> freq(1, 4);
  ComparisonStudy out;
  out.pairs = pairs;
  out.max_violation = -kInf;
  std::uniform_int_distribution<int> mode(0, 2);
  for (int k = 0; k < pairs; ++k) {
    // single-signed members: where u' vanishes with f != 0 and alpha > 0 the solution has unbounded u''
    auto draw = [&] {
      const double c0 = unit(rng), c1 = unit(rng), c2 = unit(rng);
      const int q = freq(rng);
      return std::function<double(double)>(
          [=](double r) { return c0 + c1 * r * r + 0.5 * c2 * (1.0 + std::cos(M_PI * q * r)); });
    };
    const auto base = draw();
    const double b0 = unit(rng), b1 = unit(rng);
    const int md = mode(rng);
    std::function<double(double)> f1, f2;
    if (md == 0) {
      f1 = base;
      f2 = [=](double r) { return base(r) + b0 + b1 * r * r; };
    } else if (md == 1) {
      f1 = [=](double r) { return -base(r) - b0 - b1 * r * r; };
      f2 = [=](double r) { return -base(r); };
    } else {
      const auto other = draw();
      f1 = [=](double r) { return -base(r); };
      f2 = other;
    }
    const double g1 = sym(rng), g2 = g1 - unit(rng);
    RadialProblem p1;
    p1.spec = spec;
    p1.rhs = f1;
    p1.outer_value = g1;
    RadialProblem p2 = p1;
    p2.rhs = f2;
    p2.outer_value = g2;
    const RadialSolution s1 = solve_radial(p1, config, m), s2 = solve_radial(p2, config, m);
    if (!s1.converged || !s2.converged) ++out.unconverged;
    const double v = (s2.u.values - s1.u.values).maxCoeff();
    out.max_violation = std::max(out.max_violation, v);
    if (v > tol) ++out.violations;
  }
  out.pass = out.violations == 0 && out.unconverged == 0;
  out.notes = std::to_string(out.violations) + " violations, " + std::to_string(out.unconverged) +
              " unconverged pairs, max(u2 - u1) = " + short_num(out.max_violation);
  return out;
}

RadialFunction barrier_extended_field(const BarrierSpec& spec, const RadialGrid& grid) {
  spec.validate();
  return sample(grid, [&](double r) { return r <= spec.R / 2 ? spec.M : barrier_profile(spec, std::min(r, spec.R)); });
}

// ---------------------------------------------------------------------------
// Sweeps

void SweepConfig::validate() const {
  require(runs >= 1, "SweepConfig: runs must be >= 1");
  require(!dims.empty() && !alphas.empty() && !scales.empty(), "SweepConfig: lists must be nonempty");
  require(grid_m >= 5, "SweepConfig: grid_m must be >= 5");
  require(0.0 < lambda && lambda <= Lambda, "SweepConfig: need 0 < lambda <= Lambda");
  require(boundary_min >= 0.0 && boundary_min <= boundary_max, "SweepConfig: bad boundary range");
  for (double c : scales) require(c > 0.0, "SweepConfig: scales must be positive");
  solver.validate();
}

std::vector<FamilyMember> radial_family(const SweepConfig& cfg, int n, double alpha, int sign, bool zero_boundary) {
  cfg.validate();
  // one stream per (n, alpha, sign) so that families do not depend on the sweep order
  std::seed_seq seq{std::uint64_t(cfg.seed), std::uint64_t(n), std::uint64_t(alpha * 1000 + 0.5),
                    std::uint64_t(sign + 2), std::uint64_t(zero_boundary)};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  EllipticParams p{n, cfg.lambda, cfg.Lambda, alpha};

  std::vector<FamilyMember> out;
  for (int k = 0; k < cfg.runs; ++k) {
    FamilyMember mem;
    mem.index = k;
    mem.n = n;
    mem.alpha = alpha;
    const double pick = unit(rng), c = cfg.lambda + (cfg.Lambda - cfg.lambda) * unit(rng);
    const double g = cfg.boundary_min + (cfg.boundary_max - cfg.boundary_min) * unit(rng);
    const double a0 = cfg.rhs_max * unit(rng), a1 = cfg.rhs_max * unit(rng);
    const double s = sign != 0 ? double(sign) : (unit(rng) < 0.5 ? -1.0 : 1.0);

    RadialProblem prob;
    if (pick < 1.0 / 3) {
      prob.spec = OperatorSpec::pucci_minus(p);
    } else if (pick < 2.0 / 3) {
      prob.spec = OperatorSpec::pucci_plus(p);
    } else {
      prob.spec = OperatorSpec::linear_trace(c * Eigen::MatrixXd::Identity(n, n), p);
    }
    mem.op = prob.spec.name();
    mem.rhs_a0 = s * a0;
    mem.rhs_a1 = s * a1;
    prob.rhs = [f0 = mem.rhs_a0, f1 = mem.rhs_a1](double r) { return f0 + f1 * r * r; };
    prob.outer_value = zero_boundary ? 0.0 : g;
    mem.solution = solve_radial(prob, cfg.solver, cfg.grid_m);
    mem.f = sample(prob.make_grid(cfg.grid_m), prob.rhs);
    const double lo = mem.solution.u.values.minCoeff();
    if (!zero_boundary && lo < cfg.boundary_min) mem.solution.u.values.array() += cfg.boundary_min - lo;
    mem.boundary = mem.solution.u.values[cfg.grid_m - 1];
    out.push_back(std::move(mem));
  }
  return out;
}

namespace {

template <typename Measure>
SweepRow scaled_row(const FamilyMember& mem, const SweepConfig& cfg, const std::string& name, double eps,
                    Measure&& measure) {
  SweepRow row;
  row.name = name;
  row.member = mem.index;
  row.n = mem.n;
  row.alpha = mem.alpha;
  row.epsilon = eps;
  row.converged = mem.solution.converged;
  row.residual = mem.solution.residual_norm;
  row.grid_m = cfg.grid_m;
  const InequalityReport base = measure(mem.solution.u, mem.f);
  row.constant = base.measured_constant;
  row.pass = base.pass;
  row.notes = base.notes;
  for (double c : cfg.scales) {
    RadialFunction cu = mem.solution.u, cf = mem.f;
    cu.values *= c;
    cf.values *= std::pow(c, 1.0 + mem.alpha);
    const double v = measure(cu, cf).measured_constant;
    const double dev = row.constant == 0.0 ? std::abs(v) : std::abs(v - row.constant) / std::abs(row.constant);
    row.scale_spread = std::max(row.scale_spread, dev);
  }
  row.pass = row.pass && row.scale_spread <= 1e-8;
  if (!row.converged) row.notes += "; solve did not converge";
  return row;
}

void summarize(SweepSummary& s, const std::string& label) {
  std::ostringstream os;
  os.precision(6);
  os << label << " max constant per (n, alpha, epsilon):";
  std::vector<std::tuple<int, double, double>> keys;
  for (const auto& r : s.rows) {
    const auto key = std::make_tuple(r.n, r.alpha, std::isnan(r.epsilon) ? -1.0 : r.epsilon);
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
  }
  for (const auto& [n, al, ep] : keys) {
    double mx = 0.0;
    for (const auto& r : s.rows)
      if (r.n == n && r.alpha == al && (std::isnan(r.epsilon) ? -1.0 : r.epsilon) == ep)
        mx = std::max(mx, r.constant);
    os << " [n=" << n << " alpha=" << al;
    if (ep >= 0.0) os << " eps=" << ep;
    os << "] " << mx;
  }
  s.notes = os.str();
  for (const auto& r : s.rows) s.pass = s.pass && r.pass;
}

}  // namespace

SweepSummary harnack_sweep(const SweepConfig& cfg) {
  SweepSummary s;
  for (int n : cfg.dims)
    for (double alpha : cfg.alphas) {
      const EllipticParams p{n, cfg.lambda, cfg.Lambda, alpha};
      for (const auto& mem : radial_family(cfg, n, alpha, 0, false)) {
        s.diverged += !mem.solution.converged;
        s.rows.push_back(scaled_row(mem, cfg, "harnack", std::nan(""), [&](const auto& u, const auto& f) {
          return harnack_ratio(u, f, p);
        }));
      }
    }
  summarize(s, "harnack");
  return s;
}

SweepSummary weak_harnack_sweep(const SweepConfig& cfg) {
  require(!cfg.epsilons.empty(), "weak_harnack_sweep: epsilon list must be nonempty");
  SweepSummary s;
  for (int n : cfg.dims)
    for (double alpha : cfg.alphas) {
      const EllipticParams p{n, cfg.lambda, cfg.Lambda, alpha};
      // supersolutions: f <= 0
      for (const auto& mem : radial_family(cfg, n, alpha, -1, false)) {
        s.diverged += !mem.solution.converged;
        for (double eps : cfg.epsilons)
          s.rows.push_back(scaled_row(mem, cfg, "weak_harnack", eps, [&](const auto& u, const auto& f) {
            return weak_harnack_ratio(u, f, p, eps);
          }));
      }
    }
  summarize(s, "weak_harnack");
  return s;
}

SweepSummary hopf_sweep(const SweepConfig& cfg) {
  require(!cfg.epsilons.empty(), "hopf_sweep: epsilon list must be nonempty");
  SweepSummary s;
  for (int n : cfg.dims)
    for (double alpha : cfg.alphas) {
      const EllipticParams p{n, cfg.lambda, cfg.Lambda, alpha};
      for (const auto& mem : radial_family(cfg, n, alpha, -1, true)) {
        s.diverged += !mem.solution.converged;
        const double inf_half = inf_sup(mem.solution.u, Ball::origin(n, 0.5)).first;
        for (double eps : cfg.epsilons) {
          auto growth = [&](const auto& u, const auto& f) { return hopf_growth_check(u, f, p, cfg.A2, eps).report; };
          SweepRow row = scaled_row(mem, cfg, "hopf_growth", eps, growth);
          if (!(inf_half > 0.0)) row.notes += "; inf_{B_1/2} u = 0, A1 > 0 not required";
          if (!(inf_half > 0.0)) row.pass = row.scale_spread <= 1e-8;
          s.rows.push_back(row);

          const HopfGrowth hg = hopf_growth_check(mem.solution.u, mem.f, p, cfg.A2, eps);
          const NormalDerivative dnu = normal_derivative(mem.solution.u, grid_offsets(mem.solution.u.grid, 2));
          const InequalityReport ab = hopf_consistency_check(hg, dnu, cfg.A2);
          SweepRow r2 = row;
          r2.name = "hopf_A_vs_B";
          r2.constant = ab.measured_constant;
          r2.scale_spread = 0.0;
          r2.pass = ab.pass;
          r2.notes = ab.notes;
          s.rows.push_back(r2);
        }
      }
    }
  summarize(s, "hopf");
  return s;
}

}  // namespace hopflab
