#include <algorithm>
#include <cmath>
#include <limits>

#include "hopflab/solver.hpp"
#include "radial_scheme.hpp"

namespace hopflab {

ReactionProfile ReactionProfile::standard_bump() {
  return {[](double t) { return (t > 0.0 && t < 1.0) ? 6.0 * t * (1.0 - t) : 0.0; },
          [](double t) { return (t > 0.0 && t < 1.0) ? 6.0 - 12.0 * t : 0.0; }};
}

ReactionProfile ReactionProfile::zero() {
  return {[](double) { return 0.0; }, [](double) { return 0.0; }};
}

double ReactionProfile::sup(int samples) const {
  require(samples >= 2, "ReactionProfile::sup: need at least two samples");
  double s = 0;
  for (int i = 0; i < samples; ++i) s = std::max(s, std::abs(value(double(i) / (samples - 1))));
  return s;
}

namespace {

/// Forward march of the ball scheme from u(0) = u0: row i is solved for u_{i+1}.
struct Marcher {
  detail::RadialStencil stencil;
  Reaction reaction;
  Eigen::VectorXd f;
  double delta = 0, alpha = 0, cap = 0;

  /// Solves row i for x = u_{i+1}; the row value is nondecreasing in x.
  double solve_row(int i, Eigen::VectorXd& u) const {
    const double s = f[i] + reaction.value(u[i]);
    auto G = [&](double x) {
      u[i + 1] = x;
      return stencil.active_row(i, u).value - s * detail::weight(stencil.grad_sq(i, u).p2, delta, alpha);
    };
    if (alpha == 0.0) {
      // Piecewise linear in x: the extremum of lines crosses zero at the max (min) of their roots.
      const double w = 1.0;
      double x = stencil.pol.take_max ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < stencil.pol.pairs.size(); ++k) {
        u[i + 1] = 0.0;
        const detail::Row rw = stencil.row(i, k, u);
        const double root = (s * w - rw.value) / rw.upper;
        x = stencil.pol.take_max ? std::min(x, root) : std::max(x, root);
      }
      u[i + 1] = x;
      return x;
    }
    const double last_step = i > 0 ? std::abs(u[i] - u[i - 1]) : 0.0;
    double lo = u[i], hi = u[i];
    double step = std::max({last_step, 1e-12 * std::abs(u[i]), 1e-300});
    double glo = G(lo), ghi = glo;
    for (int k = 0; glo > 0.0 && k < 4000; ++k, step *= 2) glo = G(lo -= step);
    step = std::max({last_step, 1e-12 * std::abs(u[i]), 1e-300});
    for (int k = 0; ghi < 0.0 && k < 4000; ++k, step *= 2) ghi = G(hi += step);
    if (glo > 0.0 || ghi < 0.0) return u[i + 1] = std::numeric_limits<double>::quiet_NaN();
    // Bracketed Newton; G is smooth and increasing in x on the bracket.
    double x = std::clamp(i > 0 ? 2 * u[i] - u[i - 1] : u[i], lo, hi);
    for (int k = 0; k < 200; ++k) {
      const double gx = G(x);
      if (gx == 0.0) return u[i + 1] = x;
      (gx < 0.0 ? lo : hi) = x;
      const detail::GradSq g = stencil.grad_sq(i, u);
      const double slope = stencil.active_row(i, u).upper - s * detail::weight_dp2(g.p2, delta, alpha) * g.d_upper;
      double next = x - gx / slope;
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      if (next <= lo || next >= hi || std::abs(next - x) <= 1e-16 * std::abs(x)) {
        x = next;
        break;
      }
      x = next;
    }
    return u[i + 1] = x;
  }

  /// Value at r = R, or +-inf once the march leaves [-cap, cap].
  /// Seeding at node j > 0 (u = 0 before it) continues the family past underflow of u0.
  double end_value(double u0, Eigen::VectorXd* out = nullptr, int j = 0) const {
    const int m = int(stencil.r.size());
    Eigen::VectorXd u = Eigen::VectorXd::Zero(m);
    u[j] = u0;
    for (int i = j; i + 1 < m; ++i) {
      const double x = solve_row(i, u);
      if (!std::isfinite(x)) return std::numeric_limits<double>::quiet_NaN();
      if (std::abs(x) > cap) {
        if (out) *out = u;  // partial trajectory
        return x > 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
      }
    }
    if (out) *out = u;
    return u[m - 1];
  }
};

}  // namespace

std::optional<Eigen::VectorXd> flame_shooting_guess(const RadialProblem& problem, const ReactionProfile& beta,
                                                    double epsilon, double delta, int m) {
  require(problem.is_ball(), "flame_shooting_guess: ball domains only");
  const RadialGrid grid = problem.make_grid(m);
  Marcher mr;
  mr.stencil = {detail::radial_policies(problem.spec), grid.nodes(), grid.spacing(), true};
  mr.reaction = {[beta, epsilon](double t) { return beta.value(t / epsilon) / epsilon; },
                 [beta, epsilon](double t) { return beta.derivative(t / epsilon) / (epsilon * epsilon); }};
  mr.f.resize(m);
  for (int i = 0; i < m; ++i) mr.f[i] = problem.rhs(grid.node(i));
  mr.delta = problem.spec.params.alpha == 0.0 ? 0.0 : delta;
  mr.alpha = problem.spec.params.alpha;
  const double g = problem.outer_value;
  mr.cap = 4.0 * (std::abs(g) + epsilon) + 1.0;
  // Scan log u0 downward from epsilon; the first crossing of u(R) = g is the
  // branch with the smallest core. Past the underflow range the seed moves outward.
  auto residual_at = [&](double t, int j, Eigen::VectorXd* out = nullptr) {
    return mr.end_value(std::exp(t), out, j) - g;
  };
  auto refine = [&](double a, double b, int j) -> std::optional<Eigen::VectorXd> {
    double ea = residual_at(a, j);
    for (int it = 0; it < 200 && std::abs(b - a) > 1e-15 * std::max(std::abs(a), 1.0); ++it) {
      const double mid = 0.5 * (a + b);
      const double em = residual_at(mid, j);
      if (std::isnan(em)) return std::nullopt;
      if ((em > 0) == (ea > 0)) {
        a = mid, ea = em;
      } else {
        b = mid;
      }
    }
    Eigen::VectorXd u, v;
    const double ua = residual_at(a, j, &u), ub = residual_at(b, j, &v);
    Eigen::VectorXd* best = nullptr;
    if (std::isfinite(ua)) best = &u;
    if (std::isfinite(ub) && (!best || std::abs(ub) < std::abs(ua))) best = &v;
    if (!best) return std::nullopt;
    (*best)[m - 1] = g;
    return *best;
  };
  const double top = std::log(epsilon), bottom = std::log(1e-280);
  const int scan = 400;
  double t_prev = top, e_prev = residual_at(top, 0);
  for (int k = 1; k <= scan; ++k) {
    const double t = top + (bottom - top) * k / scan;
    const double e = residual_at(t, 0);
    if (!std::isnan(e) && !std::isnan(e_prev) && (e > 0) != (e_prev > 0)) return refine(t, t_prev, 0);
    t_prev = t, e_prev = e;
  }
  const double tiny = std::exp(bottom);
  for (int j = 1; j + 2 < m; ++j) {
    const double e = residual_at(bottom, j);
    if (!std::isnan(e) && !std::isnan(e_prev) && (e > 0) != (e_prev > 0)) {
      // Seed (j, theta) for theta between tiny and the value the (j-1, tiny) march reaches at j.
      Eigen::VectorXd prev;
      mr.end_value(tiny, &prev, j - 1);
      if (prev.size() == 0 || !(prev[j] > tiny)) return std::nullopt;
      return refine(bottom, std::log(prev[j]), j);
    }
    e_prev = e;
  }
  return std::nullopt;
}

RadialSolution solve_flame(const RadialProblem& problem, const ReactionProfile& beta, double epsilon,
                           const SolverConfig& config, int m, const std::optional<Eigen::VectorXd>& initial_guess) {
  require(epsilon > 0.0, "solve_flame: epsilon must be positive");
  require(bool(beta.value) && bool(beta.derivative), "solve_flame: beta profile must be callable");
  for (double t : {-0.5, -1e-9, 1.0 + 1e-9, 1.5})
    require(beta.value(t) == 0.0, "solve_flame: beta must be supported in [0, 1]");
  const Reaction reaction{[beta, epsilon](double t) { return beta.value(t / epsilon) / epsilon; },
                          [beta, epsilon](double t) { return beta.derivative(t / epsilon) / (epsilon * epsilon); }};
  if (initial_guess || !problem.is_ball() || problem.outer_value <= 0.0 || !(beta.sup() > 0.0))
    return solve_radial_with_reaction(problem, &reaction, config, m, initial_guess);
  // Shooting lands on the small-core branch at the final delta; Newton then polishes.
  const double delta = config.delta_ladder.back();
  auto guess = flame_shooting_guess(problem, beta, epsilon, delta, m);
  if (!guess) {
    std::optional<Eigen::VectorXd> core;
    try {
      core = flame_dead_core_guess(problem, beta, m);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Configuration) throw;
    }
    auto sol = solve_radial_with_reaction(problem, &reaction, config, m, core);
    sol.diagnostics = (core ? "shooting found no crossing; dead-core start. " : "no dead core; plain start. ") +
                      sol.diagnostics;
    return sol;
  }
  SolverConfig polish = config;
  polish.delta_ladder = {delta};
  return solve_radial_with_reaction(problem, &reaction, polish, m, guess);
}

Eigen::VectorXd flame_dead_core_guess(const RadialProblem& problem, const ReactionProfile& beta, int m,
                                      double* free_boundary_radius) {
  require(problem.is_ball(), "flame_dead_core_guess: ball domains only");
  const auto& p = problem.spec.params;
  // Coefficient pair active on increasing, concave profiles.
  double a = p.lambda, b = (p.n - 1) * p.lambda;
  if (std::holds_alternative<PucciMinusOp>(problem.spec.kind)) {
    a = p.Lambda;
  } else if (std::holds_alternative<PucciPlusOp>(problem.spec.kind)) {
    b = (p.n - 1) * p.Lambda;
  } else if (const auto* lt = std::get_if<LinearTraceOp>(&problem.spec.kind)) {
    a = lt->A.trace() / p.n;
    b = (p.n - 1) * a;
  } else if (const auto* bm = std::get_if<BellmanMinOp>(&problem.spec.kind)) {
    a = bm->family.front().trace() / p.n;
    b = (p.n - 1) * a;
  }
  const int quad = 4096;
  double mass = 0;
  for (int i = 0; i < quad; ++i) mass += beta.value((i + 0.5) / quad) / quad;
  require(mass > 0.0, "flame_dead_core_guess: beta must have positive mass");
  const double slope = std::pow((p.alpha + 2.0) * mass / a, 1.0 / (p.alpha + 2.0));
  const double q = b / a;
  // u(r) = slope r0^q int_{r0}^r s^-q ds
  auto profile = [&](double r0, double r) {
    if (r <= r0) return 0.0;
    const double c = slope * std::pow(r0, q);
    return std::abs(q - 1.0) < 1e-12 ? c * std::log(r / r0) : c * (std::pow(r, 1 - q) - std::pow(r0, 1 - q)) / (1 - q);
  };
  const double R = problem.R, g = problem.outer_value;
  require(g > 0.0, "flame_dead_core_guess: outer value must be positive");
  // u_r0(R) increases from 0 on (0, r_peak]; take the root there.
  double r_peak = R * 1e-6, best = 0;
  for (int i = 1; i < 4000; ++i) {
    const double r0 = R * i / 4000.0;
    if (profile(r0, R) > best) {
      best = profile(r0, R);
      r_peak = r0;
    }
  }
  if (best < g) fail(ErrorKind::Configuration, "flame_dead_core_guess: outer value too large for a dead-core profile");
  double lo = 0.0, hi = r_peak;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (mid > 0.0 && profile(mid, R) < g ? lo : hi) = mid;
    if (mid == 0.0) lo = mid;
  }
  const double r0 = 0.5 * (lo + hi);
  if (free_boundary_radius) *free_boundary_radius = r0;
  const RadialGrid grid = problem.make_grid(m);
  Eigen::VectorXd u(m);
  for (int i = 0; i < m; ++i) u[i] = profile(r0, grid.node(i));
  u[m - 1] = g;
  return u;
}

}  // namespace hopflab
