#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "hopflab/solver.hpp"
#include "radial_scheme.hpp"

namespace hopflab {

void SolverConfig::validate() const {
  require(residual_tol > 0.0, "SolverConfig: residual_tol must be positive");
  require(max_iters >= 1, "SolverConfig: max_iters must be >= 1");
  require(!delta_ladder.empty(), "SolverConfig: delta_ladder must be nonempty");
  for (std::size_t i = 0; i < delta_ladder.size(); ++i) {
    require(delta_ladder[i] >= 0.0, "SolverConfig: delta levels must be >= 0");
    if (i > 0) require(delta_ladder[i] < delta_ladder[i - 1], "SolverConfig: delta_ladder must be strictly decreasing");
  }
  require(damping > 0.0 && damping <= 1.0, "SolverConfig: damping must lie in (0, 1]");
}

namespace {

double isotropic_coefficient(const Eigen::MatrixXd& A) {
  const int n = int(A.rows());
  const double c = A.trace() / n;
  if ((A - c * Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() > 1e-12)
    fail(ErrorKind::Configuration, "radial reduction needs rotation-invariant coefficients (multiples of I)");
  if (c <= 0.0) fail(ErrorKind::Configuration, "coefficient matrix must be positive definite for a monotone scheme");
  return c;
}

}  // namespace

namespace detail {

RadialPolicies radial_policies(const OperatorSpec& spec) {
  const auto& p = spec.params;
  const double t = p.n - 1;
  RadialPolicies out;
  struct Build {
    RadialPolicies& out;
    const EllipticParams& p;
    double t;
    void pucci(bool take_max) {
      out.take_max = take_max;
      for (double a : {p.lambda, p.Lambda})
        for (double b : {p.lambda, p.Lambda}) out.pairs.emplace_back(a, t * b);
    }
    void operator()(const PucciMinusOp&) { pucci(false); }
    void operator()(const PucciPlusOp&) { pucci(true); }
    void operator()(const LinearTraceOp& op) {
      const double c = isotropic_coefficient(op.A);
      out.pairs.emplace_back(c, t * c);
    }
    void operator()(const BellmanMinOp& op) {
      if (op.family.empty()) fail(ErrorKind::InvalidArgument, "BellmanMin: empty coefficient family");
      for (const auto& A : op.family) {
        const double c = isotropic_coefficient(A);
        out.pairs.emplace_back(c, t * c);
      }
    }
  };
  std::visit(Build{out, p, t}, spec.kind);
  return out;
}

}  // namespace detail

using detail::RadialPolicies;
using detail::radial_policies;
using detail::Row;
using detail::weight;
using detail::weight_dp2;

double radial_operator(const OperatorSpec& spec, double u_rr, double u_r_over_r) {
  if (std::holds_alternative<PucciMinusOp>(spec.kind))
    return radial_pucci_eigen(u_rr, u_r_over_r, spec.params, PucciSign::Minus);
  if (std::holds_alternative<PucciPlusOp>(spec.kind))
    return radial_pucci_eigen(u_rr, u_r_over_r, spec.params, PucciSign::Plus);
  const auto pol = radial_policies(spec);
  double best = pol.take_max ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
  for (const auto& [a, b] : pol.pairs) {
    const double v = a * u_rr + b * u_r_over_r;
    best = pol.take_max ? std::max(best, v) : std::min(best, v);
  }
  return best;
}

RadialSolution solve_radial_with_reaction(const RadialProblem& problem, const Reaction* reaction,
                                          const SolverConfig& config, int m,
                                          const std::optional<Eigen::VectorXd>& initial_guess) {
  config.validate();
  const auto& params = problem.spec.params;
  params.validate();
  require(problem.R > problem.r_inner && problem.r_inner >= 0.0, "solve_radial: need 0 <= r_inner < R");
  const RadialGrid grid = problem.make_grid(m);
  const RadialPolicies pol = radial_policies(problem.spec);
  const double h = grid.spacing();
  const double alpha = params.alpha;
  const bool ball = problem.is_ball();
  const int first = ball ? 0 : 1;
  const int last = m - 2;
  const int unknowns = last - first + 1;

  Eigen::VectorXd r = grid.nodes();
  Eigen::VectorXd f(m);
  for (int i = 0; i < m; ++i) {
    f[i] = problem.rhs(r[i]);
    require(std::isfinite(f[i]), "solve_radial: right-hand side must be finite");
  }
  require(std::isfinite(problem.outer_value) && std::isfinite(problem.inner_value),
          "solve_radial: boundary data must be finite");

  Eigen::VectorXd u(m);
  if (initial_guess) {
    require(initial_guess->size() == m, "solve_radial: initial guess has the wrong length");
    u = *initial_guess;
  } else if (ball) {
    u.setConstant(problem.outer_value);
  } else {
    for (int i = 0; i < m; ++i) {
      const double t = double(i) / (m - 1);
      u[i] = (1 - t) * problem.inner_value + t * problem.outer_value;
    }
  }
  u[m - 1] = problem.outer_value;
  if (!ball) u[0] = problem.inner_value;

  const detail::RadialStencil stencil{pol, r, h, ball};
  auto active_row = [&](int i) { return stencil.active_row(i, u); };
  auto grad_sq = [&](int i) { return stencil.grad_sq(i, u); };
  auto source = [&](int i) { return f[i] + (reaction ? reaction->value(u[i]) : 0.0); };

  struct Eval {
    Eigen::VectorXd G;    // divided residual L(u) - s w(p)
    double merit = 0;     // |G|_2
    double residual = 0;  // max |(p^2 + delta^2)^(alpha/2) L(u) - s|
  };
  auto evaluate = [&](double delta) {
    Eval e;
    e.G.resize(unknowns);
    for (int i = first; i <= last; ++i) {
      const Row rw = active_row(i);
      const double s = source(i);
      const double w = weight(grad_sq(i).p2, delta, alpha);
      e.G[i - first] = rw.value - s * w;
      e.merit += e.G[i - first] * e.G[i - first];
      e.residual = std::max(e.residual, std::abs(rw.value / w - s));
    }
    return e;
  };

  RadialSolution sol;
  std::vector<double> ladder = config.delta_ladder;
  if (alpha == 0.0) ladder = {config.delta_ladder.back()};
  const bool pure_howard = alpha == 0.0 && reaction == nullptr;
  std::ostringstream diag;
  Eigen::VectorXd previous_level;
  bool all_converged = true;

  for (double delta : ladder) {
    Eval cur = evaluate(delta);
    bool level_converged = cur.residual <= config.residual_tol;
    int stagnant = 0;
    for (int it = 0; it < config.max_iters && !level_converged; ++it) {
      std::vector<Eigen::Triplet<double>> trip;
      trip.reserve(3 * unknowns);
      for (int i = first; i <= last; ++i) {
        const int row_id = i - first;
        const Row rw = active_row(i);
        const detail::GradSq g = grad_sq(i);
        const double s = source(i);
        const double w = weight(g.p2, delta, alpha);
        const double wp = weight_dp2(g.p2, delta, alpha);
        const double lower = rw.lower - s * wp * g.d_lower;
        const double upper = rw.upper - s * wp * g.d_upper;
        double diag_c = rw.diag - s * wp * g.d_diag;
        if (reaction) diag_c -= reaction->derivative(u[i]) * w;
        trip.emplace_back(row_id, row_id, diag_c);
        if (i - 1 >= first) trip.emplace_back(row_id, row_id - 1, lower);
        if (i + 1 <= last) trip.emplace_back(row_id, row_id + 1, upper);
      }
      Eigen::SparseMatrix<double> J(unknowns, unknowns);
      J.setFromTriplets(trip.begin(), trip.end());
      Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
      lu.compute(J);
      if (lu.info() != Eigen::Success) {
        diag << "singular policy matrix at delta=" << delta << "; ";
        break;
      }
      const Eigen::VectorXd step = lu.solve(-cur.G);
      if (lu.info() != Eigen::Success || !step.allFinite()) {
        diag << "linear solve failed at delta=" << delta << "; ";
        break;
      }
      const Eigen::VectorXd base = u;
      double theta = config.damping;
      Eval trial;
      for (int ls = 0;; ++ls) {
        u.segment(first, unknowns) = base.segment(first, unknowns) + theta * step;
        trial = evaluate(delta);
        if (pure_howard || trial.merit < cur.merit || ls >= 30) break;
        theta *= 0.5;
      }
      ++sol.iterations;
      sol.residual_history.push_back(trial.residual);
      const double moved = theta * step.cwiseAbs().maxCoeff();
      stagnant = (trial.merit >= cur.merit && moved <= 1e-14 * (1.0 + u.cwiseAbs().maxCoeff())) ? stagnant + 1 : 0;
      cur = trial;
      level_converged = cur.residual <= config.residual_tol;
      if (stagnant >= 3) {
        diag << "stagnated at residual " << cur.residual << " (delta=" << delta << "); ";
        break;
      }
    }
    if (!level_converged) all_converged = false;
    if (previous_level.size() > 0) sol.delta_increments.push_back((u - previous_level).cwiseAbs().maxCoeff());
    previous_level = u;
    sol.delta_final = delta;
    sol.residual_norm = cur.residual;
    if (!u.allFinite()) {
      all_converged = false;
      diag << "non-finite iterate; ";
      break;
    }
  }
  sol.converged = all_converged && sol.residual_norm <= config.residual_tol;
  if (!sol.converged && diag.str().empty()) diag << "no convergence within max_iters";
  sol.diagnostics = diag.str();
  sol.u = RadialFunction(grid, u);
  return sol;
}

RadialSolution solve_radial(const RadialProblem& problem, const SolverConfig& config, int m,
                            const std::optional<Eigen::VectorXd>& initial_guess) {
  return solve_radial_with_reaction(problem, nullptr, config, m, initial_guess);
}

RadialFunction residual(const RadialProblem& problem, const RadialFunction& u, double delta) {
  const auto& grid = u.grid;
  const auto d = radial_derivatives(u);
  const double alpha = problem.spec.params.alpha;
  Eigen::VectorXd res = Eigen::VectorXd::Zero(u.size());
  const int first = grid.r_min == 0.0 ? 0 : 1;
  for (int i = first; i + 1 < u.size(); ++i) {
    const double r = grid.node(i);
    const double tangential = r == 0.0 ? d.d2[i] : d.d1[i] / r;
    const double F = radial_operator(problem.spec, d.d2[i], tangential);
    const double p2 = d.d1[i] * d.d1[i] + delta * delta;
    const double factor = alpha == 0.0 ? 1.0 : (p2 == 0.0 ? 0.0 : std::pow(p2, alpha / 2.0));
    res[i] = factor * F - problem.rhs(r);
  }
  return {grid, res};
}

RescaledSolution rescale_solution(const RadialProblem& problem, const RadialSolution& solution, double a, double b) {
  require(a > 0.0 && b > 0.0, "rescale_solution: a and b must be positive");
  const auto& g = solution.u.grid;
  require(std::abs(g.r_max - problem.R) <= 1e-12 * problem.R && std::abs(g.r_min - problem.r_inner) <= 1e-12 * problem.R,
          "rescale_solution: solution grid does not match the problem domain");
  const double alpha = problem.spec.params.alpha;
  const double factor = std::pow(a, alpha + 1.0) * std::pow(b, alpha + 2.0);

  RescaledSolution out;
  out.residual_factor = factor;
  out.problem = problem;
  out.problem.R = problem.R / b;
  out.problem.r_inner = problem.r_inner / b;
  out.problem.outer_value = a * problem.outer_value;
  out.problem.inner_value = a * problem.inner_value;
  const auto rhs = problem.rhs;
  out.problem.rhs = [rhs, factor, b](double r) { return factor * rhs(b * r); };
  // Every operator in the family is positively homogeneous, so F~ = F.

  out.solution = solution;
  const RadialGrid scaled(g.r_min / b, g.r_max / b, g.m, g.dim);
  out.solution.u = RadialFunction(scaled, a * solution.u.values);
  out.solution.residual_norm = factor * solution.residual_norm;
  return out;
}

}  // namespace hopflab
