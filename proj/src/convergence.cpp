#include <cmath>

#include "hopflab/solver.hpp"

namespace hopflab {

ManufacturedRadial ManufacturedRadial::standard() {
  return {[](double r) { return std::exp(-r * r) + 0.5 * std::cos(2 * r); },
          [](double r) { return -2 * r * std::exp(-r * r) - std::sin(2 * r); },
          [](double r) { return (4 * r * r - 2) * std::exp(-r * r) - 2 * std::cos(2 * r); }};
}

RadialProblem manufactured_problem(const OperatorSpec& spec, const ManufacturedRadial& exact, double R) {
  require(R > 0.0, "manufactured_problem: R must be > 0");
  RadialProblem p;
  p.spec = spec;
  p.R = R;
  p.outer_value = exact.u(R);
  const double alpha = spec.params.alpha;
  p.rhs = [spec, exact, alpha](double r) {
    const double d1 = exact.du(r), d2 = exact.d2u(r);
    const double tangential = r > 0.0 ? d1 / r : d2;
    const double F = radial_operator(spec, d2, tangential);
    return alpha == 0.0 ? F : std::pow(std::abs(d1), alpha) * F;
  };
  return p;
}

ConvergenceStudy convergence_study(const OperatorSpec& spec, const ManufacturedRadial& exact,
                                   const SolverConfig& config, int m0, int levels) {
  require(m0 >= 5 && levels >= 2, "convergence_study: need m0 >= 5 and at least two levels");
  const RadialProblem problem = manufactured_problem(spec, exact);
  ConvergenceStudy out;
  out.all_converged = true;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int k = 0; k < levels; ++k) {
    ConvergenceLevel lv;
    lv.m = (m0 - 1) * (1 << k) + 1;
    const RadialSolution sol = solve_radial(problem, config, lv.m);
    lv.h = sol.u.grid.spacing();
    for (int i = 0; i < lv.m; ++i)
      lv.max_error = std::max(lv.max_error, std::abs(sol.u.values[i] - exact.u(sol.u.grid.node(i))));
    lv.converged = sol.converged;
    lv.residual = sol.residual_norm;
    lv.iterations = sol.iterations;
    out.all_converged = out.all_converged && sol.converged;
    out.levels.push_back(lv);
    const double x = std::log(lv.h), y = std::log(std::max(lv.max_error, 1e-300));
    sx += x, sy += y, sxx += x * x, sxy += x * y;
  }
  const double n = levels;
  out.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return out;
}

}  // namespace hopflab
