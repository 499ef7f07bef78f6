#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hopflab/grid.hpp"
#include "hopflab/operators.hpp"

namespace hopflab {

/// Numerical policy shared by every solver.
struct SolverConfig {
  double residual_tol = 1e-8;
  int max_iters = 200;
  /// Regularisation levels: |p|^alpha is replaced by (p^2 + delta^2)^(alpha/2).
  std::vector<double> delta_ladder{1e-1, 1e-2, 1e-3, 1e-4};
  double damping = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// |u'|^alpha F(D^2 u) = f on the ball B_R (r_inner = 0, symmetry at the
/// origin) or on the annulus r_inner < |x| < R, with Dirichlet data.
struct RadialProblem {
  OperatorSpec spec;
  double R = 1.0;
  double r_inner = 0.0;
  std::function<double(double)> rhs = [](double) { return 0.0; };
  double outer_value = 0.0;
  double inner_value = 0.0;  // used on annuli only

  bool is_ball() const { return r_inner == 0.0; }
  RadialGrid make_grid(int m) const { return RadialGrid(r_inner, R, m, spec.params.n); }
};

/// Same equation on the planar disk of radius R with Dirichlet data g(x)
/// imposed on the rim band.
struct PlanarProblem {
  OperatorSpec spec;
  double R = 1.0;
  std::function<double(const Eigen::Vector2d&)> rhs = [](const Eigen::Vector2d&) { return 0.0; };
  std::function<double(const Eigen::Vector2d&)> boundary = [](const Eigen::Vector2d&) { return 0.0; };
};

template <typename Grid>
struct Solution {
  GridFunction<Grid> u;
  double residual_norm = 0.0;  // max-norm residual of the regularised equation at delta_final
  int iterations = 0;
  double delta_final = 0.0;
  bool converged = false;
  std::vector<double> residual_history;  // merit value after every iteration
  std::vector<double> delta_increments;  // max |u_delta_k - u_delta_{k-1}| along the ladder
  std::string diagnostics;
};

using RadialSolution = Solution<RadialGrid>;
using PlanarSolution = Solution<CartesianGrid2D>;

/// Reaction profile beta on [0,1] (zero outside) and its derivative.
struct ReactionProfile {
  std::function<double(double)> value;
  std::function<double(double)> derivative;

  /// beta(t) = 6 t (1 - t) on [0, 1], unit mass.
  static ReactionProfile standard_bump();
  static ReactionProfile zero();
  double sup(int samples = 4097) const;
};

/// Extra semilinear source g(u) added to f: used for beta_eps(u).
struct Reaction {
  std::function<double(double)> value;
  std::function<double(double)> derivative;
};

/// Monotone radial scheme solved by policy iteration with delta continuation.
RadialSolution solve_radial(const RadialProblem& problem, const SolverConfig& config, int m,
                            const std::optional<Eigen::VectorXd>& initial_guess = std::nullopt);

/// |u'|^alpha F(D^2 u) = beta_eps(u) + f with beta_eps(t) = beta(t/eps)/eps. The
/// reaction is coupled inside the policy iteration (semismooth Newton).
RadialSolution solve_flame(const RadialProblem& problem, const ReactionProfile& beta, double epsilon,
                           const SolverConfig& config, int m,
                           const std::optional<Eigen::VectorXd>& initial_guess = std::nullopt);

/// Limit (epsilon -> 0) dead-core profile used as the flame starting guess:
/// u = 0 on [0, r0], radial F-harmonic outside with |u'(r0)|^(alpha+2) = (alpha+2) mass / a,
/// r0 the smaller root of u(R) = outer_value. Throws Configuration if no root exists.
Eigen::VectorXd flame_dead_core_guess(const RadialProblem& problem, const ReactionProfile& beta, int m,
                                      double* free_boundary_radius = nullptr);

/// Discrete shooting on u(0) for the ball scheme at regularisation delta; returns
/// the smallest-core solution of the discrete system when a crossing exists.
std::optional<Eigen::VectorXd> flame_shooting_guess(const RadialProblem& problem, const ReactionProfile& beta,
                                                    double epsilon, double delta, int m);

/// Radial engine with an arbitrary reaction term.
RadialSolution solve_radial_with_reaction(const RadialProblem& problem, const Reaction* reaction,
                                          const SolverConfig& config, int m,
                                          const std::optional<Eigen::VectorXd>& initial_guess);

/// Monotone wide-stencil scheme on the disk; `directions` lattice directions
/// (even, >= 4) are grouped into orthogonal frames.
PlanarSolution solve_2d_wide_stencil(const PlanarProblem& problem, const SolverConfig& config, int m,
                                     int directions);

/// Pointwise |u'|^alpha F(D^2 u) - f (delta = 0 unless given); zero at Dirichlet nodes.
RadialFunction residual(const RadialProblem& problem, const RadialFunction& u, double delta = 0.0);
PlanarFunction residual(const PlanarProblem& problem, const PlanarFunction& u, int directions, double delta = 0.0);

/// Radial operator value F_rad(u'', u'/r) for the spec (rotation-invariant specs only).
double radial_operator(const OperatorSpec& spec, double u_rr, double u_r_over_r);

/// v(x) = a u(b x) and the problem it solves:
///   F~(X) = a b^2 F(X / (a b^2)) (= F for the positively homogeneous family),
///   f~(x) = a^(alpha+1) b^(alpha+2) f(b x).
struct RescaledSolution {
  RadialSolution solution;
  RadialProblem problem;
  double residual_factor = 1.0;  // a^(alpha+1) b^(alpha+2)
};
RescaledSolution rescale_solution(const RadialProblem& problem, const RadialSolution& solution, double a, double b);

/// Manufactured radial solution with u'(0) = 0; f follows by substitution.
struct ManufacturedRadial {
  std::function<double(double)> u, du, d2u;

  /// u = exp(-r^2) + cos(2 r) / 2.
  static ManufacturedRadial standard();
};

/// Problem on B_R whose exact solution is `exact`.
RadialProblem manufactured_problem(const OperatorSpec& spec, const ManufacturedRadial& exact, double R = 1.0);

struct ConvergenceLevel {
  int m = 0;
  double h = 0.0;
  double max_error = 0.0;
  bool converged = false;
  double residual = 0.0;
  int iterations = 0;
};

struct ConvergenceStudy {
  std::vector<ConvergenceLevel> levels;
  double slope = 0.0;  // least-squares slope of log error against log h
  bool all_converged = false;
};

/// Dyadic refinement m_k = (m0 - 1) 2^k + 1, k = 0..levels-1.
ConvergenceStudy convergence_study(const OperatorSpec& spec, const ManufacturedRadial& exact,
                                   const SolverConfig& config, int m0 = 129, int levels = 4);

}  // namespace hopflab
