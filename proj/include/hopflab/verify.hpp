#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "hopflab/barrier.hpp"
#include "hopflab/grid.hpp"
#include "hopflab/solver.hpp"

namespace hopflab {

/// One checked inequality lhs <= rhs (+ tolerance).
struct InequalityReport {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double measured_constant = 0.0;
  double tolerance = 1e-8;
  bool pass = false;
  std::string inputs_digest;
  std::string notes;

  void decide() { pass = lhs <= rhs + tolerance; }
};

inline constexpr double kCheckTolerance = 1e-8;

/// ||f||_inf^(1/(1+alpha)) over all nodes.
template <typename Grid>
double forcing_term(const GridFunction<Grid>& f, double alpha);

/// ||u||_{L^(eps/2)(B_1/2)} <= C (inf_{B_1/2} u + ||f||^(1/(1+alpha))).
/// measured_constant = lhs / (inf + forcing); 0/0 counts as 0.
template <typename Grid>
InequalityReport weak_harnack_ratio(const GridFunction<Grid>& u, const GridFunction<Grid>& f,
                                    const EllipticParams& params, double epsilon_exp);

/// sup_{B_1/2} u <= C (inf_{B_1/2} u + ||f||^(1/(1+alpha))).
template <typename Grid>
InequalityReport harnack_ratio(const GridFunction<Grid>& u, const GridFunction<Grid>& f,
                               const EllipticParams& params);

/// Largest A1 with u >= (A1 ||u||_{L^eps(B_1/2)} - A2 ||f+||^(1/(1+alpha))) dist(x, dB_1)
/// at every node with dist > 0. lhs = -A1, rhs = 0 so pass means A1 > 0 (or vacuous).
struct HopfGrowth {
  InequalityReport report;
  double A1 = 0.0;
  double norm_eps = 0.0;        // ||u||_{L^eps(B_1/2)}
  double forcing = 0.0;         // ||f+||^(1/(1+alpha))
  double min_quotient = 0.0;    // inf u / dist
  bool vacuous = false;
};
template <typename Grid>
HopfGrowth hopf_growth_check(const GridFunction<Grid>& u, const GridFunction<Grid>& f,
                             const EllipticParams& params, double A2, double epsilon_exp = 0.5);

/// Quotients u(x0 + t nu)/t along the inner normal at a point of dB_R(0),
/// Richardson-extrapolated to t -> 0.
struct NormalDerivative {
  std::vector<double> offsets;
  std::vector<double> quotients;
  double estimate = 0.0;
  double error_estimate = 0.0;  // |estimate - quotient at the smallest offset|
};
NormalDerivative normal_derivative(const std::function<double(const Eigen::VectorXd&)>& u,
                                   const Eigen::VectorXd& boundary_point, const std::vector<double>& offsets,
                                   double radius = 1.0, double tol = 1e-10);
NormalDerivative normal_derivative(const RadialFunction& u, const std::vector<double>& offsets,
                                   double tol = 1e-10);
NormalDerivative normal_derivative(const PlanarFunction& u, const Eigen::Vector2d& boundary_point,
                                   const std::vector<double>& offsets, double tol = 1e-10);

/// Offsets k h for k = 1..count on a radial grid (the quotients use nodal values).
std::vector<double> grid_offsets(const RadialGrid& grid, int count = 3);

/// (A) versus (B): A1 <= (d_nu u + A2 ||f+||^(1/(1+alpha))) / ||u||_{L^eps} + tol, with the
/// Richardson error of d_nu u added to the tolerance.
InequalityReport hopf_consistency_check(const HopfGrowth& growth, const NormalDerivative& dnu, double A2);

/// M^-(D^2 u) <= gamma^-alpha ||f||_inf at interior nodes with |u'| >= gamma, excluding
/// nodes within 2h of the level set {|u'| = gamma}.
InequalityReport large_gradient_reduction_check(const RadialFunction& u, const RadialFunction& f,
                                                const EllipticParams& params, double gamma,
                                                double tol = kCheckTolerance);

/// Audit of u = (1 - |x|)^2 on B_1: Delta u <= 0 on {|grad u| >= 1}, d_nu u = 0 with
/// quotients u(x0 + t nu)/t = t, u >= 0 and u = 0 on dB_1.
struct CounterexampleAudit {
  InequalityReport report;
  int n = 2;
  double laplacian_at_half = 0.0;        // closed form 2n - 2(n-1)/r at r = 1/2
  double max_laplacian_large_grad = 0.0; // max over nodes with r <= 1/2
  double discrete_mismatch = 0.0;        // max |discrete - closed form| Laplacian
  double grad_at_half = 0.0;
  NormalDerivative dnu;
  double quotient_slope = 0.0;           // least-squares slope of q(t) against t
  double max_quotient_error = 0.0;       // max |q(t) - t|
  double boundary_value = 0.0;
  double min_value = 0.0;
};
CounterexampleAudit counterexample_audit(int n, int m);

/// lower <= u + tol on [r_in, r_out]; boundary ordering is a precondition.
InequalityReport comparison_check(const RadialFunction& u, const RadialFunction& lower, double r_in,
                                  double r_out, double tol = kCheckTolerance);

/// Random ordered data on B_1: f1 <= f2 and g1 >= g2 must give u1 >= u2 at every node.
/// Members are single-signed: b = c0 + c1 r^2 + c2 (1 + cos(pi q r)) / 2 with c_i in [0, 1], and the pair is
/// (b, b + d), (-b - d, -b) or (-b, b') with d = d0 + d1 r^2 >= 0; g2 = g1 - U(0, 1).
struct ComparisonStudy {
  int pairs = 0;
  int violations = 0;
  int unconverged = 0;
  double max_violation = 0.0;  // max over pairs and nodes of u2 - u1 (<= 0 when ordered)
  bool pass = false;
  std::string notes;
};
ComparisonStudy comparison_study(const OperatorSpec& spec, int pairs, std::uint64_t seed, int m,
                                 const SolverConfig& config, double tol = 1e-10);

/// Barrier on B_R \ B_{R/2} extended by M on B_{R/2}, sampled on the grid of B_R.
RadialFunction barrier_extended_field(const BarrierSpec& spec, const RadialGrid& grid);

// ---------------------------------------------------------------------------
// Sweeps over random radial families.

struct SweepConfig {
  int runs = 50;
  std::uint64_t seed = 1;
  std::vector<int> dims{2, 3};
  std::vector<double> alphas{0.0, 1.0, 2.0};
  std::vector<double> epsilons{0.25, 0.5, 1.0};
  std::vector<double> scales{0.1, 1.0, 10.0};
  double lambda = 1.0;
  double Lambda = 2.0;
  double boundary_min = 0.1, boundary_max = 2.0;
  double rhs_max = 1.0;
  double A2 = 1.0;
  int grid_m = 257;
  SolverConfig solver;

  void validate() const;
};

/// One random radial member: operator, data and solution on B_1.
struct FamilyMember {
  int index = 0;
  int n = 2;
  double alpha = 0.0;
  std::string op;
  double boundary = 0.0;       // u(1) (after the nonnegativity shift)
  double rhs_a0 = 0.0, rhs_a1 = 0.0;  // f(r) = a0 + a1 r^2
  RadialSolution solution;
  RadialFunction f;
};

/// Members are drawn from the seed only; the draw does not depend on solve outcomes.
/// sign > 0: f >= 0, sign < 0: f <= 0, sign == 0: random sign per member.
/// Solutions are shifted by a constant when needed so that u >= 0 (shifts preserve the equation).
std::vector<FamilyMember> radial_family(const SweepConfig& cfg, int n, double alpha, int sign, bool zero_boundary);

struct SweepRow {
  std::string name;
  int member = 0;
  int n = 2;
  double alpha = 0.0;
  double epsilon = 0.0;  // NaN when unused
  double constant = 0.0;
  double scale_spread = 0.0;  // max relative deviation of the constant over the scales
  bool pass = false;
  bool converged = false;
  double residual = 0.0;
  int grid_m = 0;
  std::string notes;
};

struct SweepSummary {
  std::vector<SweepRow> rows;
  bool pass = true;
  int diverged = 0;
  std::string notes;
};

SweepSummary harnack_sweep(const SweepConfig& cfg);
SweepSummary weak_harnack_sweep(const SweepConfig& cfg);
/// Zero boundary data and f <= 0; rows for (A) A1 and for the (A)/(B) consistency.
SweepSummary hopf_sweep(const SweepConfig& cfg);

}  // namespace hopflab
