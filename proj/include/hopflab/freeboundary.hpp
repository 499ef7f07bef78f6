#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "hopflab/grid.hpp"
#include "hopflab/solver.hpp"
#include "hopflab/verify.hpp"

namespace hopflab {

/// u+ together with grad u+ := 1_{u > 0} grad u (node-wise indicator of the node's own sign).
struct RadialPositivePart {
  RadialFunction u;
  Eigen::VectorXd grad;  // radial derivative
};
struct PlanarPositivePart {
  PlanarFunction u;
  Eigen::MatrixX2d grad;
};

RadialPositivePart positive_part(const RadialFunction& u);
PlanarPositivePart positive_part(const PlanarFunction& u);

/// ||grad u+||_{L^p(region)}.
double gradient_norm(const RadialPositivePart& pp, double p, const Ball& region);
double gradient_norm(const PlanarPositivePart& pp, double p, const Ball& region);

// ---------------------------------------------------------------------------
// Gluing across an interface on the planar grid.

enum class Side : char { None = 0, A = 1, B = 2, Interface = 3 };

/// u lives on A, v on B, both vanish on the interface nodes. Nodes outside
/// the disk or unlabelled are ignored.
struct GlueInput {
  PlanarFunction u, v;
  std::vector<Side> side;  // one label per grid node
  double trace_tol = 1e-10;
};

/// Phi_eta(t) = t - eta (t > eta), 0 (|t| <= eta), t + eta (t < -eta).
double truncate_eta(double t, double eta);
/// zeta_s(d) = 0 (d <= s/2), 2 (d - s/2) / s (s/2 < d < s), 1 (d >= s).
double cutoff_s(double d, double s);

struct GlueNorms {
  double p = 1.0;
  double w = 0.0, u_on_A = 0.0, v_on_B = 0.0;
  double grad_w = 0.0, grad_u_on_A = 0.0, grad_v_on_B = 0.0;
  double grad_w_outside_collar = 0.0;  // ||grad_h w|| over the nodes used by the identity check
};

struct GlueResult {
  PlanarFunction w;
  PlanarFunction w_eta;        // Phi_eta(w) zeta_s(d)
  PlanarFunction dist;         // distance to the interface nodes
  Eigen::MatrixX2d grad;       // 1_A grad u + 1_B grad v
  std::vector<GlueNorms> norms;  // p = 1, 2, inf
  double collar_identity_error = 0.0;  // max |grad_h w - grad| at nodes >= 2h from the interface
  int collar_nodes_checked = 0;
  bool pass = false;
  std::string notes;
};

/// Builds w = u on A, v on B, 0 on the interface, checks
///   ||w||_p <= ||u||_{L^p(A)} + ||v||_{L^p(B)},  same for gradients (p = 1, 2, inf),
/// and grad_h w = 1_A grad u + 1_B grad v at nodes >= 2h from the interface whose stencil stays on one side.
/// Throws InvalidArgument naming the worst node when u or v does not vanish on the interface.
GlueResult glue(const GlueInput& input, double eta, double s, double rel_tol = 1e-8);

/// Random valid input on the disk grid of half-width 1: interface = nodes with phi > 0 next to
/// phi <= 0 for a random level function phi (half-plane plus ripple, or circle); A = {phi > 0}
/// minus the interface, B = {phi <= 0}; u, v = psi dist(x, interface) with random smooth psi.
GlueInput random_glue_input(std::uint64_t seed, int m, bool v_zero);

struct GlueCase {
  int index = 0;
  bool v_zero = false;
  bool pass = false;
  double equality_error = 0.0;  // relative gap in the p = 1, 2 identities when v = 0
  std::string notes;
};

struct GluePropertyReport {
  std::vector<GlueCase> cases;
  int failures = 0;
  double max_equality_error = 0.0;
  bool pass = false;
};

/// glue() on `cases` random inputs (v = 0 on every other one); with v = 0 also
/// ||w||_p = ||u||_{L^p(A)} and ||grad w||_p = ||grad u||_{L^p(A)} for p = 1, 2 to rel_tol.
GluePropertyReport glue_property_test(int cases, std::uint64_t seed, int m = 49, double eta = 1e-3,
                                      double s = 0.1, double rel_tol = 1e-8);

// ---------------------------------------------------------------------------
// Flame sweep.

struct FlameProblem {
  OperatorSpec spec;
  ReactionProfile beta = ReactionProfile::standard_bump();
  std::function<double(double)> rhs = [](double) { return 0.0; };
  double R = 4.0;            // domain radius; the estimates are read on B_1 inside it
  double outer_value = 1.0;
  std::vector<double> epsilons{1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64, 1.0 / 128, 1.0 / 256};
  int grid_m = 8193;
};

struct FlameRow {
  double epsilon = 0.0;
  double sup_u = 0.0;          // ||u_eps||_{L^inf(B_1)}
  double lip_norm = 0.0;       // ||grad u_eps||_{L^inf(B_1/2)}
  double beta_sup = 0.0;
  double f_sup = 0.0;
  double measured_C = 0.0;     // lip / (1 + beta^(1/(1+a)) + sup_u + f^(1/(1+a)))
  double fb_quotient_max = 0.0;  // one-sided quotients at the eps-level crossing
  double u_center = 0.0;
  bool sharp_case = false;     // u_eps(0) <= eps
  double lip_quarter = 0.0;    // ||grad u_eps||_{L^inf(B_1/4)}
  double sharp_C = 0.0;        // lip_quarter / (1 + beta^(1/(1+a)) + f^(1/(1+a)))
  bool converged = false;
  double residual = 0.0;
  int iterations = 0;
  std::string diagnostics;
};

struct FlameSweep {
  std::vector<FlameRow> rows;
  double slope = 0.0;        // least-squares slope of log C against log(1/eps)
  double sharp_slope = 0.0;  // same for sharp_C over the sharp-case rows (0 if fewer than two)
  int sharp_rows = 0;
  bool all_converged = false;
  bool pass = false;
  std::string notes;
};

inline constexpr double kFlameSlopeLimit = 0.1;

FlameSweep flame_sweep(const FlameProblem& problem, const SolverConfig& config);

/// Least-squares slope of log y against log(1/x).
double log_slope(const std::vector<double>& x, const std::vector<double>& y);

// ---------------------------------------------------------------------------
// One-phase free boundary.

struct FBProblem {
  OperatorSpec spec;
  double h = 1.0;       // bound on |grad u+| at the free boundary
  double f_sup = 0.0;   // ||f||_inf
};

struct FBReport {
  InequalityReport report;  // lhs = max free-boundary quotient, rhs = h
  int free_boundary_pairs = 0;
  double quotient_max = 0.0;
  double lip_norm = 0.0;       // ||grad u+||_{L^inf(B_1/2)}
  double sup_positive = 0.0;   // ||u||_{L^inf(B_1^+)}
  double measured_C = 0.0;
  bool near_origin = false;    // a free-boundary node within one spacing of the origin
  double sharp_C = 0.0;        // without the ||u||_inf term (reported when near_origin)
  double discretization_tol = 0.0;
};

/// Free boundary = adjacent node pairs with u(x) > 0 >= u(y). Quotient at a pair:
/// (u(z) - u(x)) / |z - x| with z = 2x - y the next node into {u > 0} (u(x)/|x - y| if z is not positive).
FBReport fb_lipschitz_check(const FBProblem& problem, const RadialFunction& u, double tol = kCheckTolerance);
FBReport fb_lipschitz_check(const FBProblem& problem, const PlanarFunction& u, double tol = kCheckTolerance);

}  // namespace hopflab
