#pragma once

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <vector>

#include "hopflab/grid.hpp"
#include "hopflab/verify.hpp"

namespace hopflab {

using ScalarField = std::function<double(const Eigen::VectorXd&)>;
using VectorField = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// omega(t) = t^gamma, or piecewise linear through (t_i, w_i) with (0, 0) first and
/// constant beyond the last knot.
struct ModulusOfContinuity {
  enum class Kind { Power, Tabulated };
  Kind kind = Kind::Power;
  double gamma = 1.0;
  std::vector<double> t, w;

  static ModulusOfContinuity power(double gamma);
  static ModulusOfContinuity tabulated(std::vector<double> t, std::vector<double> w);
  double operator()(double s) const;
  bool strictly_positive() const;
  /// Monotone, omega(0) = 0 and subadditive on the knots (power: gamma in (0, 1]).
  void validate() const;
};

/// l(x) = value + gradient . (x - anchor)
struct AffineMap {
  Eigen::VectorXd anchor;
  double value = 0.0;
  Eigen::VectorXd gradient;

  double operator()(const Eigen::VectorXd& x) const { return value + gradient.dot(x - anchor); }
};

struct AffineFit {
  AffineMap map;
  double sup_error = 0.0;
};

/// Best uniform (Chebyshev) affine approximation on the samples, by the slack LP
///   min t  s.t. |u_i - l(x_i)| <= t
/// solved through its dual with a dense two-phase simplex. The map is anchored at `anchor`
/// (the sample centroid when empty). Needs >= dim + 2 samples not on a hyperplane.
AffineFit minimax_affine_fit(const std::vector<Eigen::VectorXd>& points, const std::vector<double>& values,
                             const Eigen::VectorXd& anchor = {});

/// Cubic lattice with spacing rho / per_radius clipped to the closed ball (contains the
/// center and the axis points center +- rho e_i).
std::vector<Eigen::VectorXd> ball_samples(const Eigen::VectorXd& center, double rho, int per_radius);

struct CampanatoScale {
  Eigen::VectorXd center;
  double rho = 0.0;
  double fit_error = 0.0;
  double scaled = 0.0;  // fit_error / rho^(1+gamma)
  int samples = 0;
};

struct CampanatoReport {
  double A = 0.0;
  std::vector<CampanatoScale> scales;
  bool truncated = false;  // some balls were skipped for lack of resolution
  std::string notes;
};

/// max over (center, radius) of the minimax fit error on B_rho(center) divided by rho^(1+gamma).
/// Balls must lie in `region`.
CampanatoReport campanato_seminorm(const ScalarField& u, const Ball& region, double gamma,
                                   const std::vector<Eigen::VectorXd>& centers, const std::vector<double>& radii,
                                   int per_radius = 6);
/// Grid version: samples are the nodes in each ball; balls with fewer than 8 nodes per
/// diameter are skipped and reported as truncation.
CampanatoReport campanato_seminorm(const PlanarFunction& u, const Ball& region, double gamma,
                                   const std::vector<Eigen::VectorXd>& centers, const std::vector<double>& radii);

struct DyadicStep {
  int k = 0;
  double r = 0.0;
  Eigen::VectorXd p;
  double c = 0.0;
  double fit_error = 0.0;
  double dp = 0.0, dc = 0.0;          // |p_k - p_(k+1)|, |c_k - c_(k+1)| (0 on the last step)
  double dp_bound = 0.0, dc_bound = 0.0;  // 8 A r_k^gamma, 4 A r_k^(1+gamma)
};

struct DyadicExpansion {
  std::vector<DyadicStep> steps;
  Eigen::VectorXd gradient;   // p(x0) = p_kmax
  double c_limit = 0.0;
  double value_gap = 0.0;     // |c_kmax - u(x0)|
  double A = 0.0;             // seminorm used in the bounds
  double remainder = 0.0;     // sup_{B_1/4(x0)} |u - l_x0| / |x - x0|^(1+gamma)
  bool pass = false;
  std::string notes;
};

/// Minimax fits on B_(2^-k)(x0), k = 1..k_max, with the telescoping checks
/// |p_k - p_(k+1)| <= 8 A r_k^gamma and |c_k - c_(k+1)| <= 4 A r_k^(1+gamma).
/// A <= 0 means: use max_k fit_error_k / r_k^(1+gamma) of these very fits.
DyadicExpansion dyadic_expansion(const ScalarField& u, const Eigen::VectorXd& x0, double gamma, int k_max = 10,
                                 double A = 0.0, int per_radius = 6, double tol = 1e-10);

struct C1OmegaReport {
  double hypothesis_T = 0.0;  // smallest T for which the expansion bound holds on the samples
  double sup_u = 0.0;         // ||u||_{L^inf(B_R)}
  double S = 0.0;             // sup_{B_sigma} |grad u|
  std::vector<InequalityReport> checks;
  bool pass = false;
};

/// C^{1,omega} bounds measured on lattice samples. The expansion hypothesis
/// |u(x) - u(x0) - grad u(x0).(x - x0)| <= T |x - x0| omega(|x - x0|) on x0 in B_sigma, x in B_rho(x0)
/// is checked first; the run is refused (CheckFailed) if it does not hold with the given T.
C1OmegaReport c1omega_constants_check(const ScalarField& u, const VectorField& grad_u, int dim, double rho,
                                      double sigma, double R, const ModulusOfContinuity& omega, double T,
                                      int per_radius = 8, double tol = 1e-9);

}  // namespace hopflab
