#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "hopflab/common.hpp"

namespace hopflab {

/// Dimension, ellipticity pair and degeneracy exponent of |p|^alpha F(X).
template <typename Scalar>
struct EllipticParamsT {
  int n = 2;
  Scalar lambda = Scalar(1);
  Scalar Lambda = Scalar(1);
  Scalar alpha = Scalar(0);

  void validate() const {
    require(n >= 2, "EllipticParams: n must be >= 2");
    require(lambda > Scalar(0) && lambda <= Lambda, "EllipticParams: need 0 < lambda <= Lambda");
    require(alpha >= Scalar(0), "EllipticParams: alpha must be >= 0");
  }
};

using EllipticParams = EllipticParamsT<double>;

enum class PucciSign { Plus, Minus };

inline constexpr double kSymmetryTolerance = 1e-10;

/// Pucci extremal value from a list of eigenvalues.
template <typename Derived>
typename Derived::Scalar pucci_from_eigenvalues(const Eigen::DenseBase<Derived>& eig,
                                                const EllipticParamsT<typename Derived::Scalar>& p,
                                                PucciSign sign) {
  using Scalar = typename Derived::Scalar;
  Scalar pos(0), neg(0);
  for (Eigen::Index i = 0; i < eig.size(); ++i) {
    const Scalar mu = eig.derived().coeff(i);
    if (mu > Scalar(0))
      pos += mu;
    else
      neg -= mu;
  }
  return sign == PucciSign::Plus ? p.Lambda * pos - p.lambda * neg : p.lambda * pos - p.Lambda * neg;
}

/// Eigenvalues of a (numerically) symmetric matrix. Asymmetry up to
/// kSymmetryTolerance is symmetrized away, anything larger is rejected.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> symmetric_eigenvalues(
    const Eigen::MatrixBase<Derived>& X) {
  using Scalar = typename Derived::Scalar;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  require(X.rows() == X.cols(), "symmetric_eigenvalues: matrix must be square");
  if (X.size() == 0) return {};
  const Scalar asym = (X - X.transpose()).cwiseAbs().maxCoeff();
  if (!(asym <= Scalar(kSymmetryTolerance)))
    fail(ErrorKind::InvalidArgument, "matrix is not symmetric (asymmetry " + std::to_string(double(asym)) + ")");
  const Mat S = (X + X.transpose()) / Scalar(2);
  Eigen::SelfAdjointEigenSolver<Mat> es(S, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) fail(ErrorKind::NumericalDegeneracy, "symmetric eigensolver failed");
  return es.eigenvalues();
}

template <typename Derived>
typename Derived::Scalar pucci_plus(const Eigen::MatrixBase<Derived>& X,
                                    const EllipticParamsT<typename Derived::Scalar>& p) {
  require(X.rows() == p.n, "pucci_plus: matrix order must equal n");
  return pucci_from_eigenvalues(symmetric_eigenvalues(X), p, PucciSign::Plus);
}

template <typename Derived>
typename Derived::Scalar pucci_minus(const Eigen::MatrixBase<Derived>& X,
                                     const EllipticParamsT<typename Derived::Scalar>& p) {
  require(X.rows() == p.n, "pucci_minus: matrix order must equal n");
  return pucci_from_eigenvalues(symmetric_eigenvalues(X), p, PucciSign::Minus);
}

/// Pucci operator on a radial Hessian: radial eigenvalue with multiplicity 1,
/// tangential eigenvalue with multiplicity n-1.
template <typename Scalar>
Scalar radial_pucci_eigen(Scalar mu_radial, Scalar mu_tangential, const EllipticParamsT<Scalar>& p,
                          PucciSign sign) {
  auto weight = [&](Scalar mu) {
    const bool use_big = (sign == PucciSign::Plus) == (mu > Scalar(0));
    return (use_big ? p.Lambda : p.lambda) * mu;
  };
  return weight(mu_radial) + Scalar(p.n - 1) * weight(mu_tangential);
}

/// Radial reduction: u_rr is the radial second derivative, u_r/r the tangential
/// eigenvalue. r must be strictly positive.
template <typename Scalar>
Scalar radial_pucci(Scalar u_rr, Scalar u_r, Scalar r, const EllipticParamsT<Scalar>& p, PucciSign sign) {
  require(r > Scalar(0), "radial_pucci: r must be > 0");
  return radial_pucci_eigen(u_rr, u_r / r, p, sign);
}

// ---------------------------------------------------------------------------
// Operator family F with F(0) = 0.

struct PucciMinusOp {};
struct PucciPlusOp {};
struct LinearTraceOp {
  Eigen::MatrixXd A;
};
struct BellmanMinOp {
  std::vector<Eigen::MatrixXd> family;
};

using OperatorKind = std::variant<PucciMinusOp, PucciPlusOp, LinearTraceOp, BellmanMinOp>;

struct OperatorSpec {
  OperatorKind kind;
  EllipticParams params;

  static OperatorSpec pucci_minus(const EllipticParams& p) { return {PucciMinusOp{}, p}; }
  static OperatorSpec pucci_plus(const EllipticParams& p) { return {PucciPlusOp{}, p}; }
  static OperatorSpec linear_trace(Eigen::MatrixXd A, const EllipticParams& p);
  static OperatorSpec laplacian(const EllipticParams& p);
  static OperatorSpec bellman_min(std::vector<Eigen::MatrixXd> family, const EllipticParams& p);
  /// Bellman minimum over every diagonal matrix with entries in {lambda, Lambda}.
  static OperatorSpec diagonal_bellman(const EllipticParams& p);

  std::string name() const;
};

/// F(X) for the given operator.
double apply_operator(const OperatorSpec& spec, const Eigen::MatrixXd& X);

/// |p|^alpha F(X); returns 0 at p = 0 whenever alpha > 0.
double degenerate_operator(const OperatorSpec& spec, const Eigen::VectorXd& grad, const Eigen::MatrixXd& X);

/// Witness of the worst ellipticity margin found by check_ellipticity.
struct EllipticityReport {
  bool pass = true;
  double worst_margin = 0.0;  // most negative slack over all probes (>= -tol on pass)
  std::string worst_property;
  Eigen::MatrixXd witness_X, witness_Y;  // Y holds N for the monotonicity form
  int samples = 0;
};

/// Randomised audit of M^-(X-Y) <= F(X)-F(Y) <= M^+(X-Y) and of
/// lambda Tr N <= F(X+N)-F(X) <= Lambda Tr N for N >= 0.
EllipticityReport check_ellipticity(const OperatorSpec& spec, int sample_count, std::uint64_t seed,
                                    double tol = 1e-10);

}  // namespace hopflab
