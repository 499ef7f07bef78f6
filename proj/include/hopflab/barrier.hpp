#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <string>

#include "hopflab/operators.hpp"

namespace hopflab {

/// Radial supersolution-from-below on the annulus B_R \ B_{R/2}:
///   Gamma(x) = M ((|x|/R)^(-beta) - 1) / (2^beta - 1),  beta = (n-1) Lambda / lambda + 2.
/// Gamma = M on |x| = R/2, Gamma = 0 on |x| = R.
template <typename Scalar>
struct BarrierSpecT {
  Scalar M = Scalar(1);
  Scalar R = Scalar(1);
  EllipticParamsT<Scalar> params;

  void validate() const {
    params.validate();
    require(M >= Scalar(0), "BarrierSpec: M must be >= 0");
    require(R > Scalar(0), "BarrierSpec: R must be > 0");
  }
  Scalar beta() const { return Scalar(params.n - 1) * params.Lambda / params.lambda + Scalar(2); }
  /// beta / (2^beta - 1), the slope of the unit profile at |x| = 1.
  Scalar slope() const {
    const Scalar b = beta();
    return b / (std::pow(Scalar(2), b) - Scalar(1));
  }
};

using BarrierSpec = BarrierSpecT<double>;

template <typename Scalar>
void check_in_annulus(const BarrierSpecT<Scalar>& s, Scalar radius) {
  // Relative slack so that boundary points produced by scaling are accepted.
  const Scalar eps = Scalar(1e-12) * s.R;
  if (!(radius >= s.R / Scalar(2) - eps && radius <= s.R + eps))
    fail(ErrorKind::InvalidArgument, "barrier: point outside the closed annulus R/2 <= |x| <= R");
}

/// Profile value at radius |x|.
template <typename Scalar>
Scalar barrier_profile(const BarrierSpecT<Scalar>& s, Scalar radius) {
  check_in_annulus(s, radius);
  const Scalar b = s.beta();
  return s.M * (std::pow(radius / s.R, -b) - Scalar(1)) / (std::pow(Scalar(2), b) - Scalar(1));
}

template <typename Scalar>
Scalar barrier_profile_d1(const BarrierSpecT<Scalar>& s, Scalar radius) {
  check_in_annulus(s, radius);
  const Scalar b = s.beta();
  return -(s.M / s.R) * s.slope() * std::pow(radius / s.R, -(b + Scalar(1)));
}

template <typename Scalar>
Scalar barrier_profile_d2(const BarrierSpecT<Scalar>& s, Scalar radius) {
  check_in_annulus(s, radius);
  const Scalar b = s.beta();
  return (s.M / (s.R * s.R)) * s.slope() * (b + Scalar(1)) * std::pow(radius / s.R, -(b + Scalar(2)));
}

template <typename Derived>
typename Derived::Scalar barrier_eval(const BarrierSpecT<typename Derived::Scalar>& s,
                                      const Eigen::MatrixBase<Derived>& x) {
  return barrier_profile(s, x.norm());
}

template <typename Derived>
typename Derived::Scalar barrier_grad_norm(const BarrierSpecT<typename Derived::Scalar>& s,
                                           const Eigen::MatrixBase<Derived>& x) {
  return std::abs(barrier_profile_d1(s, x.norm()));
}

/// Explicit constants of the barrier construction for M = R = 1.
struct BarrierConstants {
  double beta = 0;
  double c0 = 0;            // |grad Gamma|^alpha M^-(D^2 Gamma) >= c0 M^(1+alpha) / R^(2+alpha)
  double pucci_lower = 0;   // unweighted: M^-(D^2 Gamma) >= slope ((beta+1) lambda - (n-1) Lambda)
  double A1 = 0, A2 = 0;    // A1 (M/R) d <= Gamma <= A2 (M/R) d,  d = dist(x, dB_R)
  double A3 = 0, A4 = 0;    // A3 M/R <= |grad Gamma| <= A4 M/R
};

BarrierConstants barrier_constants(const BarrierSpec& spec);

struct BarrierMargins {
  double pucci = 0;        // min of |grad|^alpha M^- - c0 M^(1+alpha)/R^(2+alpha)
  double lower_sandwich = 0;
  double upper_sandwich = 0;
  double grad_lower = 0;
  double grad_upper = 0;
  double boundary = 0;     // -max boundary value error
};

struct BarrierCertificate {
  BarrierSpec spec;
  BarrierConstants constants;
  BarrierMargins margins;
  int samples = 0;
  double tol = 0;
  bool pass = false;
  std::string failed_property;  // empty on pass
  Eigen::VectorXd witness;      // point realising the failed property
};

/// Deterministic certification on a (radius x angle) tensor grid plus both
/// boundary spheres. Passes iff every margin is >= -tol.
BarrierCertificate certify_barrier(const BarrierSpec& spec, int samples, double tol);

}  // namespace hopflab
