#pragma once

// Shared stencil of the monotone radial scheme.

#include <Eigen/Dense>

#include <cmath>
#include <utility>
#include <vector>

#include "hopflab/operators.hpp"

namespace hopflab::detail {

/// F_rad(u'', u'/r) as an extremum of a u'' + b u'/r over coefficient pairs;
/// b already carries the tangential multiplicity n - 1.
struct RadialPolicies {
  std::vector<std::pair<double, double>> pairs;
  bool take_max = false;
};

RadialPolicies radial_policies(const OperatorSpec& spec);

/// (p^2 + delta^2)^(-alpha/2) and its derivative with respect to p^2.
inline double weight(double p2, double delta, double alpha) {
  if (alpha == 0.0) return 1.0;
  return std::pow(p2 + delta * delta, -alpha / 2.0);
}

inline double weight_dp2(double p2, double delta, double alpha) {
  if (alpha == 0.0) return 0.0;
  return -alpha / 2.0 * std::pow(p2 + delta * delta, -alpha / 2.0 - 1.0);
}

/// Squared gradient magnitude (D+^2 + D-^2) / 2 = u'^2 + O(h^2); nonzero at
/// discrete critical points with curvature, which keeps the weight bounded on
/// the grid scale. Derivatives with respect to u_{i-1}, u_i, u_{i+1}.
struct GradSq {
  double p2 = 0, d_lower = 0, d_diag = 0, d_upper = 0;
};

/// Stencil row (lower, diag, upper) and value of one frozen linear operator at node i.
struct Row {
  double lower = 0, diag = 0, upper = 0;
  double value = 0;
};

struct RadialStencil {
  RadialPolicies pol;
  Eigen::VectorXd r;
  double h = 0;
  bool ball = true;

  Row row(int i, std::size_t k, const Eigen::VectorXd& u) const {
    const auto [a, b] = pol.pairs[k];
    Row out;
    if (i == 0 && ball) {
      // Even extension: u'/r -> u''(0), u''(0) = 2 (u_1 - u_0) / h^2.
      const double c = 2.0 * (a + b) / (h * h);
      out.diag = -c;
      out.upper = c;
    } else {
      const double c = b / r[i];
      if (a / (h * h) >= c / (2 * h)) {
        out.lower = a / (h * h) - c / (2 * h);
        out.diag = -2 * a / (h * h);
        out.upper = a / (h * h) + c / (2 * h);
      } else {
        // Upwind the drift where the central stencil loses monotonicity.
        out.lower = a / (h * h);
        out.diag = -2 * a / (h * h) - c / h;
        out.upper = a / (h * h) + c / h;
      }
    }
    out.value = out.diag * u[i] + out.upper * u[i + 1] + (i > 0 ? out.lower * u[i - 1] : 0.0);
    return out;
  }

  /// Extremal row; ties go to the lowest index.
  Row active_row(int i, const Eigen::VectorXd& u) const {
    Row best = row(i, 0, u);
    for (std::size_t k = 1; k < pol.pairs.size(); ++k) {
      Row cand = row(i, k, u);
      if (pol.take_max ? cand.value > best.value : cand.value < best.value) best = cand;
    }
    return best;
  }

  GradSq grad_sq(int i, const Eigen::VectorXd& u) const {
    GradSq g;
    const double dp = (u[i + 1] - u[i]) / h;
    if (i == 0 && ball) {
      // Even extension: D- = -D+.
      g.p2 = dp * dp;
      g.d_upper = 2 * dp / h;
      g.d_diag = -2 * dp / h;
      return g;
    }
    const double dm = (u[i] - u[i - 1]) / h;
    g.p2 = 0.5 * (dp * dp + dm * dm);
    g.d_upper = dp / h;
    g.d_diag = (dm - dp) / h;
    g.d_lower = -dm / h;
    return g;
  }
};

}  // namespace hopflab::detail
