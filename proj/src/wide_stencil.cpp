#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "hopflab/solver.hpp"

namespace hopflab {
namespace {

/// c * D_v with D_v u = (u(x + v h) - 2 u(x) + u(x - v h)) / (|v|^2 h^2).
struct DirectionalTerm {
  int dx = 0, dy = 0;
  double coef = 0;
};
using PlanarPolicy = std::vector<DirectionalTerm>;

struct PlanarPolicies {
  std::vector<PlanarPolicy> candidates;
  bool take_max = false;
  int reach = 1;  // max |v|, rounded up
};

std::vector<std::pair<Eigen::Vector2i, Eigen::Vector2i>> frames(int directions) {
  std::vector<std::pair<Eigen::Vector2i, Eigen::Vector2i>> out{
      {{1, 0}, {0, 1}},
      {{1, 1}, {-1, 1}},
  };
  if (directions == 8) {
    out.push_back({{2, 1}, {-1, 2}});
    out.push_back({{1, 2}, {-2, 1}});
  } else if (directions != 4) {
    fail(ErrorKind::InvalidArgument, "solve_2d_wide_stencil: directions must be 4 or 8");
  }
  return out;
}

PlanarPolicy linear_policy(const Eigen::MatrixXd& A) {
  if (A.rows() != 2 || A.cols() != 2) fail(ErrorKind::InvalidArgument, "wide stencil: coefficient matrix must be 2x2");
  const double a12 = 0.5 * (A(0, 1) + A(1, 0));
  const double c = std::abs(a12);
  if (A(0, 0) < c || A(1, 1) < c)
    fail(ErrorKind::Configuration, "wide stencil: coefficient matrix is not diagonally dominant (no monotone 4-direction split)");
  PlanarPolicy p{{1, 0, A(0, 0) - c}, {0, 1, A(1, 1) - c}};
  if (c > 0) p.push_back({1, a12 > 0 ? 1 : -1, 2 * c});
  return p;
}

PlanarPolicies planar_policies(const OperatorSpec& spec, int directions) {
  if (spec.params.n != 2) fail(ErrorKind::InvalidArgument, "solve_2d_wide_stencil: spec dimension must be 2");
  PlanarPolicies out;
  const auto fr = frames(directions);
  const auto& p = spec.params;
  auto pucci = [&](bool take_max) {
    out.take_max = take_max;
    for (const auto& [v1, v2] : fr)
      for (double a1 : {p.lambda, p.Lambda})
        for (double a2 : {p.lambda, p.Lambda}) out.candidates.push_back({{v1.x(), v1.y(), a1}, {v2.x(), v2.y(), a2}});
  };
  if (std::holds_alternative<PucciMinusOp>(spec.kind)) {
    pucci(false);
  } else if (std::holds_alternative<PucciPlusOp>(spec.kind)) {
    pucci(true);
  } else if (const auto* lt = std::get_if<LinearTraceOp>(&spec.kind)) {
    out.candidates.push_back(linear_policy(lt->A));
  } else {
    const auto& fam = std::get<BellmanMinOp>(spec.kind).family;
    if (fam.empty()) fail(ErrorKind::InvalidArgument, "BellmanMin: empty coefficient family");
    for (const auto& A : fam) out.candidates.push_back(linear_policy(A));
  }
  double reach = 1.0;
  for (const auto& c : out.candidates)
    for (const auto& t : c) reach = std::max(reach, std::hypot(double(t.dx), double(t.dy)));
  out.reach = int(std::ceil(reach - 1e-12));
  return out;
}

double weight(double p2, double delta, double alpha) {
  return alpha == 0.0 ? 1.0 : std::pow(p2 + delta * delta, -alpha / 2.0);
}

struct PlanarScheme {
  CartesianGrid2D grid;
  PlanarPolicies pol;
  std::vector<int> unknown_of;  // node -> unknown index, -1 otherwise
  std::vector<int> node_of;     // unknown -> node

  PlanarScheme(const CartesianGrid2D& g, const OperatorSpec& spec, int directions)
      : grid(g), pol(planar_policies(spec, directions)) {
    unknown_of.assign(grid.size(), -1);
    for (int k = 0; k < grid.size(); ++k)
      if (grid.in_disk(k) && !grid.is_boundary(k, pol.reach)) {
        unknown_of[k] = int(node_of.size());
        node_of.push_back(k);
      }
  }

  int shift(int k, int dx, int dy) const { return k + dy * grid.m + dx; }

  double value(const PlanarPolicy& p, const Eigen::VectorXd& u, int k) const {
    const double h2 = grid.spacing() * grid.spacing();
    double v = 0;
    for (const auto& t : p)
      v += t.coef * (u[shift(k, t.dx, t.dy)] - 2 * u[k] + u[shift(k, -t.dx, -t.dy)]) / ((t.dx * t.dx + t.dy * t.dy) * h2);
    return v;
  }

  int active(const Eigen::VectorXd& u, int k, double* out) const {
    int best = 0;
    double bv = value(pol.candidates[0], u, k);
    for (int c = 1; c < int(pol.candidates.size()); ++c) {
      const double v = value(pol.candidates[c], u, k);
      if (pol.take_max ? v > bv : v < bv) {
        bv = v;
        best = c;
      }
    }
    *out = bv;
    return best;
  }

  Eigen::Vector2d gradient(const Eigen::VectorXd& u, int k) const {
    const double h = grid.spacing();
    return {(u[shift(k, 1, 0)] - u[shift(k, -1, 0)]) / (2 * h), (u[shift(k, 0, 1)] - u[shift(k, 0, -1)]) / (2 * h)};
  }
};

}  // namespace

PlanarSolution solve_2d_wide_stencil(const PlanarProblem& problem, const SolverConfig& config, int m, int directions) {
  config.validate();
  problem.spec.params.validate();
  require(problem.R > 0.0, "solve_2d_wide_stencil: R must be positive");
  require(m >= 5 && m % 2 == 1, "solve_2d_wide_stencil: m must be odd and >= 5");
  const CartesianGrid2D grid(problem.R, m);
  const PlanarScheme scheme(grid, problem.spec, directions);
  const int N = int(scheme.node_of.size());
  require(N > 0, "solve_2d_wide_stencil: grid too coarse, no interior nodes");
  const double alpha = problem.spec.params.alpha;
  const double h = grid.spacing();

  Eigen::VectorXd u = Eigen::VectorXd::Zero(grid.size());
  Eigen::VectorXd f = Eigen::VectorXd::Zero(grid.size());
  double boundary_mean = 0;
  int boundary_count = 0;
  for (int k = 0; k < grid.size(); ++k) {
    if (!grid.in_disk(k)) continue;
    const Eigen::Vector2d x = grid.point(k);
    f[k] = problem.rhs(x);
    require(std::isfinite(f[k]), "solve_2d_wide_stencil: right-hand side must be finite");
    if (scheme.unknown_of[k] < 0) {
      u[k] = problem.boundary(x);
      require(std::isfinite(u[k]), "solve_2d_wide_stencil: boundary data must be finite");
      boundary_mean += u[k];
      ++boundary_count;
    }
  }
  boundary_mean /= std::max(boundary_count, 1);
  for (int k : scheme.node_of) u[k] = boundary_mean;

  struct Eval {
    Eigen::VectorXd G;
    double merit = 0, residual = 0;  // merit = |G|_2^2
  };
  auto evaluate = [&](double delta) {
    Eval e;
    e.G.resize(N);
    for (int q = 0; q < N; ++q) {
      const int k = scheme.node_of[q];
      double L;
      scheme.active(u, k, &L);
      const double w = weight(scheme.gradient(u, k).squaredNorm(), delta, alpha);
      e.G[q] = L - f[k] * w;
      e.merit += e.G[q] * e.G[q];
      e.residual = std::max(e.residual, std::abs(L / w - f[k]));
    }
    return e;
  };

  PlanarSolution sol;
  std::vector<double> ladder = config.delta_ladder;
  if (alpha == 0.0) ladder = {config.delta_ladder.back()};
  std::ostringstream diag;
  Eigen::VectorXd previous_level;
  bool all_converged = true;
  const double h2 = h * h;

  for (double delta : ladder) {
    Eval cur = evaluate(delta);
    bool level_converged = cur.residual <= config.residual_tol;
    int stagnant = 0;
    for (int it = 0; it < config.max_iters && !level_converged; ++it) {
      std::vector<Eigen::Triplet<double>> trip;
      trip.reserve(std::size_t(N) * 9);
      auto add = [&](int q, int node, double c) {
        const int col = scheme.unknown_of[node];
        if (col >= 0) trip.emplace_back(q, col, c);
      };
      for (int q = 0; q < N; ++q) {
        const int k = scheme.node_of[q];
        double L;
        const int c = scheme.active(u, k, &L);
        for (const auto& t : scheme.pol.candidates[c]) {
          const double s = t.coef / ((t.dx * t.dx + t.dy * t.dy) * h2);
          add(q, scheme.shift(k, t.dx, t.dy), s);
          add(q, scheme.shift(k, -t.dx, -t.dy), s);
          add(q, k, -2 * s);
        }
        if (alpha != 0.0 && f[k] != 0.0) {
          const Eigen::Vector2d g = scheme.gradient(u, k);
          const double base = -alpha * std::pow(g.squaredNorm() + delta * delta, -alpha / 2.0 - 1.0);
          // d(-f w)/d g_i = -f * base * g_i; d g_x / d u_{x +- h e1} = +-1/(2h)
          const double cx = -f[k] * base * g.x() / (2 * h);
          const double cy = -f[k] * base * g.y() / (2 * h);
          add(q, scheme.shift(k, 1, 0), cx);
          add(q, scheme.shift(k, -1, 0), -cx);
          add(q, scheme.shift(k, 0, 1), cy);
          add(q, scheme.shift(k, 0, -1), -cy);
        }
      }
      Eigen::SparseMatrix<double> J(N, N);
      J.setFromTriplets(trip.begin(), trip.end());
      Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
      lu.analyzePattern(J);
      lu.factorize(J);
      if (lu.info() != Eigen::Success) {
        diag << "singular policy matrix at delta=" << delta << "; ";
        break;
      }
      const Eigen::VectorXd step = lu.solve(-cur.G);
      if (!step.allFinite()) {
        diag << "linear solve failed at delta=" << delta << "; ";
        break;
      }
      const Eigen::VectorXd base = u;
      double theta = config.damping;
      Eval trial;
      for (int ls = 0;; ++ls) {
        for (int q = 0; q < N; ++q) u[scheme.node_of[q]] = base[scheme.node_of[q]] + theta * step[q];
        trial = evaluate(delta);
        if (alpha == 0.0 || trial.merit < cur.merit || ls >= 30) break;
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
  }
  sol.converged = all_converged && sol.residual_norm <= config.residual_tol;
  if (!sol.converged && diag.str().empty()) diag << "no convergence within max_iters";
  sol.diagnostics = diag.str();
  sol.u = PlanarFunction(grid, u);
  return sol;
}

PlanarFunction residual(const PlanarProblem& problem, const PlanarFunction& u, int directions, double delta) {
  const PlanarScheme scheme(u.grid, problem.spec, directions);
  const double alpha = problem.spec.params.alpha;
  Eigen::VectorXd res = Eigen::VectorXd::Zero(u.size());
  for (int k : scheme.node_of) {
    double L;
    scheme.active(u.values, k, &L);
    const double p2 = scheme.gradient(u.values, k).squaredNorm() + delta * delta;
    const double factor = alpha == 0.0 ? 1.0 : (p2 == 0.0 ? 0.0 : std::pow(p2, alpha / 2.0));
    res[k] = factor * L - problem.rhs(u.grid.point(k));
  }
  return {u.grid, res};
}

}  // namespace hopflab
