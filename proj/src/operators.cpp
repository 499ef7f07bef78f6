#include "hopflab/operators.hpp"

#include <algorithm>
#include <limits>
#include <random>

namespace hopflab {

namespace {

void check_coefficient(const Eigen::MatrixXd& A, const EllipticParams& p) {
  require(A.rows() == p.n && A.cols() == p.n, "coefficient matrix must be n x n");
  require((A - A.transpose()).cwiseAbs().maxCoeff() <= kSymmetryTolerance, "coefficient matrix must be symmetric");
}

double trace_product(const Eigen::MatrixXd& A, const Eigen::MatrixXd& X) { return (A.cwiseProduct(X)).sum(); }

}  // namespace

OperatorSpec OperatorSpec::linear_trace(Eigen::MatrixXd A, const EllipticParams& p) {
  p.validate();
  check_coefficient(A, p);
  return {LinearTraceOp{std::move(A)}, p};
}

OperatorSpec OperatorSpec::laplacian(const EllipticParams& p) {
  return linear_trace(Eigen::MatrixXd::Identity(p.n, p.n), p);
}

OperatorSpec OperatorSpec::bellman_min(std::vector<Eigen::MatrixXd> family, const EllipticParams& p) {
  p.validate();
  require(!family.empty(), "BellmanMin: coefficient family must be nonempty");
  for (const auto& A : family) check_coefficient(A, p);
  return {BellmanMinOp{std::move(family)}, p};
}

OperatorSpec OperatorSpec::diagonal_bellman(const EllipticParams& p) {
  p.validate();
  std::vector<Eigen::MatrixXd> family;
  const int count = 1 << p.n;
  for (int mask = 0; mask < count; ++mask) {
    Eigen::VectorXd d(p.n);
    for (int i = 0; i < p.n; ++i) d[i] = (mask >> i) & 1 ? p.Lambda : p.lambda;
    family.emplace_back(d.asDiagonal());
  }
  return {BellmanMinOp{std::move(family)}, p};
}

std::string OperatorSpec::name() const {
  struct Namer {
    std::string operator()(const PucciMinusOp&) const { return "PucciMinus"; }
    std::string operator()(const PucciPlusOp&) const { return "PucciPlus"; }
    std::string operator()(const LinearTraceOp&) const { return "LinearTrace"; }
    std::string operator()(const BellmanMinOp&) const { return "BellmanMin"; }
  };
  return std::visit(Namer{}, kind);
}

double apply_operator(const OperatorSpec& spec, const Eigen::MatrixXd& X) {
  const auto& p = spec.params;
  require(X.rows() == p.n && X.cols() == p.n, "apply_operator: matrix order must equal n");
  struct Eval {
    const EllipticParams& p;
    const Eigen::MatrixXd& X;
    double operator()(const PucciMinusOp&) const { return pucci_minus(X, p); }
    double operator()(const PucciPlusOp&) const { return pucci_plus(X, p); }
    double operator()(const LinearTraceOp& op) const {
      symmetric_eigenvalues(X);  // symmetry gate only
      return trace_product(op.A, X);
    }
    double operator()(const BellmanMinOp& op) const {
      require(!op.family.empty(), "BellmanMin: empty coefficient family");
      symmetric_eigenvalues(X);
      double best = std::numeric_limits<double>::infinity();
      for (const auto& A : op.family) best = std::min(best, trace_product(A, X));
      return best;
    }
  };
  return std::visit(Eval{p, X}, spec.kind);
}

double degenerate_operator(const OperatorSpec& spec, const Eigen::VectorXd& grad, const Eigen::MatrixXd& X) {
  require(grad.size() == spec.params.n, "degenerate_operator: gradient length must equal n");
  const double norm = grad.norm();
  require(std::isfinite(norm), "degenerate_operator: gradient must be finite");
  const double alpha = spec.params.alpha;
  const double F = apply_operator(spec, X);
  if (alpha == 0.0) return F;
  if (norm == 0.0) return 0.0;
  return std::pow(norm, alpha) * F;
}

EllipticityReport check_ellipticity(const OperatorSpec& spec, int sample_count, std::uint64_t seed, double tol) {
  require(sample_count >= 1, "check_ellipticity: sample_count must be >= 1");
  const auto& p = spec.params;
  const int n = p.n;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  auto random_symmetric = [&] {
    Eigen::MatrixXd B(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) B(i, j) = gauss(rng);
    return Eigen::MatrixXd((B + B.transpose()) / 2.0);
  };

  EllipticityReport report;
  report.samples = sample_count;
  report.worst_margin = std::numeric_limits<double>::infinity();
  auto record = [&](double slack, const char* what, const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y) {
    const double scale = 1.0 + X.cwiseAbs().maxCoeff() + Y.cwiseAbs().maxCoeff();
    const double margin = slack / scale;
    if (margin < report.worst_margin) {
      report.worst_margin = margin;
      report.worst_property = what;
      report.witness_X = X;
      report.witness_Y = Y;
    }
  };

  auto probe_pair = [&](const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y) {
    const double diff = apply_operator(spec, X) - apply_operator(spec, Y);
    const Eigen::MatrixXd D = X - Y;
    record(diff - pucci_minus(D, p), "M-(X-Y) <= F(X)-F(Y)", X, Y);
    record(pucci_plus(D, p) - diff, "F(X)-F(Y) <= M+(X-Y)", X, Y);
  };
  auto probe_monotone = [&](const Eigen::MatrixXd& X, const Eigen::MatrixXd& N) {
    const double diff = apply_operator(spec, X + N) - apply_operator(spec, X);
    const double tr = N.trace();
    record(diff - p.lambda * tr, "lambda Tr N <= F(X+N)-F(X)", X, N);
    record(p.Lambda * tr - diff, "F(X+N)-F(X) <= Lambda Tr N", X, N);
  };

  // Deterministic rank-one probes catch coefficient matrices with an eigenvalue
  // outside [lambda, Lambda] along a coordinate axis.
  const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    Eigen::MatrixXd E = Eigen::MatrixXd::Zero(n, n);
    E(i, i) = 1.0;
    probe_monotone(zero, E);
    probe_pair(E, zero);
    probe_pair(zero, E);
  }
  for (int s = 0; s < sample_count; ++s) {
    const Eigen::MatrixXd X = random_symmetric();
    const Eigen::MatrixXd Y = random_symmetric();
    probe_pair(X, Y);
    Eigen::MatrixXd B(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) B(i, j) = gauss(rng);
    probe_monotone(X, B * B.transpose());
  }
  report.pass = report.worst_margin >= -tol;
  return report;
}

}  // namespace hopflab
