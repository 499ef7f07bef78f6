#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "hopflab/barrier.hpp"
#include "hopflab/cli.hpp"
#include "hopflab/freeboundary.hpp"
#include "hopflab/regularity.hpp"
#include "hopflab/report.hpp"
#include "hopflab/solver.hpp"
#include "hopflab/verify.hpp"

namespace hopflab::cli {

using Json = nlohmann::ordered_json;

namespace {

Json num(double x) {
  if (std::isfinite(x)) return x;
  return format_double(x);
}

Json nums(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(num(v[i]));
  return a;
}

std::string fmt(double x) { return format_double(x); }
std::string fmt(int x) { return std::to_string(x); }
std::string fmt(bool b) { return b ? "true" : "false"; }

Json report_json(const InequalityReport& r) { return Json::parse(to_json(r)); }

/// Everything an experiment produces. Every CSV row gets the config digest appended.
struct Artifacts {
  std::string digest;
  Json results = Json::object();
  std::vector<std::pair<std::string, CsvTable>> tables;
  std::vector<std::pair<std::string, std::string>> files;  // relative path, contents
  bool pass = true;
  bool diverged = false;
  std::vector<std::string> messages;

  CsvTable& table(const std::string& file, std::vector<std::string> header) {
    header.push_back("config_digest");
    tables.emplace_back(file, CsvTable(std::move(header)));
    return tables.back().second;
  }
  void row(CsvTable& t, std::vector<std::string> cells) {
    cells.push_back(digest);
    t.add_row(std::move(cells));
  }
};

void write_atomic(const std::filesystem::path& path, const std::string& contents) {
  std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::Configuration, "cannot write " + tmp.string());
    out << contents;
    if (!out) fail(ErrorKind::Configuration, "write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

// ---------------------------------------------------------------------------
// Shared config readers

SolverConfig read_solver(const ExperimentConfig& c, SolverConfig s = {}) {
  s.residual_tol = c.get_double("residual_tol", s.residual_tol);
  s.max_iters = c.get_int("max_iters", s.max_iters);
  s.delta_ladder = c.get_doubles("delta_ladder", s.delta_ladder);
  s.damping = c.get_double("damping", s.damping);
  s.validate();
  return s;
}

EllipticParams read_params(const ExperimentConfig& c, int n = 2, double lambda = 1.0, double Lambda = 1.0,
                           double alpha = 0.0) {
  EllipticParams p{c.get_int("n", n), c.get_double("lambda", lambda), c.get_double("Lambda", Lambda),
                   c.get_double("alpha", alpha)};
  p.validate();
  return p;
}

OperatorSpec make_operator(const std::string& name, const EllipticParams& p, double trace_coef) {
  if (name == "pucci_minus") return OperatorSpec::pucci_minus(p);
  if (name == "pucci_plus") return OperatorSpec::pucci_plus(p);
  if (name == "laplacian") return OperatorSpec::laplacian(p);
  if (name == "linear_trace") return OperatorSpec::linear_trace(trace_coef * Eigen::MatrixXd::Identity(p.n, p.n), p);
  if (name == "diagonal_bellman") return OperatorSpec::diagonal_bellman(p);
  fail(ErrorKind::Configuration,
       "unknown operator '" + name + "' (pucci_minus, pucci_plus, laplacian, linear_trace, diagonal_bellman)");
}

/// f(r) = sum_k a_k r^k
std::function<double(double)> polynomial(const std::vector<double>& a) {
  return [a](double r) {
    double acc = 0.0;
    for (auto it = a.rbegin(); it != a.rend(); ++it) acc = acc * r + *it;
    return acc;
  };
}

Eigen::VectorXd parse_point(const std::string& key, const std::string& item, int dim) {
  std::vector<double> xs;
  std::size_t start = 0;
  while (true) {
    const std::size_t colon = item.find(':', start);
    const std::string part = item.substr(start, colon == std::string::npos ? std::string::npos : colon - start);
    char* end = nullptr;
    const double v = std::strtod(part.c_str(), &end);
    if (part.empty() || end != part.c_str() + part.size())
      fail(ErrorKind::Configuration, "key '" + key + "': bad point '" + item + "' (use x:y[:z])");
    xs.push_back(v);
    if (colon == std::string::npos) break;
    start = colon + 1;
  }
  if (int(xs.size()) != dim)
    fail(ErrorKind::Configuration, "key '" + key + "': point '" + item + "' must have " + std::to_string(dim) + " coordinates");
  return Eigen::Map<Eigen::VectorXd>(xs.data(), dim);
}

std::vector<Eigen::VectorXd> read_points(const ExperimentConfig& c, const std::string& key,
                                         const std::vector<Eigen::VectorXd>& fallback, int dim) {
  if (!c.has(key)) {
    c.get_string(key, "");
    return fallback;
  }
  std::vector<Eigen::VectorXd> out;
  for (const auto& item : c.get_strings(key, {})) out.push_back(parse_point(key, item, dim));
  return out;
}

// Closed-form test fields for the regularity experiments.
struct Field {
  ScalarField u;
  VectorField grad;
};

Field make_field(const std::string& name, int dim, double field_gamma) {
  if (name == "quadratic")
    return {[](const Eigen::VectorXd& x) { return x.squaredNorm(); },
            [](const Eigen::VectorXd& x) { return Eigen::VectorXd(2.0 * x); }};
  if (name == "affine") {
    Eigen::VectorXd a(dim);
    for (int i = 0; i < dim; ++i) a[i] = 0.5 * (i + 1) * (i % 2 ? -1.0 : 1.0);
    return {[a](const Eigen::VectorXd& x) { return 1.0 + a.dot(x); }, [a](const Eigen::VectorXd&) { return a; }};
  }
  if (name == "power") {
    require(field_gamma > 0.0 && field_gamma <= 1.0, "field_gamma must lie in (0, 1]");
    const double g = field_gamma;
    return {[g](const Eigen::VectorXd& x) { return std::pow(x.norm(), 1.0 + g); },
            [g](const Eigen::VectorXd& x) {
              const double r = x.norm();
              return r == 0.0 ? Eigen::VectorXd(Eigen::VectorXd::Zero(x.size()))
                              : Eigen::VectorXd((1.0 + g) * std::pow(r, g - 1.0) * x);
            }};
  }
  if (name == "smooth") {
    require(dim >= 2, "field 'smooth' needs n >= 2");
    return {[](const Eigen::VectorXd& x) { return std::sin(x[0]) * std::cos(x[1]); },
            [](const Eigen::VectorXd& x) {
              Eigen::VectorXd g = Eigen::VectorXd::Zero(x.size());
              g[0] = std::cos(x[0]) * std::cos(x[1]);
              g[1] = -std::sin(x[0]) * std::sin(x[1]);
              return g;
            }};
  }
  fail(ErrorKind::Configuration, "unknown field '" + name + "' (quadratic, affine, power, smooth)");
}

// ---------------------------------------------------------------------------
// Experiments

void barrier_certify(const ExperimentConfig& c, Artifacts& a) {
  const auto dims = c.get_ints("n", {2, 3, 5});
  const auto pairs = c.get_strings("pairs", {"1:1", "1:2", "0.5:4"});
  const auto alphas = c.get_doubles("alpha", {0.0, 1.0, 2.0});
  const int samples = c.get_int("samples", 10000);
  const double tol = c.get_double("tol", 1e-10);
  const double M = c.get_double("M", 1.0), R = c.get_double("R", 1.0);
  std::vector<std::pair<double, double>> ell;
  for (const auto& p : pairs) {
    const Eigen::VectorXd v = parse_point("pairs", p, 2);
    ell.emplace_back(v[0], v[1]);
  }
  c.reject_unknown();

  auto& t = a.table("barrier.csv", {"n", "lambda", "Lambda", "alpha", "beta", "c0", "pucci_lower", "A1", "A2", "A3",
                                    "A4", "min_margin", "samples", "pass"});
  Json certs = Json::array();
  int failed = 0;
  for (int n : dims)
    for (const auto& [lam, Lam] : ell)
      for (double al : alphas) {
        BarrierSpec s;
        s.M = M;
        s.R = R;
        s.params = EllipticParams{n, lam, Lam, al};
        s.validate();
        const BarrierCertificate cert = certify_barrier(s, samples, tol);
        const auto& m = cert.margins;
        const double min_margin =
            std::min({m.pucci, m.lower_sandwich, m.upper_sandwich, m.grad_lower, m.grad_upper, m.boundary});
        const auto& k = cert.constants;
        a.row(t, {fmt(n), fmt(lam), fmt(Lam), fmt(al), fmt(k.beta), fmt(k.c0), fmt(k.pucci_lower), fmt(k.A1),
                  fmt(k.A2), fmt(k.A3), fmt(k.A4), fmt(min_margin), fmt(cert.samples), fmt(cert.pass)});
        std::ostringstream name;
        name << "certificates/barrier_n" << n << "_l" << fmt(lam) << "_L" << fmt(Lam) << "_a" << fmt(al) << ".json";
        a.files.emplace_back(name.str(), to_json(cert) + "\n");
        certs.push_back(name.str());
        if (!cert.pass) {
          ++failed;
          a.messages.push_back("barrier certificate failed (" + cert.failed_property + ") for " + name.str());
        }
      }
  a.pass = failed == 0;
  a.results["certificates"] = certs;
  a.results["failed"] = failed;
}

void solve(const ExperimentConfig& c, Artifacts& a) {
  const EllipticParams p = read_params(c);
  const OperatorSpec spec = make_operator(c.get_string("operator", "laplacian"), p, c.get_double("trace_coef", 1.0));
  const std::string scheme = c.get_string("scheme", "radial");
  const auto rhs = polynomial(c.get_doubles("rhs", {0.0}));
  const double R = c.get_double("R", 1.0);
  const double outer = c.get_double("outer_value", 0.0);
  const int m = c.get_int("grid_m", scheme == "radial" ? 257 : 33);
  const SolverConfig sc = read_solver(c);

  if (scheme == "radial") {
    RadialProblem prob;
    prob.spec = spec;
    prob.R = R;
    prob.r_inner = c.get_double("r_inner", 0.0);
    prob.inner_value = c.get_double("inner_value", 0.0);
    prob.rhs = rhs;
    prob.outer_value = outer;
    c.reject_unknown();
    const RadialSolution sol = solve_radial(prob, sc, m);
    const RadialFunction res = residual(prob, sol.u, sol.delta_final);
    auto& t = a.table("solution.csv", {"r", "u", "residual"});
    for (int i = 0; i < m; ++i) a.row(t, {fmt(sol.u.grid.node(i)), fmt(sol.u.values[i]), fmt(res.values[i])});
    a.results["operator"] = spec.name();
    a.results["converged"] = sol.converged;
    a.results["residual"] = num(sol.residual_norm);
    a.results["iterations"] = sol.iterations;
    a.results["delta_final"] = num(sol.delta_final);
    a.results["field_digest"] = field_digest(sol.u.values);
    a.results["diagnostics"] = sol.diagnostics;
    a.diverged = !sol.converged;
  } else if (scheme == "wide-stencil") {
    require(p.n == 2, "wide-stencil scheme needs n = 2");
    PlanarProblem prob;
    prob.spec = spec;
    prob.R = R;
    prob.rhs = [rhs](const Eigen::Vector2d& x) { return rhs(x.norm()); };
    prob.boundary = [outer](const Eigen::Vector2d&) { return outer; };
    const int dirs = c.get_int("directions", 8);
    c.reject_unknown();
    const PlanarSolution sol = solve_2d_wide_stencil(prob, sc, m, dirs);
    auto& t = a.table("solution.csv", {"x", "y", "u"});
    for (int k = 0; k < sol.u.size(); ++k) {
      if (!sol.u.grid.in_disk(k)) continue;
      const Eigen::Vector2d x = sol.u.grid.point(k);
      a.row(t, {fmt(x.x()), fmt(x.y()), fmt(sol.u.values[k])});
    }
    a.results["operator"] = spec.name();
    a.results["converged"] = sol.converged;
    a.results["residual"] = num(sol.residual_norm);
    a.results["iterations"] = sol.iterations;
    a.results["field_digest"] = field_digest(sol.u.values);
    a.results["diagnostics"] = sol.diagnostics;
    a.diverged = !sol.converged;
  } else {
    fail(ErrorKind::Configuration, "unknown scheme '" + scheme + "' (radial, wide-stencil)");
  }
}

void convergence(const ExperimentConfig& c, Artifacts& a) {
  const auto ops = c.get_strings("operators", {"pucci_minus", "linear_trace", "pucci_plus"});
  const auto alphas = c.get_doubles("alpha", {0.0, 2.0, 1.0});
  require(ops.size() == alphas.size(), "operators and alpha lists must have equal length (one case per pair)");
  const int n = c.get_int("n", 2);
  const double lambda = c.get_double("lambda", 1.0), Lambda = c.get_double("Lambda", 2.0);
  const double coef = c.get_double("trace_coef", 1.5);
  const int levels = c.get_int("levels", 4);
  const int m0 = c.get_int("grid_m", 129);
  const double min_slope = c.get_double("min_slope", 1.5), max_error = c.get_double("max_error", 1e-4);
  const SolverConfig sc = read_solver(c);
  c.reject_unknown();

  auto& t = a.table("convergence.csv", {"operator", "alpha", "m", "h", "max_error", "converged", "residual"});
  auto& s = a.table("slopes.csv", {"operator", "alpha", "slope", "finest_error", "pass"});
  Json cases = Json::array();
  for (std::size_t k = 0; k < ops.size(); ++k) {
    const EllipticParams p{n, lambda, Lambda, alphas[k]};
    p.validate();
    const OperatorSpec spec = make_operator(ops[k], p, coef);
    const ConvergenceStudy st = convergence_study(spec, ManufacturedRadial::standard(), sc, m0, levels);
    for (const auto& lv : st.levels)
      a.row(t, {spec.name(), fmt(alphas[k]), fmt(lv.m), fmt(lv.h), fmt(lv.max_error), fmt(lv.converged),
                fmt(lv.residual)});
    const double finest = st.levels.back().max_error;
    const bool ok = st.slope >= min_slope && finest <= max_error;
    a.row(s, {spec.name(), fmt(alphas[k]), fmt(st.slope), fmt(finest), fmt(ok)});
    cases.push_back(Json{{"operator", spec.name()}, {"alpha", alphas[k]}, {"slope", num(st.slope)},
                         {"finest_error", num(finest)}, {"converged", st.all_converged}, {"pass", ok}});
    a.pass = a.pass && ok;
    a.diverged = a.diverged || !st.all_converged;
  }
  a.results["manufactured"] = "exp(-r^2) + cos(2 r)/2";
  a.results["min_slope"] = min_slope;
  a.results["max_error"] = max_error;
  a.results["cases"] = cases;
}

SweepConfig read_sweep(const ExperimentConfig& c) {
  SweepConfig s;
  s.runs = c.get_int("runs", s.runs);
  s.seed = c.get_uint("seed", s.seed);
  s.dims = c.get_ints("n", s.dims);
  s.alphas = c.get_doubles("alpha", s.alphas);
  s.epsilons = c.get_doubles("epsilon", s.epsilons);
  s.scales = c.get_doubles("scales", s.scales);
  s.lambda = c.get_double("lambda", s.lambda);
  s.Lambda = c.get_double("Lambda", s.Lambda);
  s.boundary_min = c.get_double("boundary_min", s.boundary_min);
  s.boundary_max = c.get_double("boundary_max", s.boundary_max);
  s.rhs_max = c.get_double("rhs_max", s.rhs_max);
  s.A2 = c.get_double("A2", s.A2);
  s.grid_m = c.get_int("grid_m", s.grid_m);
  s.solver = read_solver(c);
  s.validate();
  return s;
}

void sweep(const ExperimentConfig& c, Artifacts& a, SweepSummary (*run)(const SweepConfig&)) {
  const SweepConfig s = read_sweep(c);
  c.reject_unknown();
  const SweepSummary sum = run(s);
  std::vector<std::string> header = ledger_header();
  for (const char* extra : {"member", "scale_spread", "converged"}) header.push_back(extra);
  auto& t = a.table("ledger.csv", header);
  // per (name, alpha) maxima over dimensions, members and epsilons
  std::map<std::pair<std::string, double>, double> maxima;
  for (const auto& r : sum.rows) {
    a.row(t, {r.name, fmt(r.n), fmt(s.lambda), fmt(s.Lambda), fmt(r.alpha), std::isnan(r.epsilon) ? "" : fmt(r.epsilon),
              fmt(r.constant), fmt(r.pass), std::to_string(s.seed), fmt(r.grid_m), fmt(r.residual), fmt(r.member),
              fmt(r.scale_spread), fmt(r.converged)});
    auto& mx = maxima[{r.name, r.alpha}];
    mx = std::max(mx, r.constant);
  }
  Json per_alpha = Json::array();
  for (const auto& [key, v] : maxima)
    per_alpha.push_back(Json{{"name", key.first}, {"alpha", key.second}, {"max_constant", num(v)}});
  a.results["rows"] = sum.rows.size();
  a.results["diverged"] = sum.diverged;
  a.results["per_alpha_max"] = per_alpha;
  a.results["notes"] = sum.notes;
  a.pass = sum.pass;
  a.diverged = sum.diverged > 0;
}

void counterexample(const ExperimentConfig& c, Artifacts& a) {
  const auto dims = c.get_ints("n", {2, 3, 5});
  const int m = c.get_int("grid_m", 1025);
  c.reject_unknown();
  auto& t = a.table("counterexample.csv", {"n", "laplacian_at_half", "max_laplacian_large_grad", "discrete_mismatch",
                                           "grad_at_half", "dnu", "quotient_slope", "max_quotient_error",
                                           "boundary_value", "min_value", "pass"});
  auto& q = a.table("quotients.csv", {"n", "t", "quotient"});
  Json reports = Json::array();
  for (int n : dims) {
    const CounterexampleAudit au = counterexample_audit(n, m);
    a.row(t, {fmt(n), fmt(au.laplacian_at_half), fmt(au.max_laplacian_large_grad), fmt(au.discrete_mismatch),
              fmt(au.grad_at_half), fmt(au.dnu.estimate), fmt(au.quotient_slope), fmt(au.max_quotient_error),
              fmt(au.boundary_value), fmt(au.min_value), fmt(au.report.pass)});
    for (std::size_t k = 0; k < au.dnu.offsets.size(); ++k)
      a.row(q, {fmt(n), fmt(au.dnu.offsets[k]), fmt(au.dnu.quotients[k])});
    reports.push_back(report_json(au.report));
    a.pass = a.pass && au.report.pass;
  }
  a.results["audits"] = reports;
}

void flame(const ExperimentConfig& c, Artifacts& a) {
  const auto alphas = c.get_doubles("alpha", {0.0, 1.0});
  const int n = c.get_int("n", 2);
  const double lambda = c.get_double("lambda", 1.0), Lambda = c.get_double("Lambda", 1.0);
  const std::string op = c.get_string("operator", "laplacian");
  const double coef = c.get_double("trace_coef", 1.0);
  FlameProblem base;
  base.epsilons = c.get_doubles("epsilon", base.epsilons);
  base.R = c.get_double("R", base.R);
  base.outer_value = c.get_double("outer_value", base.outer_value);
  base.grid_m = c.get_int("grid_m", base.grid_m);
  const std::string beta = c.get_string("beta", "bump");
  if (beta == "bump") base.beta = ReactionProfile::standard_bump();
  else if (beta == "zero") base.beta = ReactionProfile::zero();
  else fail(ErrorKind::Configuration, "unknown beta '" + beta + "' (bump, zero)");
  const double f = c.get_double("f", 0.0);
  base.rhs = [f](double) { return f; };
  SolverConfig defaults;
  defaults.residual_tol = 1e-6;
  const bool custom_ladder = c.has("delta_ladder");
  const SolverConfig sc = read_solver(c, defaults);
  c.reject_unknown();

  auto& t = a.table("flame.csv", {"alpha", "epsilon", "sup_u", "lip_norm", "beta_sup", "f_sup", "measured_C",
                                  "fb_quotient_max", "u_center", "sharp_case", "lip_quarter", "sharp_C", "converged",
                                  "residual"});
  Json sweeps = Json::array();
  for (double al : alphas) {
    const EllipticParams p{n, lambda, Lambda, al};
    p.validate();
    FlameProblem prob = base;
    prob.spec = make_operator(op, p, coef);
    SolverConfig s = sc;
    if (al > 0.0 && !custom_ladder) s.delta_ladder = {1e-1, 3e-2};
    const FlameSweep fs = flame_sweep(prob, s);
    for (const auto& r : fs.rows)
      a.row(t, {fmt(al), fmt(r.epsilon), fmt(r.sup_u), fmt(r.lip_norm), fmt(r.beta_sup), fmt(r.f_sup),
                fmt(r.measured_C), fmt(r.fb_quotient_max), fmt(r.u_center), fmt(r.sharp_case), fmt(r.lip_quarter),
                fmt(r.sharp_C), fmt(r.converged), fmt(r.residual)});
    sweeps.push_back(Json{{"alpha", al}, {"slope", num(fs.slope)}, {"slope_limit", kFlameSlopeLimit},
                          {"sharp_rows", fs.sharp_rows}, {"sharp_slope", num(fs.sharp_slope)},
                          {"all_converged", fs.all_converged}, {"pass", fs.pass}, {"notes", fs.notes}});
    a.pass = a.pass && fs.pass;
    a.diverged = a.diverged || !fs.all_converged;
  }
  a.results["operator"] = op;
  a.results["sweeps"] = sweeps;
}

void fb_check(const ExperimentConfig& c, Artifacts& a) {
  const EllipticParams p = read_params(c);
  const OperatorSpec spec = make_operator(c.get_string("operator", "laplacian"), p, c.get_double("trace_coef", 1.0));
  const std::string profile = c.get_string("profile", "planar");
  const double hb = c.get_double("h", 1.0);
  const double offset = c.get_double("offset", 0.3);
  const int m = c.get_int("grid_m", profile == "planar" ? 129 : 2049);
  const double tol = c.get_double("tol", kCheckTolerance);
  c.reject_unknown();
  require(hb >= 0.0, "h must be >= 0");

  FBProblem prob;
  prob.spec = spec;
  prob.h = hb;
  FBReport rep;
  if (profile == "planar") {
    // u = h (offset - x1)+, f = 0
    const CartesianGrid2D g(1.0, m);
    const PlanarFunction u = sample(g, [&](const Eigen::Vector2d& x) { return hb * std::max(offset - x.x(), 0.0); });
    rep = fb_lipschitz_check(prob, u, tol);
    a.results["profile"] = "h (offset - x1)+";
  } else if (profile == "radial") {
    // u = h (r - offset)+ solves |u'|^alpha F(D^2 u) = f with f = h^alpha F(0, h/r) on {r > offset}
    require(offset > 0.0 && offset < 1.0, "radial profile needs 0 < offset < 1");
    const RadialGrid g(0.0, 1.0, m, p.n);
    const RadialFunction u = sample(g, [&](double r) { return hb * std::max(r - offset, 0.0); });
    prob.f_sup = std::pow(hb, p.alpha) * std::abs(radial_operator(spec, 0.0, hb / offset));
    rep = fb_lipschitz_check(prob, u, tol);
    a.results["profile"] = "h (r - offset)+";
  } else {
    fail(ErrorKind::Configuration, "unknown profile '" + profile + "' (planar, radial)");
  }
  auto& t = a.table("fb.csv", {"profile", "h", "free_boundary_pairs", "quotient_max", "lip_norm", "sup_positive",
                               "f_sup", "measured_C", "near_origin", "sharp_C", "discretization_tol", "pass"});
  a.row(t, {profile, fmt(hb), fmt(rep.free_boundary_pairs), fmt(rep.quotient_max), fmt(rep.lip_norm),
            fmt(rep.sup_positive), fmt(prob.f_sup), fmt(rep.measured_C), fmt(rep.near_origin), fmt(rep.sharp_C),
            fmt(rep.discretization_tol), fmt(rep.report.pass)});
  a.results["report"] = report_json(rep.report);
  a.pass = rep.report.pass;
}

void glue_test(const ExperimentConfig& c, Artifacts& a) {
  const int cases = c.get_int("cases", 200);
  const std::uint64_t seed = c.get_uint("seed", 1);
  const int m = c.get_int("grid_m", 49);
  const double eta = c.get_double("eta", 1e-3), s = c.get_double("s", 0.1), rel = c.get_double("rel_tol", 1e-8);
  c.reject_unknown();
  const GluePropertyReport rep = glue_property_test(cases, seed, m, eta, s, rel);
  auto& t = a.table("glue.csv", {"case", "v_zero", "equality_error", "pass"});
  for (const auto& gc : rep.cases) a.row(t, {fmt(gc.index), fmt(gc.v_zero), fmt(gc.equality_error), fmt(gc.pass)});
  a.results["cases"] = cases;
  a.results["failures"] = rep.failures;
  a.results["max_equality_error"] = num(rep.max_equality_error);
  for (const auto& gc : rep.cases)
    if (!gc.pass) a.messages.push_back("glue case " + std::to_string(gc.index) + ": " + gc.notes);
  a.pass = rep.pass;
}

void campanato(const ExperimentConfig& c, Artifacts& a) {
  const int n = c.get_int("n", 2);
  require(n >= 1 && n <= 3, "n must be 1, 2 or 3");
  const double gamma = c.get_double("gamma", 1.0);
  const Field fld = make_field(c.get_string("field", "quadratic"), n, c.get_double("field_gamma", gamma));
  std::vector<Eigen::VectorXd> def_centers{Eigen::VectorXd::Zero(n)};
  if (n >= 2) {
    Eigen::VectorXd c1 = Eigen::VectorXd::Zero(n), c2 = Eigen::VectorXd::Zero(n);
    c1[0] = 0.2, c1[1] = -0.1, c2[0] = -0.3, c2[1] = 0.25;
    def_centers.push_back(c1);
    def_centers.push_back(c2);
  }
  const auto centers = read_points(c, "centers", def_centers, n);
  const auto radii = c.get_doubles("radii", {0.5, 0.25, 0.125, 0.0625});
  const int per_radius = c.get_int("per_radius", 6);
  const auto x0 = read_points(c, "x0", {Eigen::VectorXd::Zero(n)}, n);
  const int k_max = c.get_int("k_max", 10);
  c.reject_unknown();

  const CampanatoReport rep = campanato_seminorm(fld.u, Ball::origin(n, 1.0), gamma, centers, radii, per_radius);
  std::vector<std::string> hdr;
  for (int i = 0; i < n; ++i) hdr.push_back("center_" + std::to_string(i + 1));
  for (const char* h : {"rho", "fit_error", "scaled", "samples"}) hdr.push_back(h);
  auto& t = a.table("campanato.csv", hdr);
  for (const auto& s : rep.scales) {
    std::vector<std::string> row;
    for (int i = 0; i < n; ++i) row.push_back(fmt(s.center[i]));
    for (auto v : {fmt(s.rho), fmt(s.fit_error), fmt(s.scaled), fmt(s.samples)}) row.push_back(v);
    a.row(t, row);
  }
  hdr = {"x0_index", "k", "r_k"};
  for (int i = 0; i < n; ++i) hdr.push_back("p_" + std::to_string(i + 1));
  for (const char* h : {"c_k", "fit_error", "dp", "dp_bound", "dc", "dc_bound"}) hdr.push_back(h);
  auto& d = a.table("dyadic.csv", hdr);
  Json dy = Json::array();
  for (std::size_t j = 0; j < x0.size(); ++j) {
    const DyadicExpansion de = dyadic_expansion(fld.u, x0[j], gamma, k_max);
    for (const auto& s : de.steps) {
      std::vector<std::string> row{fmt(int(j)), fmt(s.k), fmt(s.r)};
      for (int i = 0; i < n; ++i) row.push_back(fmt(s.p[i]));
      for (auto v : {fmt(s.c), fmt(s.fit_error), fmt(s.dp), fmt(s.dp_bound), fmt(s.dc), fmt(s.dc_bound)})
        row.push_back(v);
      a.row(d, row);
    }
    dy.push_back(Json{{"x0", nums(x0[j])}, {"gradient", nums(de.gradient)},
                      {"exact_gradient", nums(fld.grad(x0[j]))}, {"c_limit", num(de.c_limit)},
                      {"value_gap", num(de.value_gap)}, {"A", num(de.A)}, {"remainder", num(de.remainder)},
                      {"pass", de.pass}, {"notes", de.notes}});
    a.pass = a.pass && de.pass;
  }
  a.results["A"] = num(rep.A);
  a.results["truncated"] = rep.truncated;
  a.results["campanato_notes"] = rep.notes;
  a.results["dyadic"] = dy;
}

void constants_check(const ExperimentConfig& c, Artifacts& a) {
  const int n = c.get_int("n", 2);
  require(n >= 1 && n <= 3, "n must be 1, 2 or 3");
  const std::string field = c.get_string("field", "quadratic");
  const double fg = c.get_double("field_gamma", 1.0);
  const Field fld = make_field(field, n, fg);
  const double rho = c.get_double("rho", 0.5), sigma = c.get_double("sigma", 0.5), R = c.get_double("R", 1.0);
  const std::string om = c.get_string("omega", "power");
  ModulusOfContinuity omega;
  if (om == "power") {
    omega = ModulusOfContinuity::power(c.get_double("omega_gamma", 1.0));
  } else if (om == "tabulated") {
    omega = ModulusOfContinuity::tabulated(c.get_doubles("omega_t", {}), c.get_doubles("omega_w", {}));
  } else {
    fail(ErrorKind::Configuration, "unknown omega '" + om + "' (power, tabulated)");
  }
  const double T = c.get_double("T", 1.0);
  const int per_radius = c.get_int("per_radius", 8);
  const double tol = c.get_double("tol", 1e-9);
  c.reject_unknown();

  const C1OmegaReport rep = c1omega_constants_check(fld.u, fld.grad, n, rho, sigma, R, omega, T, per_radius, tol);
  auto& t = a.table("constants.csv", {"check", "lhs", "rhs", "pass"});
  Json checks = Json::array();
  for (const auto& r : rep.checks) {
    a.row(t, {r.name, fmt(r.lhs), fmt(r.rhs), fmt(r.pass)});
    checks.push_back(report_json(r));
  }
  a.results["field"] = field;
  a.results["hypothesis_T"] = num(rep.hypothesis_T);
  a.results["sup_u"] = num(rep.sup_u);
  a.results["S"] = num(rep.S);
  a.results["checks"] = checks;
  a.pass = rep.pass;
}

using Runner = std::function<void(const ExperimentConfig&, Artifacts&)>;

const std::vector<std::pair<std::string, Runner>>& registry() {
  static const std::vector<std::pair<std::string, Runner>> r{
      {"barrier-certify", barrier_certify},
      {"solve", solve},
      {"convergence", convergence},
      {"harnack-sweep", [](const ExperimentConfig& c, Artifacts& a) { sweep(c, a, harnack_sweep); }},
      {"weak-harnack-sweep", [](const ExperimentConfig& c, Artifacts& a) { sweep(c, a, weak_harnack_sweep); }},
      {"hopf-sweep", [](const ExperimentConfig& c, Artifacts& a) { sweep(c, a, hopf_sweep); }},
      {"counterexample", counterexample},
      {"flame-sweep", flame},
      {"fb-check", fb_check},
      {"glue-test", glue_test},
      {"campanato", campanato},
      {"constants-check", constants_check},
  };
  return r;
}

std::string valid_names() {
  std::string s;
  for (const auto& n : experiment_names()) s += (s.empty() ? "" : ", ") + n;
  return s;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& [n, r] : registry()) v.push_back(n);
    return v;
  }();
  return names;
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::CheckFailed:
      return kExitCheckFailed;
    case ErrorKind::Divergence:
    case ErrorKind::NumericalDegeneracy:
      return kExitDivergence;
    case ErrorKind::InvalidArgument:
    case ErrorKind::Configuration:
      return kExitUsage;
  }
  return kExitUsage;
}

int run_config(ExperimentConfig config, const std::filesystem::path& out_dir, std::ostream& log,
               const std::vector<std::string>& argv) {
  const auto& reg = registry();
  const auto it = std::find_if(reg.begin(), reg.end(), [&](const auto& e) { return e.first == config.experiment; });
  if (it == reg.end()) {
    log << "hopf-lab: unknown experiment '" << config.experiment << "'; valid experiments: " << valid_names() << "\n";
    return kExitUsage;
  }
  Artifacts art;
  art.digest = config.digest();
  const auto started = std::chrono::steady_clock::now();
  int code = kExitPass;
  std::string error;
  try {
    // every experiment accepts a seed; the sweeps and the glue test consume it
    config.get_uint("seed", 0);
    it->second(config, art);
    code = !art.pass ? kExitCheckFailed : (art.diverged ? kExitDivergence : kExitPass);
  } catch (const Error& e) {
    code = exit_code_for(e.kind());
    error = e.what();
  }
  if (code == kExitUsage) {
    log << "hopf-lab: " << error << "\n";
    return code;
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

  Json summary;
  summary["experiment"] = config.experiment;
  summary["config_digest"] = art.digest;
  Json cfg = Json::object();
  for (const auto& [k, v] : config.entries()) cfg[k] = v;
  summary["config"] = cfg;
  summary["pass"] = code == kExitPass;
  summary["exit_code"] = code;
  if (!error.empty()) summary["error"] = error;
  Json outputs = Json::array();
  for (const auto& [name, t] : art.tables) outputs.push_back(name);
  for (const auto& [name, body] : art.files) outputs.push_back(name);
  summary["outputs"] = outputs;
  summary["messages"] = art.messages;
  summary["results"] = art.results;

  for (const auto& [name, t] : art.tables) write_atomic(out_dir / name, t.str());
  for (const auto& [name, body] : art.files) write_atomic(out_dir / name, body);
  write_atomic(out_dir / "summary.json", summary.dump(2) + "\n");
  Json meta;
  meta["tool"] = "hopf-lab";
  meta["experiment"] = config.experiment;
  meta["config_digest"] = art.digest;
  meta["created_utc"] = utc_timestamp();
  meta["wall_seconds"] = seconds;
  meta["argv"] = argv;
  write_atomic(out_dir / "metadata.json", meta.dump(2) + "\n");

  const std::string where = (out_dir / "summary.json").string();
  if (code == kExitPass) log << config.experiment << ": pass (" << where << ")\n";
  else if (code == kExitCheckFailed) log << config.experiment << ": check failed, see " << where << "\n";
  else log << config.experiment << ": solver divergence" << (error.empty() ? "" : ": " + error) << ", see " << where << "\n";
  for (const auto& m : art.messages) log << "  " << m << "\n";
  return code;
}

int run(const RunRequest& req, std::ostream& log) {
  ExperimentConfig cfg;
  try {
    cfg = ExperimentConfig::load(req.config_path);
  } catch (const Error& e) {
    log << "hopf-lab: " << e.what() << "\n";
    return kExitUsage;
  }
  if (req.subcommand != "run") {
    if (!cfg.experiment.empty() && cfg.experiment != req.subcommand) {
      log << "hopf-lab: config names experiment '" << cfg.experiment << "' but subcommand is '" << req.subcommand
          << "'\n";
      return kExitUsage;
    }
    cfg.experiment = req.subcommand;
  } else if (cfg.experiment.empty()) {
    log << "hopf-lab: config has no `experiment` key; valid experiments: " << valid_names() << "\n";
    return kExitUsage;
  }
  if (req.seed) cfg.set("seed", std::to_string(*req.seed));
  return run_config(std::move(cfg), req.out_dir, log, req.argv);
}

}  // namespace hopflab::cli
