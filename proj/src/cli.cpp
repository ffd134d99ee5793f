#include "singdist/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "singdist/gcd.hpp"
#include "singdist/matrix_market.hpp"
#include "singdist/oracle.hpp"
#include "singdist/report.hpp"
#include "singdist/solver.hpp"

namespace singdist::cli {

namespace {

using report::Json;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

LinearStructure load_structure(const StructureArgs& s, const MatrixHandle& a, Json& desc) {
  const int given = !s.pattern.empty() + !s.basis.empty() + s.full;
  if (given > 1) throw InputError("--pattern, --basis and --full are mutually exclusive");
  if (!s.basis.empty()) {
    desc = {{"kind", "basis"}, {"source", s.basis}};
    return LinearStructure(mm::read_basis(s.basis));
  }
  if (!s.pattern.empty()) {
    desc = {{"kind", "pattern"}, {"source", s.pattern}};
    return LinearStructure(mm::read_pattern(s.pattern));
  }
  if (s.full) {
    desc = {{"kind", "full"}};
    return LinearStructure::full(a.rows(), a.cols());
  }
  desc = {{"kind", "pattern"}, {"source", "pattern(A)"}};
  return LinearStructure(SparsityPattern::of_matrix(a));
}

SolverOptions solver_options(const SolverArgs& a, Json& echo) {
  SolverOptions o;
  if (a.beta.empty() || a.beta == "scaled") {
    echo["beta"] = "scaled";
  } else if (a.beta == "fro") {
    o.beta_rule = BetaRule::Frobenius;
    echo["beta"] = "fro";
  } else {
    std::size_t used = 0;
    double b = 0.0;
    try {
      b = std::stod(a.beta, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != a.beta.size()) throw InputError("--beta expects a number, 'scaled' or 'fro'");
    o.beta = b;
    echo["beta"] = b;
  }
  if (a.multistart_mode == "cheap") o.multistart_mode = MultistartMode::Cheap;
  else if (a.multistart_mode != "full") throw InputError("--multistart-mode expects 'full' or 'cheap'");
  o.multistart_K = a.multistart;
  o.grad_tol = a.grad_tol;
  if (a.inner_tol) o.inner_tol = *a.inner_tol;
  o.max_newton_iters = a.max_iters;
  o.seed = a.seed;
  echo["multistart"] = a.multistart;
  echo["multistart_mode"] = a.multistart_mode;
  echo["max_iters"] = a.max_iters;
  echo["seed"] = a.seed;
  echo["inner_tol"] = o.inner_tol;
  if (a.grad_tol) echo["grad_tol"] = *a.grad_tol;
  return o;
}

void emit(const Json& j, const std::string& path, std::ostream& out, const std::string& summary) {
  const std::string text = report::dump(j);
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(path);
  if (!f) throw InputError("cannot write '" + path + "'");
  f << text;
  out << summary << '\n';
}

std::string fmt(const char* spec, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, x);
  return buf;
}

// ‖Π_S X − X‖_F, without densifying sparse X on a pattern.
double structure_residual(const LinearStructure& s, const MatrixHandle& x) {
  if (s.kind() == StructureKind::Full) return 0.0;
  if (const SparsityPattern* pat = s.pattern(); pat && x.is_sparse()) {
    double outside = 0.0;
    const SparseCSR& m = x.sparse();
    for (Index i = 0; i < m.outerSize(); ++i)
      for (SparseCSR::InnerIterator it(m, i); it; ++it)
        if (!pat->position(i, it.col())) outside += it.value() * it.value();
    return std::sqrt(outside);
  }
  const Mat d = x.to_dense();
  return (s.project(d) - d).norm();
}

}  // namespace

int cmd_solve(const SolveArgs& args, std::ostream& out) {
  const auto t0 = Clock::now();
  MatrixHandle a = mm::read_matrix(args.matrix);
  if (a.rows() != a.cols()) throw InputError("matrix must be square");
  Json structure_desc;
  LinearStructure s = load_structure(args.structure, a, structure_desc);
  Json echo;
  SolverOptions opts = solver_options(args.solver, echo);
  structure_desc["dimension"] = s.dimension();

  const ProblemInstance problem(std::move(a), std::move(s), opts);
  SolveResult result;
  try {
    result = solve(problem);
  } catch (const AllStartsFailed& e) {
    result = e.best();
  }

  if (!args.write_delta.empty() && result.delta.rows() > 0) mm::write_matrix(args.write_delta, result.delta);
  if (!args.write_kernel.empty() && result.v.size() > 0) mm::write_vector(args.write_kernel, result.v);

  Json j = report::solve_json(result);
  j["schema"] = report::kSchema;
  j["command"] = "solve";
  j["input"] = {{"file", args.matrix},
                {"rows", problem.rows()},
                {"cols", problem.cols()},
                {"nnz", problem.A().nnz()},
                {"norm_fro", problem.norm_A()},
                {"a_in_structure", problem.a_in_structure()},
                {"structure", structure_desc}};
  j["options"] = echo;
  j["wall_time_seconds"] = seconds_since(t0);
  emit(j, args.out, out,
       std::string(to_string(result.status)) + " distance=" + fmt("%.10e", result.distance) +
           " iterations=" + std::to_string(result.iterations));
  return result.converged() ? kOk : kNotConverged;
}

int cmd_gcd(const GcdArgs& args, std::ostream& out) {
  const auto t0 = Clock::now();
  if (args.builtin.empty() == args.poly_file.empty()) {
    throw InputError("give exactly one of --builtin boito or a polynomial file");
  }
  gcd::PolynomialPair pair;
  Json input;
  if (!args.builtin.empty()) {
    if (args.builtin != "boito") throw InputError("unknown builtin '" + args.builtin + "'");
    pair = gcd::make_test_polynomials(10);
    input["source"] = "builtin:boito";
  } else {
    pair = gcd::read_polynomials(args.poly_file);
    input["source"] = args.poly_file;
  }
  input["deg_p"] = pair.deg_p();
  input["deg_q"] = pair.deg_q();
  if (!args.write_poly.empty()) gcd::write_polynomials(args.write_poly, pair);

  std::vector<int> degrees;
  if (!args.sweep.empty()) {
    if (args.d) throw InputError("--d and --sweep are mutually exclusive");
    int d1 = 0, d2 = 0;
    char extra = 0;
    if (std::sscanf(args.sweep.c_str(), "%d:%d%c", &d1, &d2, &extra) != 2) {
      throw InputError("--sweep expects D1:D2");
    }
    for (int d = d1;; d += d1 <= d2 ? 1 : -1) {
      degrees.push_back(d);
      if (d == d2) break;
    }
  } else if (args.d) {
    degrees.push_back(*args.d);
  } else {
    throw InputError("give --d or --sweep");
  }
  for (int d : degrees) {
    if (d < 1 || d > std::min(pair.deg_p(), pair.deg_q())) {
      throw InputError("GCD degree " + std::to_string(d) + " out of range");
    }
  }

  Json echo;
  const SolverOptions opts = solver_options(args.solver, echo);
  Json rows = Json::array();
  std::string table = "   d         distance  iterations  status                 reliable\n";
  bool all_ok = true;
  for (int d : degrees) {
    gcd::GcdReport rep;
    try {
      rep = gcd::gcd_distance(pair, d, opts);
    } catch (const AllStartsFailed& e) {
      rep.d = d;
      rep.result = e.best();
      rep.distance = rep.result.distance;
      rep.reliable = false;
    }
    all_ok = all_ok && rep.result.converged();
    rows.push_back(report::gcd_json(rep, args.coefficients));
    char line[160];
    std::snprintf(line, sizeof line, "%4d  %15.4e  %10d  %-21s  %s\n", d, rep.distance, rep.result.iterations,
                  to_string(rep.result.status), rep.reliable ? "yes" : "no (below machine precision)");
    table += line;
  }
  Json j{{"schema", report::kSchema},
         {"command", "gcd"},
         {"input", input},
         {"options", echo},
         {"results", rows},
         {"wall_time_seconds", seconds_since(t0)}};
  emit(j, args.out, out, table.substr(0, table.size() - 1));
  return all_ok ? kOk : kNotConverged;
}

int cmd_certify(const CertifyArgs& args, std::ostream& out) {
  MatrixHandle a = mm::read_matrix(args.matrix);
  const MatrixHandle delta = mm::read_matrix(args.delta);
  const Vec v = mm::read_vector(args.v);
  if (delta.rows() != a.rows() || delta.cols() != a.cols()) throw InputError("Delta and A differ in shape");
  if (v.size() != a.cols()) throw InputError("v length does not match A");
  if (v.norm() == 0.0) throw InputError("v is zero");
  Json structure_desc;
  LinearStructure s = load_structure(args.structure, a, structure_desc);
  const ProblemInstance problem(std::move(a), std::move(s));

  const double outside = structure_residual(problem.S(), delta);
  const bool in_structure = outside <= 1e-10;
  const oracle::Certificate c =
      oracle::certify_point(problem, v.normalized(), delta.frobenius_norm(), args.eps, args.tol);
  const bool passed = in_structure && c.passed;
  Json j{{"schema", report::kSchema},
         {"command", "certify"},
         {"input", {{"matrix", args.matrix}, {"delta", args.delta}, {"v", args.v}, {"structure", structure_desc}}},
         {"structure_residual", outside},
         {"in_structure", in_structure},
         {"certificate", report::certificate_json(c)},
         {"passed", passed}};
  emit(j, args.out, out,
       std::string(passed ? "PASS" : "FAIL") + " grad=" + fmt("%.3e", c.grad_norm) + " f_gap=" + fmt("%.3e", c.f_gap) +
           " structure_residual=" + fmt("%.3e", outside));
  return passed ? kOk : kNotConverged;
}

namespace {

void add_structure_flags(CLI::App* app, StructureArgs& s) {
  app->add_option("--pattern", s.pattern, "Matrix Market pattern file for S")->check(CLI::ExistingFile);
  app->add_option("--basis", s.basis, "directory with manifest.txt listing an orthonormal basis of S")
      ->check(CLI::ExistingDirectory);
  app->add_flag("--full", s.full, "unstructured perturbations");
}

void add_solver_flags(CLI::App* app, SolverArgs& a) {
  app->add_option("--beta", a.beta, "penalty: a positive number, 'scaled' (default) or 'fro' for ||A||_F");
  app->add_option("--multistart", a.multistart, "number of starting values K")->check(CLI::PositiveNumber);
  app->add_option("--multistart-mode", a.multistart_mode, "full or cheap");
  app->add_option("--grad-tol", a.grad_tol, "absolute stopping tolerance on ||G_beta||");
  app->add_option("--inner-tol", a.inner_tol, "MINRES relative tolerance");
  app->add_option("--max-iters", a.max_iters, "Newton iteration budget")->check(CLI::NonNegativeNumber);
  app->add_option("--seed", a.seed, "seed for randomized kernels");
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Structured distance to singularity"};
  app.require_subcommand(1);

  SolveArgs solve_args;
  auto* solve_cmd = app.add_subcommand("solve", "nearest singular matrix with the perturbation in S");
  solve_cmd->add_option("matrix", solve_args.matrix, "Matrix Market file")->required();
  add_structure_flags(solve_cmd, solve_args.structure);
  add_solver_flags(solve_cmd, solve_args.solver);
  solve_cmd->add_option("--out", solve_args.out, "write the JSON report here");
  solve_cmd->add_option("--write-delta", solve_args.write_delta, "write Delta (Matrix Market)");
  solve_cmd->add_option("--write-kernel", solve_args.write_kernel, "write the unit kernel vector v");

  GcdArgs gcd_args;
  auto* gcd_cmd = app.add_subcommand("gcd", "approximate GCD distance through the Sylvester matrix");
  gcd_cmd->add_option("poly", gcd_args.poly_file, "polynomial file (JSON or two coefficient lines)");
  gcd_cmd->add_option("--builtin", gcd_args.builtin, "built-in pair: boito");
  gcd_cmd->add_option("--d", gcd_args.d, "GCD degree");
  gcd_cmd->add_option("--sweep", gcd_args.sweep, "degree range D1:D2");
  gcd_cmd->add_option("--write-poly", gcd_args.write_poly, "write the (normalized) pair");
  gcd_cmd->add_flag("--coefficients", gcd_args.coefficients, "include perturbed coefficients and cofactors");
  add_solver_flags(gcd_cmd, gcd_args.solver);
  gcd_cmd->add_option("--out", gcd_args.out, "write the JSON report here");

  CertifyArgs cert_args;
  auto* cert_cmd = app.add_subcommand("certify", "check a candidate (Delta, v) with the variable-projection oracle");
  cert_cmd->add_option("matrix", cert_args.matrix, "Matrix Market file for A")->required();
  cert_cmd->add_option("delta", cert_args.delta, "Matrix Market file for Delta")->required();
  cert_cmd->add_option("v", cert_args.v, "Matrix Market file for the kernel vector")->required();
  add_structure_flags(cert_cmd, cert_args.structure);
  cert_cmd->add_option("--eps", cert_args.eps, "regularization (default 1e-10*||A||_F^2)");
  cert_cmd->add_option("--tol", cert_args.tol, "certification tolerance");
  cert_cmd->add_option("--out", cert_args.out, "write the JSON report here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInputError;
  }

  try {
    if (*solve_cmd) return cmd_solve(solve_args, std::cout);
    if (*gcd_cmd) return cmd_gcd(gcd_args, std::cout);
    return cmd_certify(cert_args, std::cout);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const DimensionError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const ConvergenceError& e) {
    std::cerr << "error: " << e.what() << " (achieved " << e.achieved() << ")\n";
    return kNotConverged;
  }
}

}  // namespace singdist::cli
