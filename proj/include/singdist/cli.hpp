#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace singdist::cli {

enum ExitCode : int { kOk = 0, kInputError = 1, kNotConverged = 2 };

struct StructureArgs {
  std::string pattern;  // Matrix Market pattern file
  std::string basis;    // directory with manifest.txt
  bool full = false;
};

struct SolverArgs {
  std::string beta;  // "", "scaled", "fro" or a positive number
  int multistart = 1;
  std::string multistart_mode = "full";
  std::optional<double> grad_tol;
  std::optional<double> inner_tol;
  int max_iters = 100;
  std::uint64_t seed = 0;
};

struct SolveArgs {
  std::string matrix;
  StructureArgs structure;
  SolverArgs solver;
  std::string out;
  std::string write_delta;
  std::string write_kernel;
};

struct GcdArgs {
  std::string builtin;  // "boito"
  std::string poly_file;
  std::optional<int> d;
  std::string sweep;  // "D1:D2"
  std::string write_poly;
  bool coefficients = false;
  SolverArgs solver;
  std::string out;
};

struct CertifyArgs {
  std::string matrix;
  std::string delta;
  std::string v;
  StructureArgs structure;
  std::optional<double> eps;
  double tol = 1e-6;
  std::string out;
};

/// Each command writes its JSON report to `out` (or `stdout_` when no file is
/// given) and returns an ExitCode. Input errors are thrown as InputError.
int cmd_solve(const SolveArgs& args, std::ostream& stdout_);
int cmd_gcd(const GcdArgs& args, std::ostream& stdout_);
int cmd_certify(const CertifyArgs& args, std::ostream& stdout_);

/// Parses argv and dispatches; maps exceptions to exit codes.
int run(int argc, char** argv);

}  // namespace singdist::cli
