#pragma once

#include <filesystem>
#include <string>

#include "singdist/solver.hpp"

namespace singdist::gcd {

/// Coefficients in ascending powers.
struct PolynomialPair {
  Vec p;
  Vec q;
  /// Factors applied by normalize(); 1 when the input was used as given.
  double gamma_p = 1.0;
  double gamma_q = 1.0;

  Index deg_p() const { return p.size() - 1; }
  Index deg_q() const { return q.size() - 1; }
};

/// Throws InputError for empty vectors, zero leading coefficients or
/// non-finite entries.
void validate(const PolynomialPair& pair);
/// Scales p and q to unit Euclidean norm, recording the factors.
PolynomialPair normalize(PolynomialPair pair);

/// p = γ_p Π (x − α_j), q = γ_q Π (x − α_j + 10⁻ʲ), α_j = (−1)ʲ j/2, j = 1..degree,
/// scaled to unit coefficient norm.
PolynomialPair make_test_polynomials(int degree = 10);
/// Ascending coefficients of Π (x − r_j), expanded in extended precision.
Vec expand_roots(const std::vector<long double>& roots);

/// Scaled Sylvester matrix [T_p/√(deg q−d+1), T_q/√(deg p−d+1)] and the basis
/// with one matrix per coefficient of p then q. A p̃ a + q̃ b product maps to
/// A_S [√(deg q−d+1)·a; √(deg p−d+1)·b].
struct SylvesterInstance {
  MatrixHandle A;
  LinearStructure structure;
  Index deg_p = 0;
  Index deg_q = 0;
  Index d = 0;
  Index cols_p = 0;  // columns of the p block, deg q − d + 1
  Index cols_q = 0;  // columns of the q block, deg p − d + 1
};

/// Throws InputError unless 1 ≤ d ≤ min(deg p, deg q).
SylvesterInstance build_sylvester(const PolynomialPair& pair, Index d);

struct Cofactors {
  bool extracted = false;
  std::string note;
  Vec g;
  Vec u;  // p̃ ≈ g·u
  Vec w;  // q̃ ≈ g·w
  double residual = 0.0;  // ‖(p̃ − g·u, q̃ − g·w)‖
};

struct GcdReport {
  Index d = 0;
  SolveResult result;
  double distance = 0.0;
  /// False when distance² < 1e-15: the value carries no accuracy claim.
  bool reliable = true;
  Vec p_tilde;
  Vec q_tilde;
  Cofactors cofactors;
};

/// Solves on the Sylvester instance. Solver exceptions propagate.
GcdReport gcd_distance(const PolynomialPair& pair, Index d, const SolverOptions& options = {});

Cofactors extract_cofactors(const SylvesterInstance& inst, const Vec& p_tilde, const Vec& q_tilde,
                            const Vec& v);

/// Ascending coefficients of a·b.
Vec convolve(const Vec& a, const Vec& b);

/// JSON {"p": [...], "q": [...]} or two whitespace-separated lines.
PolynomialPair read_polynomials(const std::filesystem::path& path);
void write_polynomials(const std::filesystem::path& path, const PolynomialPair& pair);

}  // namespace singdist::gcd
