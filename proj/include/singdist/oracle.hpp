#pragma once

#include <optional>

#include "singdist/solver.hpp"

namespace singdist::oracle {

/// Regularized variable-projection objective at a unit vector v:
///   f_ε(v) = min_δ ‖δ‖² + ε⁻¹‖(A + Σ δₖP⁽ᵏ⁾)v‖² = rᵀ(MMᵀ + εI)⁻¹r,  r = −Av.
struct OracleEval {
  double f_value = 0.0;
  Vec u;      // (MMᵀ + εI)⁻¹ r
  Vec delta;  // δ* = Mᵀu
  MatrixHandle Delta;
  Vec grad_v;  // (A+Δ)ᵀu
  /// Smallest diagonal entry of MMᵀ; below ε the point is near a rank drop of M(v).
  double min_gram_diag = 0.0;
};

/// Throws InputError for ε ≤ 0 or |‖v‖ − 1| > 1e-10.
OracleEval evaluate(const ProblemInstance& p, const Vec& v, double eps);

struct Certificate {
  double eps = 0.0;
  double tol = 0.0;
  double f_value = 0.0;
  double distance = 0.0;
  double grad_norm = 0.0;
  double f_gap = 0.0;  // |f_ε(v) − distance²|
  double min_gram_diag = 0.0;
  bool rank_drop = false;  // min_gram_diag < ε
  bool passed = false;
};

/// Defaults: ε = 1e-10·‖A‖_F², tol = 1e-6. Passes when ‖grad_v‖ ≤ tol and
/// |f_ε − distance²| ≤ tol·(1 + distance²). Never throws on failure.
Certificate certify_point(const ProblemInstance& p, const Vec& v, double distance,
                          std::optional<double> eps = std::nullopt, double tol = 1e-6);
Certificate certify_solution(const ProblemInstance& p, const SolveResult& result,
                             std::optional<double> eps = std::nullopt, double tol = 1e-6);

}  // namespace singdist::oracle
