#pragma once

#include <cstdint>
#include <vector>

#include "singdist/common.hpp"
#include "singdist/matrix.hpp"

namespace singdist {

struct SingularTriplet {
  double sigma = 0.0;
  Vec u;  // left, length rows
  Vec v;  // right, length cols
};

struct SvdOptions {
  /// Square sparse matrices with more columns than this go through
  /// shift-invert Lanczos; everything else is densified.
  Index dense_limit = 1500;
  double tol = 1e-13;
  Index max_subspace = 400;
  std::uint64_t seed = 0;
};

/// The K smallest singular triplets of A (rows >= cols), ascending in σ.
///
/// Dense inputs use a full SVD. Large sparse square inputs run Lanczos on
/// the inverse of the augmented matrix [[0, A], [Aᵀ, 0]] using a sparse LU of
/// A; its largest positive eigenvalues are 1/σ for the smallest σ.
/// Throws ConvergenceError when Lanczos stalls.
std::vector<SingularTriplet> smallest_singular_triplets(const MatrixHandle& a, Index k,
                                                        const SvdOptions& opts = {});

/// σ_max(A); Lanczos on AᵀA for large sparse inputs.
double largest_singular_value(const MatrixHandle& a, const SvdOptions& opts = {});

struct DenseSolveResult {
  Vec x;
  /// Reciprocal condition estimate of the LU factors (0 when singular).
  double rcond = 0.0;
  bool least_squares = false;
};

/// Solves M x = b. Falls back to the minimum-norm least-squares solution
/// when M is numerically singular (pivot threshold 1e-14·‖M‖).
DenseSolveResult solve_dense(const Mat& m, const Vec& b);

struct IterativeSolveResult {
  Vec x;
  double relative_residual = 0.0;
  int iterations = 0;
  bool converged = false;
  bool breakdown = false;
};

/// MINRES for symmetric (possibly indefinite) operators. Returns the last
/// iterate when max_iter is reached; that is not an error.
IterativeSolveResult solve_symmetric_iterative(const LinearOperator& op, const Vec& b, double tol,
                                               int max_iter);

/// Extreme eigenpairs of a symmetric operator by Lanczos with full
/// reorthogonalization. Returns the `count` algebraically largest pairs,
/// descending.
struct EigenPairs {
  Vec values;
  Mat vectors;
  double max_residual = 0.0;
};
EigenPairs lanczos_largest(const LinearOperator& op, Index count, double tol, Index max_subspace,
                           std::uint64_t seed);

}  // namespace singdist
