#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "singdist/linalg.hpp"

namespace singdist {

namespace {

Vec random_unit(Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  Vec x(n);
  for (Index i = 0; i < n; ++i) x[i] = gauss(rng);
  return x.normalized();
}

}  // namespace

EigenPairs lanczos_largest(const LinearOperator& op, Index count, double tol, Index max_subspace,
                           std::uint64_t seed) {
  const Index n = op.rows;
  if (!op.symmetric) throw std::invalid_argument("lanczos_largest: operator must be symmetric");
  if (count <= 0 || count > n) throw DimensionError("lanczos_largest: bad eigenpair count");
  const Index cap = std::min(n, std::max(max_subspace, count + 2));

  std::mt19937_64 rng(seed);
  Mat q(n, cap + 1);
  Vec alpha(cap), beta(cap);
  q.col(0) = random_unit(n, rng);

  EigenPairs out;
  double residual = std::numeric_limits<double>::infinity();
  for (Index j = 0; j < cap; ++j) {
    Vec w = op.apply(q.col(j));
    alpha[j] = q.col(j).dot(w);
    w -= alpha[j] * q.col(j);
    if (j > 0) w -= beta[j - 1] * q.col(j - 1);
    // Two passes of classical Gram–Schmidt against the whole basis.
    for (int pass = 0; pass < 2; ++pass) {
      w -= q.leftCols(j + 1) * (q.leftCols(j + 1).transpose() * w);
    }
    beta[j] = w.norm();

    const Index dim = j + 1;
    const bool invariant = beta[j] <= 1e-14 * std::max(1.0, std::abs(alpha[j]));
    if (dim >= count && (invariant || dim % 5 == 0 || dim == cap)) {
      Mat t = Mat::Zero(dim, dim);
      for (Index i = 0; i < dim; ++i) {
        t(i, i) = alpha[i];
        if (i + 1 < dim) t(i, i + 1) = t(i + 1, i) = beta[i];
      }
      Eigen::SelfAdjointEigenSolver<Mat> eig(t);
      const Vec& theta = eig.eigenvalues();  // ascending
      const double scale = std::max(theta.cwiseAbs().maxCoeff(), 1e-300);
      residual = 0.0;
      for (Index k = 0; k < count; ++k) {
        const Index idx = dim - 1 - k;
        residual = std::max(residual, std::abs(beta[j] * eig.eigenvectors()(dim - 1, idx)) / scale);
      }
      if (residual <= tol || invariant || dim == n) {
        out.values.resize(count);
        out.vectors.resize(n, count);
        for (Index k = 0; k < count; ++k) {
          const Index idx = dim - 1 - k;
          out.values[k] = theta[idx];
          out.vectors.col(k) = (q.leftCols(dim) * eig.eigenvectors().col(idx)).normalized();
        }
        out.max_residual = residual;
        if (residual <= tol || dim == n) return out;
        // Invariant subspace found before convergence: restart orthogonally.
      }
    }
    if (invariant) {
      Vec r = random_unit(n, rng);
      for (int pass = 0; pass < 2; ++pass) r -= q.leftCols(j + 1) * (q.leftCols(j + 1).transpose() * r);
      beta[j] = 0.0;
      q.col(j + 1) = r.normalized();
    } else {
      q.col(j + 1) = w / beta[j];
    }
  }
  throw ConvergenceError("Lanczos did not converge within the subspace limit", residual);
}

}  // namespace singdist
