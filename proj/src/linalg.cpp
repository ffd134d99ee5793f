#include "singdist/linalg.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/LU>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <Eigen/SparseLU>

namespace singdist {

namespace {

// Sign gauge: the largest-magnitude entry of v is positive.
void fix_sign(SingularTriplet& t) {
  Index idx = 0;
  t.v.cwiseAbs().maxCoeff(&idx);
  if (t.v[idx] < 0) {
    t.u = -t.u;
    t.v = -t.v;
  }
}

std::vector<SingularTriplet> dense_smallest(const Mat& a, Index k) {
  Eigen::BDCSVD<Mat> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Index n = a.cols();
  std::vector<SingularTriplet> out;
  out.reserve(static_cast<std::size_t>(k));
  for (Index i = 0; i < k; ++i) {
    const Index idx = n - 1 - i;
    SingularTriplet t{svd.singularValues()[idx], svd.matrixU().col(idx), svd.matrixV().col(idx)};
    fix_sign(t);
    out.push_back(std::move(t));
  }
  return out;
}

bool use_sparse_path(const MatrixHandle& a, const SvdOptions& opts) {
  return a.is_sparse() && a.rows() == a.cols() && a.cols() > opts.dense_limit;
}

}  // namespace

std::vector<SingularTriplet> smallest_singular_triplets(const MatrixHandle& a, Index k,
                                                        const SvdOptions& opts) {
  if (a.rows() < a.cols()) throw DimensionError("singular triplets need rows >= cols");
  if (k <= 0 || k > a.cols()) throw DimensionError("singular triplet count out of range");
  if (!use_sparse_path(a, opts)) return dense_smallest(a.to_dense(), k);

  const Index n = a.cols();
  Eigen::SparseMatrix<double> acol = a.sparse();
  acol.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(acol);
  if (lu.info() != Eigen::Success) {
    throw ConvergenceError("sparse LU failed (matrix numerically singular)", 0.0);
  }
  LinearOperator inv_aug{2 * n, 2 * n,
                         [&](const Vec& z) {
                           Vec out(2 * n);
                           out.head(n) = lu.transpose().solve(z.tail(n));
                           out.tail(n) = lu.solve(z.head(n));
                           return out;
                         },
                         true};
  EigenPairs eig = lanczos_largest(inv_aug, k, opts.tol, opts.max_subspace, opts.seed);

  const double anorm = a.frobenius_norm();
  std::vector<SingularTriplet> out;
  for (Index i = 0; i < k; ++i) {
    if (!(eig.values[i] > 0)) throw ConvergenceError("shift-invert Lanczos returned a nonpositive Ritz value", eig.max_residual);
    SingularTriplet t;
    t.u = eig.vectors.col(i).head(n).normalized();
    t.v = eig.vectors.col(i).tail(n).normalized();
    t.sigma = t.u.dot(a.multiply(t.v));
    if (t.sigma < 0) {
      t.sigma = -t.sigma;
      t.u = -t.u;
    }
    const double res = std::max((a.multiply(t.v) - t.sigma * t.u).norm(),
                                (a.multiply_transpose(t.u) - t.sigma * t.v).norm());
    if (res > 1e-10 * anorm) throw ConvergenceError("singular triplet residual above 1e-10*||A||", res);
    fix_sign(t);
    out.push_back(std::move(t));
  }
  std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) { return x.sigma < y.sigma; });
  return out;
}

double largest_singular_value(const MatrixHandle& a, const SvdOptions& opts) {
  if (!(a.is_sparse() && std::min(a.rows(), a.cols()) > opts.dense_limit)) {
    Eigen::BDCSVD<Mat> svd(a.to_dense());
    return svd.singularValues().size() ? svd.singularValues()[0] : 0.0;
  }
  LinearOperator normal{a.cols(), a.cols(), [&](const Vec& x) { return a.multiply_transpose(a.multiply(x)); },
                        true};
  EigenPairs eig = lanczos_largest(normal, 1, 1e-10, opts.max_subspace, opts.seed);
  return std::sqrt(std::max(eig.values[0], 0.0));
}

DenseSolveResult solve_dense(const Mat& m, const Vec& b) {
  require_dims(m.rows() == m.cols(), "solve_dense: matrix must be square");
  require_dims(b.size() == m.rows(), "solve_dense: right-hand side size mismatch");
  DenseSolveResult out;
  if (m.size() == 0) return out;
  Eigen::PartialPivLU<Mat> lu(m);
  out.rcond = lu.rcond();
  if (out.rcond > 1e-14) {
    out.x = lu.solve(b);
    if (out.x.allFinite()) return out;
  }
  Eigen::CompleteOrthogonalDecomposition<Mat> cod;
  cod.setThreshold(1e-14);
  cod.compute(m);
  out.x = cod.solve(b);
  out.least_squares = true;
  return out;
}

}  // namespace singdist
