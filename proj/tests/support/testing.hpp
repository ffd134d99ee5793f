#pragma once

// Test-side helpers. The oracles here deliberately avoid the library's own
// structure operators: they work from explicit dense basis matrices.

#include <cmath>
#include <random>
#include <vector>

#include <Eigen/QR>
#include <Eigen/SVD>

#include "singdist/solver.hpp"
#include "singdist/structure.hpp"

namespace singdist::testing {

using Rng = std::mt19937_64;

inline Vec random_vec(Index n, Rng& rng) {
  std::normal_distribution<double> g;
  Vec x(n);
  for (Index i = 0; i < n; ++i) x[i] = g(rng);
  return x;
}

inline Mat random_mat(Index m, Index n, Rng& rng) {
  std::normal_distribution<double> g;
  Mat x(m, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < m; ++i) x(i, j) = g(rng);
  return x;
}

/// Random pattern on n x n with the diagonal always present.
inline SparsityPattern random_pattern(Index n, double density, Rng& rng) {
  std::uniform_real_distribution<double> u01;
  std::vector<Entry> e;
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      if (i == j || u01(rng) < density) e.push_back({i, j});
  return SparsityPattern(n, n, std::move(e));
}

/// Gaussian values on the pattern; diagonal shifted so A is comfortably
/// nonsingular.
inline Mat random_on_pattern(const SparsityPattern& p, Rng& rng) {
  std::normal_distribution<double> g;
  Mat a = Mat::Zero(p.rows(), p.cols());
  for (const Entry& e : p.entries()) a(e.row, e.col) = g(rng);
  return a;
}

inline std::vector<Mat> elementary_basis(const SparsityPattern& p) {
  std::vector<Mat> b;
  for (const Entry& e : p.entries()) {
    Mat m = Mat::Zero(p.rows(), p.cols());
    m(e.row, e.col) = 1.0;
    b.push_back(std::move(m));
  }
  return b;
}

/// k orthonormal dense m x n matrices from a QR of a random (mn x k) block.
inline std::vector<Mat> random_orthonormal_basis(Index m, Index n, Index k, Rng& rng) {
  Eigen::HouseholderQR<Mat> qr(random_mat(m * n, k, rng));
  const Mat q = qr.householderQ() * Mat::Identity(m * n, k);
  std::vector<Mat> out;
  for (Index c = 0; c < k; ++c) out.push_back(Eigen::Map<const Mat>(q.col(c).data(), m, n));
  return out;
}

inline BasisStructure to_basis_structure(const std::vector<Mat>& b) {
  std::vector<SparseCSR> s;
  for (const Mat& m : b) s.push_back(m.sparseView(0.0, 0.0));
  return BasisStructure(b.front().rows(), b.front().cols(), std::move(s));
}

inline double frob_inner(const Mat& x, const Mat& y) { return (x.array() * y.array()).sum(); }

/// Σ P_k ⟨P_k, X⟩.
inline Mat basis_projection(const std::vector<Mat>& b, const Mat& x) {
  Mat out = Mat::Zero(x.rows(), x.cols());
  for (const Mat& p : b) out += frob_inner(p, x) * p;
  return out;
}

inline Mat mask(const SparsityPattern& p, const Mat& x) {
  Mat out = Mat::Zero(x.rows(), x.cols());
  for (const Entry& e : p.entries()) out(e.row, e.col) = x(e.row, e.col);
  return out;
}

/// M(v), column k = P_k v.
inline Mat dense_M(const std::vector<Mat>& b, const Vec& v) {
  Mat m(b.front().rows(), static_cast<Index>(b.size()));
  for (std::size_t k = 0; k < b.size(); ++k) m.col(static_cast<Index>(k)) = b[k] * v;
  return m;
}

/// N(u), column k = P_kᵀ u.
inline Mat dense_N(const std::vector<Mat>& b, const Vec& u) {
  Mat n(b.front().cols(), static_cast<Index>(b.size()));
  for (std::size_t k = 0; k < b.size(); ++k) n.col(static_cast<Index>(k)) = b[k].transpose() * u;
  return n;
}

struct BruteForce {
  double f = 0.0;
  Vec delta;
  Mat Delta;
};

/// min_δ ‖δ‖² + ε⁻¹‖(A + Σ δ_k P_k) v‖² as the least-squares problem
/// [M/√ε; I] δ ≈ [−Av/√ε; 0], solved by Householder QR.
inline BruteForce brute_force_oracle(const Mat& a, const std::vector<Mat>& b, const Vec& v, double eps) {
  const Mat m = dense_M(b, v);
  const Index p = m.cols(), rows = m.rows();
  const double s = 1.0 / std::sqrt(eps);
  Mat lhs(rows + p, p);
  lhs << s * m, Mat::Identity(p, p);
  Vec rhs = Vec::Zero(rows + p);
  rhs.head(rows) = -s * (a * v);
  BruteForce out;
  out.delta = lhs.householderQr().solve(rhs);
  out.Delta = Mat::Zero(a.rows(), a.cols());
  for (Index k = 0; k < p; ++k) out.Delta += out.delta[k] * b[static_cast<std::size_t>(k)];
  out.f = out.delta.squaredNorm() + ((a + out.Delta) * v).squaredNorm() / eps;
  return out;
}

/// Random nonsingular pattern instance with A in S.
struct PatternInstance {
  SparsityPattern pattern;
  Mat a;
};

inline PatternInstance random_pattern_instance(Index n, double density, Rng& rng) {
  for (;;) {
    SparsityPattern p = random_pattern(n, density, rng);
    Mat a = random_on_pattern(p, rng);
    Eigen::JacobiSVD<Mat> svd(a);
    const Vec& s = svd.singularValues();
    if (s[n - 1] > 1e-3 * s[0]) return {std::move(p), std::move(a)};
  }
}

}  // namespace singdist::testing

namespace singdist::testing {

/// Random orthogonal n x n matrix (QR of a Gaussian block, R-diagonal signs
/// fixed) with entries kept independently with probability `density`.
inline Mat sparsified_orthogonal(Index n, double density, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::HouseholderQR<Mat> qr(random_mat(n, n, rng));
  Mat q = qr.householderQ();
  const Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index j = 0; j < n; ++j)
    if (r(j, j) < 0) q.col(j) = -q.col(j);
  std::uniform_real_distribution<double> u01;
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i)
      if (u01(rng) >= density) q(i, j) = 0.0;
  return q;
}

}  // namespace singdist::testing
