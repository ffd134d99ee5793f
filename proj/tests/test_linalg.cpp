#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include "singdist/linalg.hpp"
#include "support/testing.hpp"

using namespace singdist;
using namespace singdist::testing;

namespace {

void expect_triplet(const MatrixHandle& a, const SingularTriplet& t, double tol) {
  const double an = a.frobenius_norm();
  EXPECT_LE((a.multiply(t.v) - t.sigma * t.u).norm(), tol * an);
  EXPECT_LE((a.multiply_transpose(t.u) - t.sigma * t.v).norm(), tol * an);
  EXPECT_NEAR(t.u.norm(), 1.0, 1e-12);
  EXPECT_NEAR(t.v.norm(), 1.0, 1e-12);
}

// Permuted diagonal with known singular values |d|.
SparseCSR permuted_diagonal(const Vec& d, Rng& rng) {
  const Index n = d.size();
  std::vector<Index> perm(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<Eigen::Triplet<double>> t;
  for (Index i = 0; i < n; ++i) t.emplace_back(perm[static_cast<std::size_t>(i)], i, d[i]);
  SparseCSR a(n, n);
  a.setFromTriplets(t.begin(), t.end());
  a.makeCompressed();
  return a;
}

}  // namespace

TEST(SingularTriplets, DiagonalThreeOne) {
  MatrixHandle a(Mat(Eigen::Vector2d(3, 1).asDiagonal()));
  const auto t = smallest_singular_triplets(a, 1);
  ASSERT_EQ(t.size(), 1u);
  EXPECT_NEAR(t[0].sigma, 1.0, 1e-15);
  EXPECT_NEAR(std::abs(t[0].v[1]), 1.0, 1e-15);
  EXPECT_NEAR(std::abs(t[0].u[1]), 1.0, 1e-15);
}

TEST(SingularTriplets, AscendingOrder) {
  MatrixHandle a(Mat(Eigen::Vector2d(5, 2).asDiagonal()));
  const auto t = smallest_singular_triplets(a, 2);
  EXPECT_DOUBLE_EQ(t[0].sigma, 2.0);
  EXPECT_DOUBLE_EQ(t[1].sigma, 5.0);
}

TEST(SingularTriplets, RandomMatchesJacobiSvd) {
  Rng rng(21);
  for (int trial = 0; trial < 5; ++trial) {
    const Mat a = random_mat(8, 8, rng);
    Eigen::JacobiSVD<Mat> ref(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto t = smallest_singular_triplets(MatrixHandle(a), 3);
    for (int k = 0; k < 3; ++k) {
      EXPECT_NEAR(t[static_cast<std::size_t>(k)].sigma, ref.singularValues()[7 - k], 1e-12);
      EXPECT_NEAR(std::abs(t[static_cast<std::size_t>(k)].v.dot(ref.matrixV().col(7 - k))), 1.0, 1e-10);
      expect_triplet(MatrixHandle(a), t[static_cast<std::size_t>(k)], 1e-12);
    }
  }
}

TEST(SingularTriplets, RectangularTall) {
  Rng rng(22);
  const Mat a = random_mat(12, 4, rng);
  Eigen::JacobiSVD<Mat> ref(a);
  const auto t = smallest_singular_triplets(MatrixHandle(a), 1);
  EXPECT_NEAR(t[0].sigma, ref.singularValues()[3], 1e-12);
  expect_triplet(MatrixHandle(a), t[0], 1e-12);
  EXPECT_THROW(smallest_singular_triplets(MatrixHandle(Mat(a.transpose())), 1), DimensionError);
}

TEST(SingularTriplets, SparseShiftInvertPath) {
  Rng rng(23);
  const Index n = 1800;
  Vec d = Vec::LinSpaced(n, 1.0, 10.0);
  d[17] = 0.01;
  d[901] = -0.02;
  d[1500] = 0.05;
  const MatrixHandle a(permuted_diagonal(d, rng));
  const auto t = smallest_singular_triplets(a, 3);
  EXPECT_NEAR(t[0].sigma, 0.01, 1e-12);
  EXPECT_NEAR(t[1].sigma, 0.02, 1e-12);
  EXPECT_NEAR(t[2].sigma, 0.05, 1e-12);
  for (const auto& x : t) expect_triplet(a, x, 1e-10);
  EXPECT_NEAR(std::abs(t[0].v[17]), 1.0, 1e-10);
  EXPECT_NEAR(largest_singular_value(a), 10.0, 1e-8);
}

TEST(SingularTriplets, SparseTridiagonalResiduals) {
  const Index n = 1600;
  std::vector<Eigen::Triplet<double>> t;
  for (Index i = 0; i < n; ++i) {
    t.emplace_back(i, i, 2.0 + 0.001 * i);
    if (i + 1 < n) {
      t.emplace_back(i, i + 1, -1.0);
      t.emplace_back(i + 1, i, 0.5);
    }
  }
  SparseCSR s(n, n);
  s.setFromTriplets(t.begin(), t.end());
  const MatrixHandle a(s);
  const auto trip = smallest_singular_triplets(a, 2);
  EXPECT_LT(trip[0].sigma, trip[1].sigma);
  for (const auto& x : trip) expect_triplet(a, x, 1e-10);
}

TEST(SolveDense, SmallSystems) {
  EXPECT_EQ(solve_dense(Mat::Identity(3, 3), Vec::Ones(3)).x, Vec::Ones(3));
  Mat m(2, 2);
  m << 2, 0, 0, 4;
  const auto r = solve_dense(m, Eigen::Vector2d(2, 4));
  EXPECT_LE((r.x - Eigen::Vector2d(1, 1)).norm(), 1e-15);
  EXPECT_FALSE(r.least_squares);
}

TEST(SolveDense, RandomResidual) {
  Rng rng(24);
  const Mat m = random_mat(10, 10, rng);
  const Vec b = random_vec(10, rng);
  const auto r = solve_dense(m, b);
  EXPECT_LE((m * r.x - b).norm(), 1e-10 * m.norm() * r.x.norm());
  EXPECT_GT(r.rcond, 0.0);
}

TEST(SolveDense, SingularFallsBackToMinimumNorm) {
  Rng rng(25);
  const Mat u = random_mat(6, 3, rng);
  const Mat m = u * u.transpose();  // rank 3
  const Vec b = random_vec(6, rng);
  const auto r = solve_dense(m, b);
  EXPECT_TRUE(r.least_squares);
  const Vec ref = Eigen::JacobiSVD<Mat>(m, Eigen::ComputeFullU | Eigen::ComputeFullV).solve(b);
  EXPECT_LE((r.x - ref).norm(), 1e-9 * ref.norm());
}

TEST(Minres, SymmetricIndefinite) {
  Rng rng(26);
  const Mat q = random_mat(60, 60, rng);
  Vec d = Vec::LinSpaced(60, -3.0, 5.0);
  d[30] = 0.3;
  Eigen::HouseholderQR<Mat> qr(q);
  const Mat qq = qr.householderQ();
  const Mat h = qq * d.asDiagonal() * qq.transpose();
  const Vec b = random_vec(60, rng);
  LinearOperator op{60, 60, [&](const Vec& x) { return Vec(h * x); }, true};
  const auto r = solve_symmetric_iterative(op, b, 1e-10, 500);
  EXPECT_TRUE(r.converged);
  EXPECT_LE(r.relative_residual, 1e-10);
  EXPECT_LE((r.x - h.ldlt().solve(b)).norm(), 1e-8 * r.x.norm());
}

TEST(Minres, LooseToleranceStopsEarly) {
  Rng rng(27);
  const Mat a = random_mat(80, 80, rng);
  const Mat h = a + a.transpose();
  const Vec b = random_vec(80, rng);
  LinearOperator op{80, 80, [&](const Vec& x) { return Vec(h * x); }, true};
  const auto loose = solve_symmetric_iterative(op, b, 1e-2, 1000);
  const auto tight = solve_symmetric_iterative(op, b, 1e-10, 1000);
  EXPECT_LE(loose.relative_residual, 1e-2);
  EXPECT_LT(loose.iterations, tight.iterations);
}

TEST(Minres, RejectsNonSymmetricOperator) {
  LinearOperator op{2, 2, [](const Vec& x) { return x; }, false};
  EXPECT_THROW(solve_symmetric_iterative(op, Vec::Ones(2), 1e-8, 10), std::invalid_argument);
}

TEST(Lanczos, LargestEigenvaluesOfDiagonal) {
  const Vec d = Vec::LinSpaced(300, -1.0, 2.0);
  LinearOperator op{300, 300, [&](const Vec& x) { return Vec(d.cwiseProduct(x)); }, true};
  const EigenPairs e = lanczos_largest(op, 3, 1e-12, 300, 7);
  const double step = 3.0 / 299.0;
  EXPECT_NEAR(e.values[0], 2.0, 1e-10);
  EXPECT_NEAR(e.values[1], 2.0 - step, 1e-10);
  EXPECT_NEAR(e.values[2], 2.0 - 2 * step, 1e-10);
  for (int k = 0; k < 3; ++k) {
    const Vec x = e.vectors.col(k);
    EXPECT_LE((d.cwiseProduct(x) - e.values[k] * x).norm(), 1e-9);
  }
}
