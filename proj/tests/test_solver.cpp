#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include "singdist/solver.hpp"
#include "support/testing.hpp"

using namespace singdist;
using namespace singdist::testing;

namespace {

ProblemInstance pattern_problem(const PatternInstance& inst, SolverOptions o = {}) {
  return ProblemInstance(MatrixHandle(inst.a), LinearStructure(inst.pattern), o);
}

Mat diag31() { return Mat(Eigen::Vector2d(3, 1).asDiagonal()); }

}  // namespace

TEST(ProblemInstance, Validation) {
  const Mat a = diag31();
  EXPECT_THROW(ProblemInstance(MatrixHandle(a), LinearStructure::full(3, 2)), InputError);
  EXPECT_THROW(ProblemInstance(MatrixHandle(Mat(Mat::Zero(2, 2))), LinearStructure::full(2, 2)), InputError);
  EXPECT_THROW(ProblemInstance(MatrixHandle(Mat(Mat::Ones(2, 3))), LinearStructure::full(2, 3)), InputError);
  SolverOptions o;
  o.multistart_K = 3;
  EXPECT_THROW(ProblemInstance(MatrixHandle(a), LinearStructure::full(2, 2), o), InputError);
  o = {};
  o.beta = -1.0;
  EXPECT_THROW(ProblemInstance(MatrixHandle(a), LinearStructure::full(2, 2), o), InputError);
}

TEST(ProblemInstance, StructureMembership) {
  Mat a = diag31();
  EXPECT_TRUE(ProblemInstance(MatrixHandle(a), LinearStructure(SparsityPattern(2, 2, {{0, 0}, {1, 1}}))).a_in_structure());
  EXPECT_FALSE(ProblemInstance(MatrixHandle(a), LinearStructure(SparsityPattern(2, 2, {{0, 0}, {0, 1}}))).a_in_structure());
}

TEST(Residual, VanishesAtExampleSolution) {
  const ProblemInstance p(MatrixHandle(diag31()), LinearStructure::full(2, 2));
  const Vec u = -Vec::Unit(2, 1), v = Vec::Unit(2, 1);
  EXPECT_EQ(residual_G(p, u, v).norm(), 0.0);
  EXPECT_EQ(residual_G_beta(p, u, v, 5.0).norm(), 0.0);
  EXPECT_THROW(residual_G(p, Vec::Zero(3), v), DimensionError);
}

TEST(Residual, PenaltyTerm) {
  const ProblemInstance p(MatrixHandle(diag31()), LinearStructure::full(2, 2));
  const Vec u = Vec::Zero(2), v = 2.0 * Vec::Unit(2, 0);
  const Vec g = residual_G_beta(p, u, v, 0.5);
  // (A+0)v = [6,0]; Aᵀ·0 = 0; β(‖v‖²−1)v = 0.5·3·[2,0].
  EXPECT_LE((g - (Eigen::Vector4d() << 6, 0, 3, 0).finished()).norm(), 1e-15);
}

TEST(Differential, PatternPathMatchesGeneralAndDense) {
  Rng rng(41);
  for (int t = 0; t < 8; ++t) {
    const PatternInstance inst = random_pattern_instance(7, 0.4, rng);
    // Half the cases use a structure that does not contain A.
    const SparsityPattern s = t % 2 ? random_pattern(7, 0.4, rng) : inst.pattern;
    const ProblemInstance p(MatrixHandle(inst.a), LinearStructure(s));
    const Vec u = random_vec(7, rng), v = random_vec(7, rng);
    const Vec du = random_vec(7, rng), dv = random_vec(7, rng);
    const double beta = 0.7;
    const Vec fast = apply_H_beta(p, u, v, du, dv, beta);
    const Vec general = detail::apply_H_general(p, u, v, du, dv, beta);
    Vec z(14);
    z << du, dv;
    const Mat h = assemble_H_beta(p, u, v, beta);
    EXPECT_LE((fast - general).norm(), 1e-12 * general.norm());
    EXPECT_LE((h * z - general).norm(), 1e-12 * general.norm());
    EXPECT_LE((h - h.transpose()).norm(), 1e-13 * h.norm());
  }
}

TEST(Differential, BasisStructureMatchesFiniteDifferences) {
  Rng rng(42);
  const auto b = random_orthonormal_basis(5, 4, 6, rng);
  const ProblemInstance p(MatrixHandle(random_mat(5, 4, rng)), LinearStructure(to_basis_structure(b)));
  const Vec u = random_vec(5, rng), v = random_vec(4, rng);
  const Vec du = random_vec(5, rng), dv = random_vec(4, rng);
  const double beta = 1.3, h = 1e-6;
  const Vec fd = (residual_G_beta(p, u + h * du, v + h * dv, beta) - residual_G_beta(p, u - h * du, v - h * dv, beta)) /
                 (2 * h);
  const Vec hz = apply_H_beta(p, u, v, du, dv, beta);
  EXPECT_LE((fd - hz).norm(), 1e-7 * hz.norm());
  const Mat hm = assemble_H_beta(p, u, v, beta);
  EXPECT_LE((hm - hm.transpose()).norm(), 1e-13 * hm.norm());
}

TEST(Differential, ExampleHessianSpectrum) {
  // A = diag(3,1), u = −e₂, v = e₂, β = 0: blocks [[1,3],[3,1]] and [[1,−1],[−1,1]].
  const ProblemInstance p(MatrixHandle(diag31()), LinearStructure::full(2, 2));
  const Mat h = assemble_H_beta(p, -Vec::Unit(2, 1), Vec::Unit(2, 1), 0.0);
  Vec got = Eigen::SelfAdjointEigenSolver<Mat>(h).eigenvalues();
  Eigen::Vector4d want(-2, 0, 2, 4);
  EXPECT_LE((got - want).norm(), 1e-12);
}

TEST(StartingValues, ScalingFormulas) {
  Rng rng(43);
  const PatternInstance inst = random_pattern_instance(6, 0.5, rng);
  const ProblemInstance p = pattern_problem(inst);
  const auto starts = starting_values(p, 3);
  ASSERT_EQ(starts.size(), 3u);
  Eigen::JacobiSVD<Mat> svd(inst.a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  for (const auto& s : starts) {
    const Index idx = 6 - s.k;
    EXPECT_NEAR(s.sigma, svd.singularValues()[idx], 1e-12);
    const Vec uk = svd.matrixU().col(idx), vk = svd.matrixV().col(idx);
    const double proj = mask(inst.pattern, uk * vk.transpose()).norm();
    EXPECT_NEAR(s.projected_norm, proj, 1e-12);
    EXPECT_NEAR(s.sigma_hat, s.sigma / (proj * proj), 1e-10 * s.sigma_hat);
    EXPECT_NEAR(s.eps0, s.sigma / proj, 1e-12);
    // ‖Π_S(u₀v₀ᵀ)‖ = ε₀ and u₀ = −σ̂ u_k with the sign of v.
    EXPECT_NEAR(mask(inst.pattern, s.u * s.v.transpose()).norm(), s.eps0, 1e-12);
    EXPECT_NEAR(std::abs(s.v.dot(vk)), 1.0, 1e-10);
    EXPECT_LE((s.u + s.sigma_hat * (p.A().multiply(s.v) / s.sigma)).norm(), 1e-9 * s.u.norm());
  }
}

TEST(StartingValues, DegenerateProjectionIsSkipped) {
  // The smallest singular pair lives entirely off the pattern.
  Mat a(2, 2);
  a << 0, 1, 3, 0;
  const ProblemInstance p(MatrixHandle(a), LinearStructure(SparsityPattern(2, 2, {{0, 0}, {1, 1}})));
  const auto s = starting_values(p, 1);
  EXPECT_TRUE(s[0].skipped);
  EXPECT_THROW(solve(p), AllStartsFailed);
}

TEST(Solve, EckartYoungOnFullStructure) {
  Rng rng(44);
  for (int t = 0; t < 5; ++t) {
    const Mat a = random_mat(6, 6, rng);
    Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const ProblemInstance p(MatrixHandle(a), LinearStructure::full(6, 6));
    const SolveResult r = solve(p);
    ASSERT_TRUE(r.converged());
    EXPECT_NEAR(r.distance, svd.singularValues()[5], 1e-12);
    const Mat ey = -svd.singularValues()[5] * svd.matrixU().col(5) * svd.matrixV().col(5).transpose();
    EXPECT_LE((r.delta.to_dense() - ey).norm(), 1e-10);
  }
}

TEST(Solve, ExampleDiagonal) {
  const ProblemInstance p(MatrixHandle(diag31()), LinearStructure::full(2, 2));
  const SolveResult r = solve(p);
  EXPECT_EQ(r.status, Status::Converged);
  Mat want = Mat::Zero(2, 2);
  want(1, 1) = -1;
  EXPECT_LE((r.delta.to_dense() - want).norm(), 1e-12);
  EXPECT_NEAR(r.v.norm(), 1.0, 1e-15);
}

TEST(Solve, SingularInputReturnsZero) {
  Mat a(3, 3);
  a << 1, 2, 3, 2, 4, 6, 0, 1, 1;
  const ProblemInstance p(MatrixHandle(a), LinearStructure::full(3, 3));
  const SolveResult r = solve(p);
  EXPECT_EQ(r.status, Status::SingularInput);
  EXPECT_EQ(r.distance, 0.0);
  EXPECT_LE((a * r.v).norm(), 1e-12);
}

TEST(Solve, PatternRunsConvergeAndLineSearchDecreases) {
  Rng rng(45);
  int converged = 0;
  for (int t = 0; t < 10; ++t) {
    const PatternInstance inst = random_pattern_instance(10, 0.4, rng);
    const ProblemInstance p = pattern_problem(inst);
    SolveResult r;
    try {
      r = solve(p);
    } catch (const AllStartsFailed& e) {
      r = e.best();
    }
    for (std::size_t i = 1; i < r.trace.size(); ++i) {
      EXPECT_LT(r.trace[i].residual_norm, r.trace[i - 1].residual_norm);
    }
    if (!r.converged()) continue;
    ++converged;
    EXPECT_LE(r.sigma_min, 1e-9 * r.sigma_max);
    EXPECT_LE((mask(inst.pattern, r.delta.to_dense()) - r.delta.to_dense()).norm(), 0.0);
    EXPECT_NEAR(r.v.norm(), 1.0, 1e-12);
    // Δ sits on the rank-1 manifold: Δ = Π_S(u vᵀ).
    EXPECT_LE((r.delta.to_dense() - mask(inst.pattern, r.u * r.v.transpose())).norm(), 1e-14 * (1 + r.distance));
  }
  EXPECT_GE(converged, 8);
}

TEST(Solve, IterativeInnerSolverAgreesWithDense) {
  Rng rng(46);
  const PatternInstance inst = random_pattern_instance(12, 0.4, rng);
  SolverOptions dense_opts;
  SolverOptions iter_opts;
  iter_opts.dense_unknowns_limit = 0;
  const SolveResult a = solve(pattern_problem(inst, dense_opts));
  const SolveResult b = solve(pattern_problem(inst, iter_opts));
  ASSERT_TRUE(a.converged());
  ASSERT_TRUE(b.converged());
  EXPECT_TRUE(b.trace.front().iterative);
  EXPECT_GT(b.trace.front().inner_iterations, 0);
  EXPECT_NEAR(a.distance, b.distance, 1e-10 * a.distance);
}

TEST(Solve, MultistartSelectsMinimumAndCheapRunsOne) {
  Rng rng(47);
  const PatternInstance inst = random_pattern_instance(10, 0.5, rng);
  SolverOptions o;
  o.multistart_K = 4;
  const SolveResult full = solve(pattern_problem(inst, o));
  ASSERT_EQ(full.starts.size(), 4u);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& s : full.starts)
    if (!s.skipped && is_converged(s.status)) best = std::min(best, s.distance);
  EXPECT_EQ(full.distance, best);

  o.multistart_mode = MultistartMode::Cheap;
  SolveResult cheap;
  try {
    cheap = solve(pattern_problem(inst, o));
  } catch (const AllStartsFailed& e) {
    cheap = e.best();
  }
  int ran = 0;
  std::size_t argmin = 0;
  for (std::size_t i = 0; i < cheap.starts.size(); ++i) {
    ran += !cheap.starts[i].skipped;
    if (cheap.starts[i].sigma_hat < cheap.starts[argmin].sigma_hat) argmin = i;
  }
  EXPECT_EQ(ran, 1);
  EXPECT_FALSE(cheap.starts[argmin].skipped);
}

TEST(Solve, ThreadCountDoesNotChangeResult) {
  Rng rng(48);
  const PatternInstance inst = random_pattern_instance(9, 0.5, rng);
  SolverOptions o;
  o.multistart_K = 4;
  o.threads = 1;
  SolveResult one, four;
  try { one = solve(pattern_problem(inst, o)); } catch (const AllStartsFailed& e) { one = e.best(); }
  o.threads = 4;
  try { four = solve(pattern_problem(inst, o)); } catch (const AllStartsFailed& e) { four = e.best(); }
  EXPECT_EQ(one.distance, four.distance);
  EXPECT_EQ(one.delta_coords, four.delta_coords);
  ASSERT_EQ(one.starts.size(), four.starts.size());
  for (std::size_t i = 0; i < one.starts.size(); ++i) EXPECT_EQ(one.starts[i].distance, four.starts[i].distance);
}

TEST(Solve, ZeroBudgetReportsBudgetExhausted) {
  Rng rng(49);
  const PatternInstance inst = random_pattern_instance(6, 0.5, rng);
  SolverOptions o;
  o.max_newton_iters = 0;
  const ProblemInstance p = pattern_problem(inst, o);
  try {
    solve(p);
    FAIL() << "expected AllStartsFailed";
  } catch (const AllStartsFailed& e) {
    EXPECT_EQ(e.best().status, Status::BudgetExhausted);
    EXPECT_EQ(e.best().iterations, 0);
  }
}

TEST(Solve, ExplicitAndFrobeniusBeta) {
  const ProblemInstance base(MatrixHandle(diag31()), LinearStructure::full(2, 2));
  const Vec u0 = -0.5 * Vec::Unit(2, 1) + 0.1 * Vec::Unit(2, 0), v0 = Vec(Eigen::Vector2d(0.2, 1.0)).normalized();
  EXPECT_NEAR(resolve_beta(base, u0, v0), base.norm_A() * (u0 * v0.transpose()).norm(), 1e-14);
  SolverOptions o;
  o.beta_rule = BetaRule::Frobenius;
  const ProblemInstance fro(MatrixHandle(diag31()), LinearStructure::full(2, 2), o);
  EXPECT_EQ(resolve_beta(fro, u0, v0), fro.norm_A());
  o.beta = 0.25;
  const ProblemInstance fixed(MatrixHandle(diag31()), LinearStructure::full(2, 2), o);
  const SolveResult r = line_search_newton(fixed, u0, v0);
  EXPECT_EQ(r.beta, 0.25);
  EXPECT_TRUE(r.converged());
  EXPECT_NEAR(r.distance, 1.0, 1e-12);
}
