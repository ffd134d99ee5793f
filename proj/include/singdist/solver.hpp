#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "singdist/common.hpp"
#include "singdist/linalg.hpp"
#include "singdist/matrix.hpp"
#include "singdist/structure.hpp"

namespace singdist {

/// How β is chosen when SolverOptions::beta is unset.
///   Scaled:    β = ‖A‖_F · ‖Π_S(u₀v₀ᵀ)‖_F for the run's starting pair, i.e.
///              ‖A‖_F times the initial perturbation norm. Homogeneous of
///              degree two in A, like the v-block of G.
///   Frobenius: β = ‖A‖_F.
enum class BetaRule { Scaled, Frobenius };

enum class MultistartMode { Full, Cheap };

struct SolverOptions {
  std::optional<double> beta;
  BetaRule beta_rule = BetaRule::Scaled;
  /// Stop when ‖G_β‖ ≤ grad_tol; default 1e-12·‖A‖_F.
  std::optional<double> grad_tol;
  int max_newton_iters = 100;
  int max_backtracks = 40;
  int multistart_K = 1;
  MultistartMode multistart_mode = MultistartMode::Full;

  /// Newton systems with rows+cols unknowns up to this size are solved densely.
  Index dense_unknowns_limit = 4000;
  double inner_tol = 1e-2;
  double inner_tol_tight = 1e-4;
  /// Switch to inner_tol_tight once ‖G_β‖ < tighten_below·‖A‖_F.
  double tighten_below = 1e-6;
  int inner_max_iter = 20000;

  /// Worker threads for multi-start; 0 reads SINGDIST_THREADS, then falls
  /// back to the hardware concurrency.
  int threads = 0;
  std::uint64_t seed = 0;
  /// Compute σ_min/σ_max of A+Δ at the end of each run.
  bool compute_certificates = true;
};

/// A (rows x cols, rows >= cols) together with the structure S of admissible
/// perturbations. Shared read-only between concurrent runs.
class ProblemInstance {
 public:
  /// Throws InputError for dimension mismatches or invalid options.
  ProblemInstance(MatrixHandle a, LinearStructure s, SolverOptions options = {});

  const MatrixHandle& A() const { return a_; }
  const LinearStructure& S() const { return s_; }
  const SolverOptions& options() const { return options_; }

  Index rows() const { return a_.rows(); }
  Index cols() const { return a_.cols(); }
  double norm_A() const { return norm_a_; }
  double grad_tol() const;
  /// Π_S A = A (to 1e-14·‖A‖_F).
  bool a_in_structure() const { return a_in_s_; }

 private:
  MatrixHandle a_;
  LinearStructure s_;
  SolverOptions options_;
  double norm_a_ = 0.0;
  bool a_in_s_ = false;
};

enum class Status {
  Converged,
  /// Line search stalled with ‖G_β‖ ≤ 1e-8‖A‖_F and σ_min(A+Δ) ≤ 1e-10σ_max.
  ConvergedAtRoundoff,
  NoDescent,
  BudgetExhausted,
  /// σ_min(A) is zero to working precision; Δ = 0.
  SingularInput,
};

const char* to_string(Status s);
inline bool is_converged(Status s) {
  return s == Status::Converged || s == Status::ConvergedAtRoundoff || s == Status::SingularInput;
}

struct SolverState {
  Vec u;
  Vec v;
  Vec delta;  // coordinates of Π_S(u vᵀ)
  Vec residual;
  double residual_norm = 0.0;
  int iteration = 0;
  double step = 0.0;
};

struct IterationRecord {
  int iteration = 0;
  double residual_norm = 0.0;  // ‖G_β‖ before the step
  double step = 0.0;
  int backtracks = 0;
  int inner_iterations = 0;
  double inner_residual = 0.0;
  bool iterative = false;
};

struct StartSummary {
  int k = 0;  // uses the k-th smallest singular triplet
  double sigma = 0.0;
  double sigma_hat = 0.0;
  double beta = 0.0;
  bool skipped = false;
  std::string note;
  Status status = Status::BudgetExhausted;
  double distance = 0.0;
  double residual_norm = 0.0;
  double sigma_min = 0.0;
  double sigma_max = 0.0;
  int iterations = 0;
  std::vector<IterationRecord> trace;
};

struct SolveResult {
  Status status = Status::BudgetExhausted;
  bool converged() const { return is_converged(status); }

  Vec delta_coords;
  MatrixHandle delta;
  double distance = 0.0;
  Vec u;
  Vec v;  // unit norm after a run

  double beta = 0.0;
  double residual_norm = 0.0;  // ‖G_β(u, v)‖
  double residual_Av = 0.0;    // ‖(A+Δ)v‖
  double residual_Atu = 0.0;   // ‖(A+Δ)ᵀu‖
  double sigma_min = -1.0;     // of A+Δ; negative when not computed
  double sigma_max = -1.0;
  int iterations = 0;
  std::vector<IterationRecord> trace;

  int start_index = 1;
  std::vector<StartSummary> starts;
};

class AllStartsFailed : public std::runtime_error {
 public:
  explicit AllStartsFailed(SolveResult best)
      : std::runtime_error("no starting value converged"), best_(std::move(best)) {}
  const SolveResult& best() const { return best_; }

 private:
  SolveResult best_;
};

// -- Residual and differential ---------------------------------------------

/// [(A+Δ)v; (A+Δ)ᵀu] with Δ = Π_S(u vᵀ).
Vec residual_G(const ProblemInstance& p, const Vec& u, const Vec& v);
/// residual_G plus β(‖v‖²−1)v in the v-block.
Vec residual_G_beta(const ProblemInstance& p, const Vec& u, const Vec& v, double beta);

/// H_β [du; dv], matrix-free. Sparsity structures use the diagonal Gram form
/// [[K₁, A+2Δ], [(A+2Δ)ᵀ, K₂]]; bases use the general M/N expression.
Vec apply_H_beta(const ProblemInstance& p, const Vec& u, const Vec& v, const Vec& du, const Vec& dv,
                 double beta);
/// Dense H_β, (rows+cols) square.
Mat assemble_H_beta(const ProblemInstance& p, const Vec& u, const Vec& v, double beta);

namespace detail {
/// General M Mᵀ du + ... form, valid for every structure; used to
/// cross-check the specialised pattern path.
Vec apply_H_general(const ProblemInstance& p, const Vec& u, const Vec& v, const Vec& du,
                    const Vec& dv, double beta);
}  // namespace detail

// -- Newton ----------------------------------------------------------------

SolverState make_state(const ProblemInstance& p, Vec u, Vec v, double beta);

struct NewtonStep {
  Vec du;
  Vec dv;
  int inner_iterations = 0;
  double inner_residual = 0.0;
  bool iterative = false;
  bool least_squares = false;
};

/// Solves H_β [du; dv] = −G_β, densely or by MINRES depending on size.
NewtonStep newton_step(const ProblemInstance& p, const SolverState& state, double beta,
                       double inner_tol);

/// β used for a run starting at (u0, v0) under the instance's options.
double resolve_beta(const ProblemInstance& p, const Vec& u0, const Vec& v0);

/// Newton's method with halving line search on ‖G_β‖ from (u0, v0).
/// Non-convergence is reported through the status, never thrown.
SolveResult line_search_newton(const ProblemInstance& p, const Vec& u0, const Vec& v0);
SolveResult line_search_newton(const ProblemInstance& p, const Vec& u0, const Vec& v0, double beta);

// -- Starting values and driver --------------------------------------------

struct StartingValue {
  int k = 1;
  double sigma = 0.0;           // σ_{n-k+1}(A)
  double projected_norm = 0.0;  // ‖Π_S(u_k v_kᵀ)‖_F
  double sigma_hat = 0.0;       // σ / projected_norm²
  double eps0 = 0.0;            // σ / projected_norm, the initial ‖Δ‖_F
  Vec u;                        // −σ̂ u_k
  Vec v;                        // v_k
  bool skipped = false;         // projected_norm < 1e-14
};

std::vector<StartingValue> starting_values(const ProblemInstance& p, int k);
std::vector<StartingValue> starting_values(const ProblemInstance& p,
                                           const std::vector<SingularTriplet>& triplets);

/// Multi-start driver: runs line_search_newton from each starting value and
/// returns the converged result with the smallest ‖Δ‖_F. Throws
/// AllStartsFailed (carrying the best attempt) when none converges.
SolveResult solve(const ProblemInstance& p);

/// A + Δ for Δ given in structure coordinates.
MatrixHandle perturbed_matrix(const ProblemInstance& p, const Vec& delta_coords);

}  // namespace singdist
