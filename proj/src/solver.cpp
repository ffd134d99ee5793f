#include "singdist/solver.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <optional>
#include <thread>

#include <Eigen/SVD>

namespace singdist {

namespace {

bool a_lies_in(const MatrixHandle& a, const LinearStructure& s) {
  if (s.kind() == StructureKind::Full) return true;
  const double tol = 1e-14 * a.frobenius_norm();
  if (const SparsityPattern* pat = s.pattern()) {
    double outside = 0.0;
    if (a.is_sparse()) {
      const SparseCSR& m = a.sparse();
      for (Index i = 0; i < m.outerSize(); ++i)
        for (SparseCSR::InnerIterator it(m, i); it; ++it)
          if (!pat->position(i, it.col())) outside += it.value() * it.value();
    } else {
      const Mat& m = a.dense();
      for (Index j = 0; j < m.cols(); ++j)
        for (Index i = 0; i < m.rows(); ++i)
          if (m(i, j) != 0.0 && !pat->position(i, j)) outside += m(i, j) * m(i, j);
    }
    return std::sqrt(outside) <= tol;
  }
  const Mat d = a.to_dense();
  return (s.project(d) - d).norm() <= tol;
}

// Per-point data reused across every H application of one Newton step.
struct HContext {
  const ProblemInstance* p;
  Vec u, v, delta;
  double beta;
  bool diagonal_gram;
  GramDiagonals gram;
};

HContext make_context(const ProblemInstance& p, const Vec& u, const Vec& v, double beta) {
  HContext c{&p, u, v, p.S().rank1_coordinates(u, v), beta, p.S().kind() != StructureKind::Basis, {}};
  if (c.diagonal_gram) c.gram = p.S().gram_diagonals(u, v);
  return c;
}

void add_penalty(const HContext& c, const Vec& dv, Eigen::Ref<Vec> out) {
  const double vv = c.v.squaredNorm();
  out += c.beta * (2.0 * c.v.dot(dv) * c.v + (vv - 1.0) * dv);
}

Vec apply_pattern(const HContext& c, const Vec& du, const Vec& dv) {
  const ProblemInstance& p = *c.p;
  const Index m = p.rows(), n = p.cols();
  Vec out(m + n);
  out.head(m) = c.gram.k1.cwiseProduct(du) + p.A().multiply(dv) + 2.0 * p.S().apply(c.delta, dv);
  out.tail(n) = c.gram.k2.cwiseProduct(dv) + p.A().multiply_transpose(du) +
                2.0 * p.S().apply_transpose(c.delta, du);
  add_penalty(c, dv, out.tail(n));
  return out;
}

Vec apply_general(const HContext& c, const Vec& du, const Vec& dv) {
  const ProblemInstance& p = *c.p;
  const LinearStructure& s = p.S();
  const Index m = p.rows(), n = p.cols();
  const Vec coeff = s.rank1_coordinates(du, c.v) + s.rank1_coordinates(c.u, dv);
  Vec out(m + n);
  out.head(m) = s.apply(coeff, c.v) + p.A().multiply(dv) + s.apply(c.delta, dv);
  out.tail(n) = s.apply_transpose(coeff, c.u) + p.A().multiply_transpose(du) +
                s.apply_transpose(c.delta, du);
  add_penalty(c, dv, out.tail(n));
  return out;
}

Vec apply_context(const HContext& c, const Vec& du, const Vec& dv) {
  return c.diagonal_gram ? apply_pattern(c, du, dv) : apply_general(c, du, dv);
}

void check_point(const ProblemInstance& p, const Vec& u, const Vec& v) {
  require_dims(u.size() == p.rows() && v.size() == p.cols(), "u/v length does not match A");
}

int worker_count(const SolverOptions& o, std::size_t jobs) {
  long n = o.threads;
  if (n <= 0) {
    if (const char* env = std::getenv("SINGDIST_THREADS")) n = std::strtol(env, nullptr, 10);
  }
  if (n <= 0) n = static_cast<long>(std::max(1u, std::thread::hardware_concurrency()));
  return static_cast<int>(std::clamp<long>(n, 1, static_cast<long>(std::max<std::size_t>(jobs, 1))));
}

// Fills Δ, residuals and σ certificates for the final point of a run.
void finish(const ProblemInstance& p, SolveResult& r, bool certificates) {
  const LinearStructure& s = p.S();
  r.delta_coords = s.rank1_coordinates(r.u, r.v);
  r.delta = s.to_matrix(r.delta_coords);
  r.distance = r.delta_coords.norm();
  const Vec g = residual_G(p, r.u, r.v);
  r.residual_Av = g.head(p.rows()).norm();
  r.residual_Atu = g.tail(p.cols()).norm();
  r.residual_norm = residual_G_beta(p, r.u, r.v, r.beta).norm();
  if (!certificates) return;
  const MatrixHandle b = perturbed_matrix(p, r.delta_coords);
  SvdOptions so;
  so.seed = p.options().seed;
  try {
    r.sigma_min = smallest_singular_triplets(b, 1, so).front().sigma;
  } catch (const std::exception&) {
    // LU of a numerically singular A+Δ can fail; ‖(A+Δ)v‖ bounds σ_min.
    r.sigma_min = b.multiply(r.v).norm() / r.v.norm();
  }
  try {
    r.sigma_max = largest_singular_value(b, so);
  } catch (const std::exception&) {
    r.sigma_max = b.frobenius_norm();
  }
}

}  // namespace

const char* to_string(Status s) {
  switch (s) {
    case Status::Converged: return "converged";
    case Status::ConvergedAtRoundoff: return "converged_at_roundoff";
    case Status::NoDescent: return "no_descent";
    case Status::BudgetExhausted: return "budget_exhausted";
    case Status::SingularInput: return "singular_input";
  }
  return "unknown";
}

ProblemInstance::ProblemInstance(MatrixHandle a, LinearStructure s, SolverOptions options)
    : a_(std::move(a)), s_(std::move(s)), options_(std::move(options)) {
  if (a_.rows() == 0 || a_.cols() == 0) throw InputError("A is empty");
  if (a_.rows() < a_.cols()) throw InputError("A must have at least as many rows as columns");
  if (s_.rows() != a_.rows() || s_.cols() != a_.cols()) {
    throw InputError("structure dimensions do not match A");
  }
  if (s_.dimension() == 0) throw InputError("structure is empty");
  const auto& o = options_;
  if (o.multistart_K < 1 || o.multistart_K > a_.cols()) throw InputError("multistart K must be in [1, cols]");
  if (o.beta && !(*o.beta > 0.0 && std::isfinite(*o.beta))) throw InputError("beta must be positive");
  if (o.grad_tol && !(*o.grad_tol > 0.0)) throw InputError("grad_tol must be positive");
  if (o.max_newton_iters < 0 || o.max_backtracks < 0) throw InputError("iteration limits must be nonnegative");
  if (!(o.inner_tol > 0.0 && o.inner_tol < 1.0 && o.inner_tol_tight > 0.0 && o.inner_tol_tight < 1.0)) {
    throw InputError("inner tolerances must lie in (0, 1)");
  }
  norm_a_ = a_.frobenius_norm();
  if (norm_a_ == 0.0) throw InputError("A is the zero matrix");
  a_in_s_ = a_lies_in(a_, s_);
}

double ProblemInstance::grad_tol() const { return options_.grad_tol.value_or(1e-12 * norm_a_); }

MatrixHandle perturbed_matrix(const ProblemInstance& p, const Vec& delta_coords) {
  if (p.A().is_sparse() && p.S().kind() != StructureKind::Full) {
    SparseCSR sum = p.A().sparse() + p.S().to_matrix(delta_coords).sparse();
    sum.makeCompressed();
    return MatrixHandle(std::move(sum));
  }
  return MatrixHandle(Mat(p.A().to_dense() + p.S().embed(delta_coords)));
}

Vec residual_G(const ProblemInstance& p, const Vec& u, const Vec& v) {
  check_point(p, u, v);
  const LinearStructure& s = p.S();
  const Vec delta = s.rank1_coordinates(u, v);
  Vec g(p.rows() + p.cols());
  g.head(p.rows()) = p.A().multiply(v) + s.apply(delta, v);
  g.tail(p.cols()) = p.A().multiply_transpose(u) + s.apply_transpose(delta, u);
  return g;
}

Vec residual_G_beta(const ProblemInstance& p, const Vec& u, const Vec& v, double beta) {
  Vec g = residual_G(p, u, v);
  g.tail(p.cols()) += beta * (v.squaredNorm() - 1.0) * v;
  return g;
}

Vec apply_H_beta(const ProblemInstance& p, const Vec& u, const Vec& v, const Vec& du, const Vec& dv,
                 double beta) {
  check_point(p, u, v);
  check_point(p, du, dv);
  return apply_context(make_context(p, u, v, beta), du, dv);
}

Vec detail::apply_H_general(const ProblemInstance& p, const Vec& u, const Vec& v, const Vec& du,
                            const Vec& dv, double beta) {
  check_point(p, u, v);
  check_point(p, du, dv);
  HContext c = make_context(p, u, v, beta);
  return apply_general(c, du, dv);
}

Mat assemble_H_beta(const ProblemInstance& p, const Vec& u, const Vec& v, double beta) {
  check_point(p, u, v);
  const LinearStructure& s = p.S();
  const Index m = p.rows(), n = p.cols();
  const Vec delta = s.rank1_coordinates(u, v);
  const Mat b = p.A().to_dense() + s.embed(delta);
  Mat h(m + n, m + n);
  if (s.kind() != StructureKind::Basis) {
    const GramDiagonals g = s.gram_diagonals(u, v);
    const Mat off = b + s.embed(delta);  // A + 2Δ
    h.topLeftCorner(m, m) = g.k1.asDiagonal();
    h.topRightCorner(m, n) = off;
    h.bottomLeftCorner(n, m) = off.transpose();
    h.bottomRightCorner(n, n) = g.k2.asDiagonal();
  } else {
    const Mat mm = s.assemble_M(v);
    const Mat nn = s.assemble_N(u);
    h.topLeftCorner(m, m) = mm * mm.transpose();
    h.topRightCorner(m, n) = mm * nn.transpose() + b;
    h.bottomLeftCorner(n, m) = h.topRightCorner(m, n).transpose();
    h.bottomRightCorner(n, n) = nn * nn.transpose();
  }
  h.bottomRightCorner(n, n) += beta * (2.0 * v * v.transpose());
  h.bottomRightCorner(n, n).diagonal().array() += beta * (v.squaredNorm() - 1.0);
  return h;
}

SolverState make_state(const ProblemInstance& p, Vec u, Vec v, double beta) {
  check_point(p, u, v);
  SolverState st;
  st.delta = p.S().rank1_coordinates(u, v);
  st.residual = residual_G_beta(p, u, v, beta);
  st.residual_norm = st.residual.norm();
  st.u = std::move(u);
  st.v = std::move(v);
  return st;
}

NewtonStep newton_step(const ProblemInstance& p, const SolverState& state, double beta,
                       double inner_tol) {
  const Index m = p.rows(), n = p.cols();
  const Vec rhs = -state.residual;
  NewtonStep step;
  Vec x;
  if (m + n <= p.options().dense_unknowns_limit) {
    DenseSolveResult r = solve_dense(assemble_H_beta(p, state.u, state.v, beta), rhs);
    x = std::move(r.x);
    step.least_squares = r.least_squares;
  } else {
    const HContext ctx = make_context(p, state.u, state.v, beta);
    LinearOperator op{m + n, m + n,
                      [&](const Vec& z) { return apply_context(ctx, z.head(m), z.tail(n)); }, true};
    IterativeSolveResult r = solve_symmetric_iterative(op, rhs, inner_tol, p.options().inner_max_iter);
    x = std::move(r.x);
    step.iterative = true;
    step.inner_iterations = r.iterations;
    step.inner_residual = r.relative_residual;
  }
  step.du = x.head(m);
  step.dv = x.tail(n);
  return step;
}

double resolve_beta(const ProblemInstance& p, const Vec& u0, const Vec& v0) {
  const SolverOptions& o = p.options();
  if (o.beta) return *o.beta;
  if (o.beta_rule == BetaRule::Frobenius) return p.norm_A();
  const double eps0 = p.S().rank1_coordinates(u0, v0).norm();
  return eps0 > 0.0 ? p.norm_A() * eps0 : p.norm_A();
}

SolveResult line_search_newton(const ProblemInstance& p, const Vec& u0, const Vec& v0) {
  return line_search_newton(p, u0, v0, resolve_beta(p, u0, v0));
}

SolveResult line_search_newton(const ProblemInstance& p, const Vec& u0, const Vec& v0, double beta) {
  const SolverOptions& o = p.options();
  const double tol = p.grad_tol();
  SolveResult r;
  r.beta = beta;
  SolverState st = make_state(p, u0, v0, beta);
  r.status = Status::BudgetExhausted;

  for (int it = 0;; ++it) {
    if (st.residual_norm <= tol) {
      r.status = Status::Converged;
      break;
    }
    if (it >= o.max_newton_iters) break;
    const double itol = st.residual_norm < o.tighten_below * p.norm_A() ? o.inner_tol_tight : o.inner_tol;
    const NewtonStep step = newton_step(p, st, beta, itol);

    IterationRecord rec;
    rec.iteration = it;
    rec.residual_norm = st.residual_norm;
    rec.inner_iterations = step.inner_iterations;
    rec.inner_residual = step.inner_residual;
    rec.iterative = step.iterative;

    bool accepted = false;
    double alpha = 1.0;
    for (int b = 0; b <= o.max_backtracks; ++b, alpha *= 0.5) {
      Vec ut = st.u + alpha * step.du;
      Vec vt = st.v + alpha * step.dv;
      Vec gt = residual_G_beta(p, ut, vt, beta);
      const double nt = gt.norm();
      if (nt < st.residual_norm) {
        st.u = std::move(ut);
        st.v = std::move(vt);
        st.residual = std::move(gt);
        st.residual_norm = nt;
        rec.backtracks = b;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      rec.backtracks = o.max_backtracks;
      r.trace.push_back(rec);
      r.status = Status::NoDescent;
      break;
    }
    rec.step = alpha;
    st.step = alpha;
    st.iteration = it + 1;
    r.trace.push_back(rec);
  }

  r.iterations = static_cast<int>(r.trace.size());
  const double vn = st.v.norm();
  if (vn > 0.0) {
    r.u = st.u * vn;
    r.v = st.v / vn;
  } else {
    r.u = st.u;
    r.v = st.v;
  }
  const bool stalled = r.status == Status::NoDescent;
  finish(p, r, o.compute_certificates || stalled);
  if (stalled && r.residual_norm <= 1e-8 * p.norm_A() && r.sigma_min >= 0.0 &&
      r.sigma_min <= 1e-10 * r.sigma_max) {
    r.status = Status::ConvergedAtRoundoff;
  }
  return r;
}

std::vector<StartingValue> starting_values(const ProblemInstance& p,
                                           const std::vector<SingularTriplet>& triplets) {
  std::vector<StartingValue> out;
  int k = 1;
  for (const SingularTriplet& t : triplets) {
    StartingValue sv;
    sv.k = k++;
    sv.sigma = t.sigma;
    sv.projected_norm = p.S().rank1_coordinates(t.u, t.v).norm();
    sv.v = t.v;
    if (sv.projected_norm < 1e-14) {
      sv.skipped = true;
      sv.u = Vec::Zero(t.u.size());
    } else {
      sv.sigma_hat = t.sigma / (sv.projected_norm * sv.projected_norm);
      sv.eps0 = t.sigma / sv.projected_norm;
      sv.u = -sv.sigma_hat * t.u;
    }
    out.push_back(std::move(sv));
  }
  return out;
}

std::vector<StartingValue> starting_values(const ProblemInstance& p, int k) {
  SvdOptions so;
  so.seed = p.options().seed;
  return starting_values(p, smallest_singular_triplets(p.A(), k, so));
}

SolveResult solve(const ProblemInstance& p) {
  const SolverOptions& o = p.options();
  SvdOptions so;
  so.seed = o.seed;

  std::vector<SingularTriplet> triplets;
  const double sigma_max = largest_singular_value(p.A(), so);
  const double singular_tol = static_cast<double>(std::max(p.rows(), p.cols())) *
                              std::numeric_limits<double>::epsilon() * sigma_max;
  bool singular = false;
  try {
    triplets = smallest_singular_triplets(p.A(), o.multistart_K, so);
    singular = triplets.front().sigma <= singular_tol;
  } catch (const ConvergenceError& e) {
    if (e.achieved() != 0.0) throw;
    singular = true;  // sparse LU reported a zero pivot
  }
  if (singular) {
    SolveResult r;
    r.status = Status::SingularInput;
    r.u = Vec::Zero(p.rows());
    if (!triplets.empty()) {
      r.v = triplets.front().v;
    } else {
      Eigen::BDCSVD<Mat> svd(p.A().to_dense(), Eigen::ComputeThinV);
      r.v = svd.matrixV().col(p.cols() - 1);
    }
    r.beta = resolve_beta(p, r.u, r.v);
    finish(p, r, false);
    r.sigma_min = triplets.empty() ? 0.0 : triplets.front().sigma;
    r.sigma_max = sigma_max;
    return r;
  }

  const std::vector<StartingValue> starts = starting_values(p, triplets);
  std::vector<std::size_t> jobs;
  for (std::size_t i = 0; i < starts.size(); ++i)
    if (!starts[i].skipped) jobs.push_back(i);
  if (o.multistart_mode == MultistartMode::Cheap && !jobs.empty()) {
    const auto best = *std::min_element(jobs.begin(), jobs.end(), [&](std::size_t a, std::size_t b) {
      return starts[a].sigma_hat < starts[b].sigma_hat;
    });
    jobs = {best};
  }

  std::vector<std::optional<SolveResult>> runs(starts.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t j; (j = next.fetch_add(1)) < jobs.size();) {
      const StartingValue& sv = starts[jobs[j]];
      runs[jobs[j]] = line_search_newton(p, sv.u, sv.v);
    }
  };
  const int nthreads = worker_count(o, jobs.size());
  if (nthreads <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  std::vector<StartSummary> summaries;
  std::optional<std::size_t> best, best_failed;
  for (std::size_t i = 0; i < starts.size(); ++i) {
    const StartingValue& sv = starts[i];
    StartSummary s;
    s.k = sv.k;
    s.sigma = sv.sigma;
    s.sigma_hat = sv.sigma_hat;
    if (sv.skipped) {
      s.skipped = true;
      s.note = "projected singular vector product vanishes";
    } else if (!runs[i]) {
      s.skipped = true;
      s.note = "not run in cheap mode";
    } else {
      const SolveResult& r = *runs[i];
      s.beta = r.beta;
      s.status = r.status;
      s.distance = r.distance;
      s.residual_norm = r.residual_norm;
      s.sigma_min = r.sigma_min;
      s.sigma_max = r.sigma_max;
      s.iterations = r.iterations;
      s.trace = r.trace;
      if (r.converged()) {
        if (!best || r.distance < runs[*best]->distance) best = i;
      } else if (!best_failed || r.residual_norm < runs[*best_failed]->residual_norm) {
        best_failed = i;
      }
    }
    summaries.push_back(std::move(s));
  }

  if (!best) {
    SolveResult r = best_failed ? std::move(*runs[*best_failed]) : SolveResult{};
    if (best_failed) r.start_index = starts[*best_failed].k;
    r.starts = std::move(summaries);
    throw AllStartsFailed(std::move(r));
  }
  SolveResult r = std::move(*runs[*best]);
  r.start_index = starts[*best].k;
  r.starts = std::move(summaries);
  return r;
}

}  // namespace singdist
