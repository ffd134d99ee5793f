#include "singdist/oracle.hpp"

#include <cmath>

#include <Eigen/Cholesky>

namespace singdist::oracle {

OracleEval evaluate(const ProblemInstance& p, const Vec& v, double eps) {
  if (!(eps > 0.0)) throw InputError("oracle: eps must be positive");
  require_dims(v.size() == p.cols(), "oracle: v length does not match A");
  if (std::abs(v.norm() - 1.0) > 1e-10) throw InputError("oracle: v must have unit norm");

  const LinearStructure& s = p.S();
  const Vec r = -p.A().multiply(v);
  OracleEval out;
  if (s.kind() != StructureKind::Basis) {
    const Vec k1 = s.gram_diagonals(Vec::Zero(p.rows()), v).k1;
    out.min_gram_diag = k1.minCoeff();
    out.u = r.cwiseQuotient((k1.array() + eps).matrix());
  } else {
    Mat g = s.gram_M(v);
    out.min_gram_diag = g.diagonal().minCoeff();
    g.diagonal().array() += eps;
    Eigen::LDLT<Mat> ldlt(g);
    out.u = ldlt.solve(r);
  }
  out.f_value = r.dot(out.u);
  out.delta = s.rank1_coordinates(out.u, v);
  out.Delta = s.to_matrix(out.delta);
  out.grad_v = p.A().multiply_transpose(out.u) + s.apply_transpose(out.delta, out.u);
  return out;
}

Certificate certify_point(const ProblemInstance& p, const Vec& v, double distance,
                          std::optional<double> eps, double tol) {
  Certificate c;
  c.eps = eps.value_or(1e-10 * p.norm_A() * p.norm_A());
  c.tol = tol;
  c.distance = distance;
  const OracleEval e = evaluate(p, v.normalized(), c.eps);
  c.f_value = e.f_value;
  c.grad_norm = e.grad_v.norm();
  c.f_gap = std::abs(e.f_value - distance * distance);
  c.min_gram_diag = e.min_gram_diag;
  c.rank_drop = e.min_gram_diag < c.eps;
  c.passed = c.grad_norm <= tol && c.f_gap <= tol * (1.0 + distance * distance);
  return c;
}

Certificate certify_solution(const ProblemInstance& p, const SolveResult& result,
                             std::optional<double> eps, double tol) {
  return certify_point(p, result.v, result.distance, eps, tol);
}

}  // namespace singdist::oracle
