#include <cmath>
#include <limits>

#include "singdist/linalg.hpp"

namespace singdist {

// Unpreconditioned MINRES (Paige & Saunders recurrences).
IterativeSolveResult solve_symmetric_iterative(const LinearOperator& op, const Vec& b, double tol,
                                               int max_iter) {
  if (!op.symmetric) throw std::invalid_argument("MINRES requires a symmetric operator");
  require_dims(op.rows == op.cols && b.size() == op.rows, "MINRES: dimension mismatch");

  const Index n = b.size();
  IterativeSolveResult out;
  out.x = Vec::Zero(n);
  const double beta1 = b.norm();
  if (beta1 == 0.0) {
    out.converged = true;
    return out;
  }

  Vec r1 = b, r2 = b, y = b;
  Vec w = Vec::Zero(n), w1 = Vec::Zero(n), w2 = Vec::Zero(n);
  double oldb = 0.0, beta = beta1, dbar = 0.0, epsln = 0.0;
  double phibar = beta1, cs = -1.0, sn = 0.0;
  constexpr double tiny = std::numeric_limits<double>::min();

  for (int itn = 1; itn <= max_iter; ++itn) {
    const Vec v = y / beta;
    y = op.apply(v);
    if (itn >= 2) y -= (beta / oldb) * r1;
    const double alfa = v.dot(y);
    y -= (alfa / beta) * r2;
    r1 = r2;
    r2 = y;
    oldb = beta;
    beta = y.norm();

    const double oldeps = epsln;
    const double delta = cs * dbar + sn * alfa;
    const double gbar = sn * dbar - cs * alfa;
    epsln = sn * beta;
    dbar = -cs * beta;
    const double gamma = std::hypot(gbar, beta);
    out.iterations = itn;
    if (gamma <= tiny) {
      out.breakdown = true;
      break;
    }
    cs = gbar / gamma;
    sn = beta / gamma;
    const double phi = cs * phibar;
    phibar = sn * phibar;

    w1 = w2;
    w2 = w;
    w = (v - oldeps * w1 - delta * w2) / gamma;
    out.x += phi * w;

    if (phibar / beta1 <= tol) break;
    if (beta <= tiny) break;  // Krylov space exhausted: x is exact
  }
  out.relative_residual = (b - op.apply(out.x)).norm() / beta1;
  out.converged = out.relative_residual <= tol * (1.0 + 1e-8) || (!out.breakdown && phibar / beta1 <= tol);
  return out;
}

}  // namespace singdist
