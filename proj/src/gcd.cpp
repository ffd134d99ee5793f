#include "singdist/gcd.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <Eigen/QR>
#include "json.hpp"

namespace singdist::gcd {

void validate(const PolynomialPair& pair) {
  for (const Vec* c : {&pair.p, &pair.q}) {
    if (c->size() < 2) throw InputError("polynomials must have degree at least 1");
    if (!c->allFinite()) throw InputError("polynomial coefficients must be finite");
    if ((*c)[c->size() - 1] == 0.0) throw InputError("leading coefficient is zero");
  }
}

PolynomialPair normalize(PolynomialPair pair) {
  validate(pair);
  pair.gamma_p = 1.0 / pair.p.norm();
  pair.gamma_q = 1.0 / pair.q.norm();
  pair.p *= pair.gamma_p;
  pair.q *= pair.gamma_q;
  return pair;
}

Vec expand_roots(const std::vector<long double>& roots) {
  std::vector<long double> c{1.0L};
  for (long double r : roots) {
    std::vector<long double> next(c.size() + 1, 0.0L);
    for (std::size_t k = 0; k < c.size(); ++k) {
      next[k + 1] += c[k];
      next[k] -= r * c[k];
    }
    c = std::move(next);
  }
  Vec out(static_cast<Index>(c.size()));
  for (std::size_t k = 0; k < c.size(); ++k) out[static_cast<Index>(k)] = static_cast<double>(c[k]);
  return out;
}

PolynomialPair make_test_polynomials(int degree) {
  if (degree < 1) throw InputError("test polynomial degree must be positive");
  std::vector<long double> rp, rq;
  for (int j = 1; j <= degree; ++j) {
    const long double alpha = (j % 2 == 0 ? 1.0L : -1.0L) * j / 2.0L;
    rp.push_back(alpha);
    rq.push_back(alpha - std::pow(10.0L, -static_cast<long double>(j)));
  }
  PolynomialPair pair;
  pair.p = expand_roots(rp);
  pair.q = expand_roots(rq);
  return normalize(std::move(pair));
}

SylvesterInstance build_sylvester(const PolynomialPair& pair, Index d) {
  validate(pair);
  const Index dp = pair.deg_p(), dq = pair.deg_q();
  if (d < 1 || d > std::min(dp, dq)) throw InputError("GCD degree d out of range");
  SylvesterInstance inst{MatrixHandle(), LinearStructure::full(1, 1), dp, dq, d, dq - d + 1, dp - d + 1};
  const Index rows = dp + inst.cols_p;
  const Index cols = inst.cols_p + inst.cols_q;

  std::vector<SparseCSR> basis;
  Mat a = Mat::Zero(rows, cols);
  auto add_block = [&](const Vec& coeffs, Index col0, Index ncols) {
    const double s = 1.0 / std::sqrt(static_cast<double>(ncols));
    for (Index i = 0; i < coeffs.size(); ++i) {
      std::vector<Eigen::Triplet<double>> t;
      for (Index j = 0; j < ncols; ++j) {
        t.emplace_back(i + j, col0 + j, s);
        a(i + j, col0 + j) = coeffs[i] * s;
      }
      SparseCSR b(rows, cols);
      b.setFromTriplets(t.begin(), t.end());
      b.makeCompressed();
      basis.push_back(std::move(b));
    }
  };
  add_block(pair.p, 0, inst.cols_p);
  add_block(pair.q, inst.cols_p, inst.cols_q);
  inst.A = MatrixHandle(std::move(a));
  inst.structure = LinearStructure(BasisStructure(rows, cols, std::move(basis)));
  return inst;
}

Vec convolve(const Vec& a, const Vec& b) {
  Vec c = Vec::Zero(a.size() + b.size() - 1);
  for (Index i = 0; i < a.size(); ++i) c.segment(i, b.size()) += a[i] * b;
  return c;
}

namespace {

// Columns hold shifted copies of f; C(f) g = f·g.
Mat convolution_matrix(const Vec& f, Index glen) {
  Mat c = Mat::Zero(f.size() + glen - 1, glen);
  for (Index j = 0; j < glen; ++j) c.col(j).segment(j, f.size()) = f;
  return c;
}

}  // namespace

Cofactors extract_cofactors(const SylvesterInstance& inst, const Vec& p_tilde, const Vec& q_tilde,
                            const Vec& v) {
  require_dims(v.size() == inst.cols_p + inst.cols_q, "kernel vector length does not match A_S");
  Cofactors out;
  // p̃·a + q̃·b = 0 with a, b the scaled halves of v, so p̃ = g·(−b), q̃ = g·a.
  const Vec a = v.head(inst.cols_p) / std::sqrt(static_cast<double>(inst.cols_p));
  const Vec b = v.tail(inst.cols_q) / std::sqrt(static_cast<double>(inst.cols_q));
  const double scale = std::max(a.norm(), b.norm());
  if (!(scale > 1e-300)) {
    out.note = "kernel vector has no cofactor content";
    return out;
  }
  out.u = -b / scale;
  out.w = a / scale;
  const Index glen = inst.d + 1;
  Mat lhs(p_tilde.size() + q_tilde.size(), glen);
  lhs << convolution_matrix(out.u, glen), convolution_matrix(out.w, glen);
  Vec rhs(lhs.rows());
  rhs << p_tilde, q_tilde;
  out.g = lhs.colPivHouseholderQr().solve(rhs);
  out.residual = (lhs * out.g - rhs).norm();
  out.extracted = true;
  return out;
}

GcdReport gcd_distance(const PolynomialPair& pair, Index d, const SolverOptions& options) {
  const SylvesterInstance inst = build_sylvester(pair, d);
  const ProblemInstance problem(inst.A, inst.structure, options);
  GcdReport rep;
  rep.d = d;
  rep.result = solve(problem);
  rep.distance = rep.result.distance;
  rep.reliable = rep.distance * rep.distance >= 1e-15;
  const Vec& delta = rep.result.delta_coords;
  rep.p_tilde = pair.p + delta.head(pair.p.size());
  rep.q_tilde = pair.q + delta.tail(pair.q.size());
  rep.cofactors = extract_cofactors(inst, rep.p_tilde, rep.q_tilde, rep.result.v);
  if (!rep.reliable) rep.cofactors.note = "distance below machine precision; reconstruction unreliable";
  return rep;
}

PolynomialPair read_polynomials(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw InputError("cannot open '" + path.string() + "'");
  std::stringstream buf;
  buf << f.rdbuf();
  const std::string text = buf.str();
  PolynomialPair pair;
  auto to_vec = [](const std::vector<double>& x) { return Vec(Eigen::Map<const Vec>(x.data(), static_cast<Index>(x.size()))); };
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    try {
      const auto j = nlohmann::json::parse(text);
      pair.p = to_vec(j.at("p").get<std::vector<double>>());
      pair.q = to_vec(j.at("q").get<std::vector<double>>());
    } catch (const nlohmann::json::exception& e) {
      throw InputError(std::string("polynomial file: ") + e.what());
    }
  } else {
    std::istringstream lines(text);
    std::string line;
    std::vector<std::vector<double>> rows;
    while (std::getline(lines, line)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos || line[line.find_first_not_of(" \t\r")] == '#') continue;
      std::istringstream ss(line);
      std::vector<double> r;
      double x;
      while (ss >> x) r.push_back(x);
      if (!ss.eof()) throw InputError("polynomial file: bad number in '" + line + "'");
      rows.push_back(std::move(r));
    }
    if (rows.size() != 2) throw InputError("polynomial file must hold exactly two coefficient lines");
    pair.p = to_vec(rows[0]);
    pair.q = to_vec(rows[1]);
  }
  validate(pair);
  return pair;
}

void write_polynomials(const std::filesystem::path& path, const PolynomialPair& pair) {
  std::ofstream f(path);
  if (!f) throw InputError("cannot write '" + path.string() + "'");
  char buf[40];
  for (const Vec* c : {&pair.p, &pair.q}) {
    for (Index i = 0; i < c->size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", (*c)[i]);
      f << (i ? " " : "") << buf;
    }
    f << '\n';
  }
}

}  // namespace singdist::gcd
