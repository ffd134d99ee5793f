#include "singdist/structure.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace singdist {

// ---------------------------------------------------------------------------
// SparsityPattern

SparsityPattern::SparsityPattern(Index rows, Index cols, std::vector<Entry> entries)
    : rows_(rows), cols_(cols), entries_(std::move(entries)) {
  if (rows <= 0 || cols <= 0) throw InputError("sparsity pattern needs positive dimensions");
  for (const auto& e : entries_) {
    if (e.row < 0 || e.row >= rows || e.col < 0 || e.col >= cols) {
      std::ostringstream os;
      os << "pattern entry (" << e.row << ", " << e.col << ") outside " << rows << "x" << cols;
      throw InputError(os.str());
    }
  }
  std::sort(entries_.begin(), entries_.end());
  if (std::adjacent_find(entries_.begin(), entries_.end()) != entries_.end()) {
    throw InputError("sparsity pattern contains duplicate entries");
  }
  row_offsets_.assign(static_cast<std::size_t>(rows) + 1, 0);
  for (const auto& e : entries_) ++row_offsets_[static_cast<std::size_t>(e.row) + 1];
  for (std::size_t i = 1; i < row_offsets_.size(); ++i) row_offsets_[i] += row_offsets_[i - 1];
}

SparsityPattern SparsityPattern::of_matrix(const MatrixHandle& a) {
  std::vector<Entry> entries;
  for (auto [i, j] : a.nonzero_pattern()) entries.push_back({i, j});
  return SparsityPattern(a.rows(), a.cols(), std::move(entries));
}

SparsityPattern SparsityPattern::dense(Index rows, Index cols) {
  std::vector<Entry> entries;
  entries.reserve(static_cast<std::size_t>(rows * cols));
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) entries.push_back({i, j});
  return SparsityPattern(rows, cols, std::move(entries));
}

std::optional<Index> SparsityPattern::position(Index row, Index col) const {
  if (row < 0 || row >= rows_) return std::nullopt;
  auto first = entries_.begin() + row_offsets_[static_cast<std::size_t>(row)];
  auto last = entries_.begin() + row_offsets_[static_cast<std::size_t>(row) + 1];
  auto it = std::lower_bound(first, last, Entry{row, col});
  if (it == last || it->col != col) return std::nullopt;
  return static_cast<Index>(it - entries_.begin());
}

// ---------------------------------------------------------------------------
// BasisStructure

BasisStructure::BasisStructure(Index rows, Index cols, std::vector<SparseCSR> basis, double tol)
    : rows_(rows), cols_(cols), basis_(std::move(basis)) {
  if (rows <= 0 || cols <= 0) throw InputError("basis structure needs positive dimensions");
  if (static_cast<Index>(basis_.size()) > rows * cols) {
    throw InputError("basis has more elements than rows*cols");
  }
  terms_.reserve(basis_.size());
  for (auto& b : basis_) {
    if (b.rows() != rows || b.cols() != cols) throw InputError("basis matrix has wrong dimensions");
    b.makeCompressed();
    std::vector<Term> t;
    for (Index i = 0; i < b.outerSize(); ++i) {
      for (SparseCSR::InnerIterator it(b, i); it; ++it) {
        if (!std::isfinite(it.value())) throw InputError("basis matrix has non-finite entries");
        if (it.value() != 0.0) t.push_back({i, it.col(), it.value()});
      }
    }
    terms_.push_back(std::move(t));
  }
  // Gram entries only accumulate over shared positions, so disjoint supports
  // cost O(total nnz).
  struct Hit {
    Index element;
    double value;
  };
  std::map<std::pair<Index, Index>, std::vector<Hit>> by_position;
  for (Index k = 0; k < size(); ++k)
    for (const auto& t : terms(k)) by_position[{t.row, t.col}].push_back({k, t.value});
  std::map<std::pair<Index, Index>, double> gram;
  for (const auto& [pos, hits] : by_position) {
    for (std::size_t a = 0; a < hits.size(); ++a)
      for (std::size_t c = a; c < hits.size(); ++c) {
        auto key = std::minmax(hits[a].element, hits[c].element);
        gram[{key.first, key.second}] += hits[a].value * hits[c].value;
      }
  }
  auto fail = [](Index a, Index c, double ip) {
    std::ostringstream os;
    os << "basis is not orthonormal: <P" << a << ", P" << c << "> = " << ip;
    throw InputError(os.str());
  };
  for (Index k = 0; k < size(); ++k) {
    auto it = gram.find({k, k});
    const double norm2 = it == gram.end() ? 0.0 : it->second;
    if (std::abs(norm2 - 1.0) > tol) fail(k, k, norm2);
  }
  for (const auto& [key, ip] : gram) {
    if (key.first != key.second && std::abs(ip) > tol) fail(key.first, key.second, ip);
  }
}

BasisStructure BasisStructure::from_pattern(const SparsityPattern& pattern) {
  std::vector<SparseCSR> basis;
  basis.reserve(pattern.entries().size());
  for (const auto& e : pattern.entries()) {
    SparseCSR m(pattern.rows(), pattern.cols());
    m.insert(e.row, e.col) = 1.0;
    m.makeCompressed();
    basis.push_back(std::move(m));
  }
  return BasisStructure(pattern.rows(), pattern.cols(), std::move(basis));
}

// ---------------------------------------------------------------------------
// LinearStructure

namespace {
template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;
}  // namespace

LinearStructure LinearStructure::full(Index rows, Index cols) {
  if (rows <= 0 || cols <= 0) throw InputError("full structure needs positive dimensions");
  return LinearStructure(FullStructure{rows, cols});
}

LinearStructure::LinearStructure(FullStructure full) : rep_(full) {}

LinearStructure::LinearStructure(SparsityPattern pattern) : rep_(std::move(pattern)) {}
LinearStructure::LinearStructure(BasisStructure basis) : rep_(std::move(basis)) {}

StructureKind LinearStructure::kind() const {
  return std::visit(overloaded{[](const FullStructure&) { return StructureKind::Full; },
                               [](const SparsityPattern&) { return StructureKind::Pattern; },
                               [](const BasisStructure&) { return StructureKind::Basis; }},
                    rep_);
}

Index LinearStructure::rows() const {
  return std::visit([](const auto& s) -> Index {
    if constexpr (std::is_same_v<std::decay_t<decltype(s)>, FullStructure>) return s.rows;
    else return s.rows();
  }, rep_);
}

Index LinearStructure::cols() const {
  return std::visit([](const auto& s) -> Index {
    if constexpr (std::is_same_v<std::decay_t<decltype(s)>, FullStructure>) return s.cols;
    else return s.cols();
  }, rep_);
}

Index LinearStructure::dimension() const {
  return std::visit(overloaded{[](const FullStructure& f) { return f.rows * f.cols; },
                               [](const SparsityPattern& p) { return p.size(); },
                               [](const BasisStructure& b) { return b.size(); }},
                    rep_);
}

void LinearStructure::check_coords(const Vec& coords) const {
  require_dims(coords.size() == dimension(), "structure coordinates have wrong length");
}

Vec LinearStructure::coordinates(const Mat& x) const {
  require_dims(x.rows() == rows() && x.cols() == cols(), "coordinates: matrix dimension mismatch");
  return std::visit(
      overloaded{[&](const FullStructure&) -> Vec { return x.reshaped(); },
                 [&](const SparsityPattern& p) -> Vec {
                   Vec c(p.size());
                   for (Index k = 0; k < p.size(); ++k) {
                     const auto& e = p.entries()[static_cast<std::size_t>(k)];
                     c[k] = x(e.row, e.col);
                   }
                   return c;
                 },
                 [&](const BasisStructure& b) -> Vec {
                   Vec c(b.size());
                   for (Index k = 0; k < b.size(); ++k) {
                     double s = 0.0;
                     for (const auto& t : b.terms(k)) s += t.value * x(t.row, t.col);
                     c[k] = s;
                   }
                   return c;
                 }},
      rep_);
}

Mat LinearStructure::embed(const Vec& coords) const {
  check_coords(coords);
  return std::visit(
      overloaded{[&](const FullStructure& f) -> Mat { return coords.reshaped(f.rows, f.cols); },
                 [&](const SparsityPattern& p) -> Mat {
                   Mat x = Mat::Zero(p.rows(), p.cols());
                   for (Index k = 0; k < p.size(); ++k) {
                     const auto& e = p.entries()[static_cast<std::size_t>(k)];
                     x(e.row, e.col) = coords[k];
                   }
                   return x;
                 },
                 [&](const BasisStructure& b) -> Mat {
                   Mat x = Mat::Zero(b.rows(), b.cols());
                   for (Index k = 0; k < b.size(); ++k)
                     for (const auto& t : b.terms(k)) x(t.row, t.col) += coords[k] * t.value;
                   return x;
                 }},
      rep_);
}

MatrixHandle LinearStructure::to_matrix(const Vec& coords) const {
  check_coords(coords);
  if (kind() == StructureKind::Full) return MatrixHandle(embed(coords));
  std::vector<Eigen::Triplet<double>> trips;
  if (const auto* p = pattern()) {
    trips.reserve(static_cast<std::size_t>(p->size()));
    for (Index k = 0; k < p->size(); ++k) {
      const auto& e = p->entries()[static_cast<std::size_t>(k)];
      trips.emplace_back(e.row, e.col, coords[k]);
    }
  } else {
    const auto& b = *basis();
    for (Index k = 0; k < b.size(); ++k)
      for (const auto& t : b.terms(k)) trips.emplace_back(t.row, t.col, coords[k] * t.value);
  }
  SparseCSR s(rows(), cols());
  s.setFromTriplets(trips.begin(), trips.end());
  s.makeCompressed();
  return MatrixHandle(std::move(s));
}

Mat LinearStructure::project(const Mat& x) const { return embed(coordinates(x)); }

Vec LinearStructure::rank1_coordinates(const Vec& u, const Vec& v) const {
  require_dims(u.size() == rows() && v.size() == cols(), "rank-1 projection: vector size mismatch");
  return std::visit(
      overloaded{[&](const FullStructure&) -> Vec { return (u * v.transpose()).reshaped(); },
                 [&](const SparsityPattern& p) -> Vec {
                   Vec c(p.size());
                   for (Index k = 0; k < p.size(); ++k) {
                     const auto& e = p.entries()[static_cast<std::size_t>(k)];
                     c[k] = u[e.row] * v[e.col];
                   }
                   return c;
                 },
                 [&](const BasisStructure& b) -> Vec {
                   Vec c(b.size());
                   for (Index k = 0; k < b.size(); ++k) {
                     double s = 0.0;
                     for (const auto& t : b.terms(k)) s += t.value * u[t.row] * v[t.col];
                     c[k] = s;
                   }
                   return c;
                 }},
      rep_);
}

MatrixHandle LinearStructure::project_rank1(const Vec& u, const Vec& v) const {
  return to_matrix(rank1_coordinates(u, v));
}

Vec LinearStructure::apply(const Vec& coords, const Vec& x) const {
  check_coords(coords);
  require_dims(x.size() == cols(), "structured apply: vector size mismatch");
  return std::visit(
      overloaded{[&](const FullStructure& f) -> Vec { return coords.reshaped(f.rows, f.cols) * x; },
                 [&](const SparsityPattern& p) -> Vec {
                   Vec y = Vec::Zero(p.rows());
                   for (Index k = 0; k < p.size(); ++k) {
                     const auto& e = p.entries()[static_cast<std::size_t>(k)];
                     y[e.row] += coords[k] * x[e.col];
                   }
                   return y;
                 },
                 [&](const BasisStructure& b) -> Vec {
                   Vec y = Vec::Zero(b.rows());
                   for (Index k = 0; k < b.size(); ++k)
                     for (const auto& t : b.terms(k)) y[t.row] += coords[k] * t.value * x[t.col];
                   return y;
                 }},
      rep_);
}

Vec LinearStructure::apply_transpose(const Vec& coords, const Vec& y) const {
  check_coords(coords);
  require_dims(y.size() == rows(), "structured apply_transpose: vector size mismatch");
  return std::visit(
      overloaded{[&](const FullStructure& f) -> Vec {
                   return coords.reshaped(f.rows, f.cols).transpose() * y;
                 },
                 [&](const SparsityPattern& p) -> Vec {
                   Vec x = Vec::Zero(p.cols());
                   for (Index k = 0; k < p.size(); ++k) {
                     const auto& e = p.entries()[static_cast<std::size_t>(k)];
                     x[e.col] += coords[k] * y[e.row];
                   }
                   return x;
                 },
                 [&](const BasisStructure& b) -> Vec {
                   Vec x = Vec::Zero(b.cols());
                   for (Index k = 0; k < b.size(); ++k)
                     for (const auto& t : b.terms(k)) x[t.col] += coords[k] * t.value * y[t.row];
                   return x;
                 }},
      rep_);
}

Mat LinearStructure::assemble_M(const Vec& v) const {
  require_dims(v.size() == cols(), "assemble_M: vector size mismatch");
  const Index p = dimension();
  Mat m = Mat::Zero(rows(), p);
  Vec e = Vec::Zero(p);
  for (Index k = 0; k < p; ++k) {
    e[k] = 1.0;
    m.col(k) = apply(e, v);
    e[k] = 0.0;
  }
  return m;
}

Mat LinearStructure::assemble_N(const Vec& u) const {
  require_dims(u.size() == rows(), "assemble_N: vector size mismatch");
  const Index p = dimension();
  Mat n = Mat::Zero(cols(), p);
  Vec e = Vec::Zero(p);
  for (Index k = 0; k < p; ++k) {
    e[k] = 1.0;
    n.col(k) = apply_transpose(e, u);
    e[k] = 0.0;
  }
  return n;
}

GramDiagonals LinearStructure::gram_diagonals(const Vec& u, const Vec& v) const {
  require_dims(u.size() == rows() && v.size() == cols(), "gram_diagonals: vector size mismatch");
  if (const auto* p = pattern()) {
    GramDiagonals g{Vec::Zero(p->rows()), Vec::Zero(p->cols())};
    for (const auto& e : p->entries()) {
      g.k1[e.row] += v[e.col] * v[e.col];
      g.k2[e.col] += u[e.row] * u[e.row];
    }
    return g;
  }
  if (kind() == StructureKind::Full) {
    return {Vec::Constant(rows(), v.squaredNorm()), Vec::Constant(cols(), u.squaredNorm())};
  }
  throw std::logic_error("gram_diagonals requires a sparsity structure; use gram_M for bases");
}

Mat LinearStructure::gram_M(const Vec& v) const {
  require_dims(v.size() == cols(), "gram_M: vector size mismatch");
  if (kind() != StructureKind::Basis) {
    Vec k1 = gram_diagonals(Vec::Zero(rows()), v).k1;
    return k1.asDiagonal();
  }
  const auto& b = *basis();
  Mat g = Mat::Zero(rows(), rows());
  Vec col(rows());
  for (Index k = 0; k < b.size(); ++k) {
    col.setZero();
    for (const auto& t : b.terms(k)) col[t.row] += t.value * v[t.col];
    g.noalias() += col * col.transpose();
  }
  return g;
}

}  // namespace singdist
