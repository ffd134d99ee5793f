#include "singdist/matrix.hpp"

#include <cmath>

namespace singdist {

MatrixHandle::MatrixHandle(Mat dense) {
  if (!dense.allFinite()) throw InputError("matrix contains non-finite values");
  rep_ = std::move(dense);
}

MatrixHandle::MatrixHandle(SparseCSR sparse) {
  sparse.makeCompressed();
  for (Index k = 0; k < sparse.nonZeros(); ++k) {
    if (!std::isfinite(sparse.valuePtr()[k])) throw InputError("matrix contains non-finite values");
  }
  // Eigen keeps inner indices sorted; duplicates cannot survive setFromTriplets.
  rep_ = std::move(sparse);
}

Index MatrixHandle::rows() const {
  return std::visit([](const auto& m) -> Index { return m.rows(); }, rep_);
}

Index MatrixHandle::cols() const {
  return std::visit([](const auto& m) -> Index { return m.cols(); }, rep_);
}

Index MatrixHandle::nnz() const {
  if (is_sparse()) return sparse().nonZeros();
  return dense().size();
}

Mat MatrixHandle::to_dense() const {
  if (is_sparse()) return Mat(sparse());
  return dense();
}

SparseCSR MatrixHandle::to_sparse() const {
  if (is_sparse()) return sparse();
  SparseCSR s = dense().sparseView(0.0, 0.0);
  s.makeCompressed();
  return s;
}

Vec MatrixHandle::multiply(const Vec& x) const {
  require_dims(x.size() == cols(), "MatrixHandle::multiply: size mismatch");
  if (is_sparse()) return sparse() * x;
  return dense() * x;
}

Vec MatrixHandle::multiply_transpose(const Vec& x) const {
  require_dims(x.size() == rows(), "MatrixHandle::multiply_transpose: size mismatch");
  if (is_sparse()) return sparse().transpose() * x;
  return dense().transpose() * x;
}

double MatrixHandle::frobenius_norm() const {
  if (is_sparse()) return sparse().norm();
  return dense().norm();
}

std::vector<std::pair<Index, Index>> MatrixHandle::nonzero_pattern() const {
  std::vector<std::pair<Index, Index>> out;
  if (is_sparse()) {
    const auto& s = sparse();
    out.reserve(s.nonZeros());
    for (Index i = 0; i < s.outerSize(); ++i) {
      for (SparseCSR::InnerIterator it(s, i); it; ++it) {
        if (it.value() != 0.0) out.emplace_back(i, it.col());
      }
    }
    return out;
  }
  const auto& d = dense();
  for (Index i = 0; i < d.rows(); ++i) {
    for (Index j = 0; j < d.cols(); ++j) {
      if (d(i, j) != 0.0) out.emplace_back(i, j);
    }
  }
  return out;
}

}  // namespace singdist
