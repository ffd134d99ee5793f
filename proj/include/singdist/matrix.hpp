#pragma once

#include <functional>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/SparseCore>

#include "singdist/common.hpp"

namespace singdist {

using SparseCSR = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// A real matrix held either densely or in compressed sparse row form.
///
/// Sparse storage is always compressed, with sorted and unique column indices
/// per row. Every stored value must be finite.
class MatrixHandle {
 public:
  MatrixHandle() = default;
  explicit MatrixHandle(Mat dense);
  explicit MatrixHandle(SparseCSR sparse);

  Index rows() const;
  Index cols() const;
  /// Stored entries (rows*cols for dense storage).
  Index nnz() const;
  bool is_sparse() const { return std::holds_alternative<SparseCSR>(rep_); }

  const Mat& dense() const { return std::get<Mat>(rep_); }
  const SparseCSR& sparse() const { return std::get<SparseCSR>(rep_); }

  Mat to_dense() const;
  SparseCSR to_sparse() const;

  Vec multiply(const Vec& x) const;
  Vec multiply_transpose(const Vec& x) const;
  double frobenius_norm() const;

  /// Row/column indices of the stored nonzeros (exact zeros in dense storage
  /// are skipped), in row-major order.
  std::vector<std::pair<Index, Index>> nonzero_pattern() const;

 private:
  std::variant<Mat, SparseCSR> rep_{Mat()};
};

/// Matrix-free linear map y := Op x.
struct LinearOperator {
  Index rows = 0;
  Index cols = 0;
  std::function<Vec(const Vec&)> apply;
  bool symmetric = false;
};

}  // namespace singdist
