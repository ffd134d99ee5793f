#pragma once

#include <compare>
#include <optional>
#include <variant>
#include <vector>

#include "singdist/common.hpp"
#include "singdist/matrix.hpp"

namespace singdist {

/// Zero-based (row, col) position; ordering is row-major.
struct Entry {
  Index row = 0;
  Index col = 0;
  auto operator<=>(const Entry&) const = default;
};

/// The set J of admissible nonzero positions. Entries are kept in canonical
/// row-major order, which fixes the elementary basis e_i e_jᵀ ordering.
class SparsityPattern {
 public:
  /// Sorts `entries`; throws InputError on duplicates or out-of-range pairs.
  SparsityPattern(Index rows, Index cols, std::vector<Entry> entries);

  /// Pattern of the stored nonzeros of A.
  static SparsityPattern of_matrix(const MatrixHandle& a);
  /// Every position of a rows x cols matrix.
  static SparsityPattern dense(Index rows, Index cols);

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  Index size() const { return static_cast<Index>(entries_.size()); }
  const std::vector<Entry>& entries() const { return entries_; }
  /// CSR-style offsets into entries(), length rows()+1.
  const std::vector<Index>& row_offsets() const { return row_offsets_; }
  std::optional<Index> position(Index row, Index col) const;

 private:
  Index rows_;
  Index cols_;
  std::vector<Entry> entries_;
  std::vector<Index> row_offsets_;
};

/// Orthonormal basis P⁽¹⁾…P⁽ᵖ⁾ of S in the Frobenius inner product.
class BasisStructure {
 public:
  struct Term {
    Index row;
    Index col;
    double value;
  };

  /// Throws InputError unless |⟨P⁽ⁱ⁾, P⁽ʲ⁾⟩ − δᵢⱼ| ≤ tol for all pairs.
  BasisStructure(Index rows, Index cols, std::vector<SparseCSR> basis, double tol = 1e-12);

  /// Elementary matrices e_i e_jᵀ for (i,j) ∈ J, in canonical order.
  static BasisStructure from_pattern(const SparsityPattern& pattern);

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  Index size() const { return static_cast<Index>(terms_.size()); }
  const std::vector<SparseCSR>& basis() const { return basis_; }
  const std::vector<Term>& terms(Index k) const { return terms_[static_cast<std::size_t>(k)]; }

 private:
  Index rows_;
  Index cols_;
  std::vector<SparseCSR> basis_;
  std::vector<std::vector<Term>> terms_;
};

/// Unconstrained structure: Π_S is the identity. Coordinates are vec(X)
/// (column-major), so p = rows*cols.
struct FullStructure {
  Index rows = 0;
  Index cols = 0;
};

enum class StructureKind { Full, Pattern, Basis };

/// Diagonals of K₁ = M(v)M(v)ᵀ and K₂ = N(u)N(u)ᵀ for sparsity structures.
struct GramDiagonals {
  Vec k1;
  Vec k2;
};

/// A linear subspace S of rows x cols real matrices.
///
/// Elements of S are addressed by their coordinates δ ∈ ℝᵖ in the structure's
/// orthonormal basis, so ‖Σ δₖ P⁽ᵏ⁾‖_F = ‖δ‖₂. With that convention:
///   M(v) x  = (Σ xₖ P⁽ᵏ⁾) v          M(v)ᵀ y = coords of Π_S(y vᵀ)
///   N(u) x  = (Σ xₖ P⁽ᵏ⁾)ᵀ u         N(u)ᵀ y = coords of Π_S(u yᵀ)
/// Instances are immutable and safe to share between threads.
class LinearStructure {
 public:
  static LinearStructure full(Index rows, Index cols);
  explicit LinearStructure(FullStructure full);
  explicit LinearStructure(SparsityPattern pattern);
  explicit LinearStructure(BasisStructure basis);

  StructureKind kind() const;
  Index rows() const;
  Index cols() const;
  /// p = dim S.
  Index dimension() const;

  const SparsityPattern* pattern() const { return std::get_if<SparsityPattern>(&rep_); }
  const BasisStructure* basis() const { return std::get_if<BasisStructure>(&rep_); }

  Vec coordinates(const Mat& x) const;
  Mat embed(const Vec& coords) const;
  /// Dense for the full structure, CSR otherwise.
  MatrixHandle to_matrix(const Vec& coords) const;

  Mat project(const Mat& x) const;
  /// Coordinates of Π_S(u vᵀ); O(p) for patterns, never forms u vᵀ.
  Vec rank1_coordinates(const Vec& u, const Vec& v) const;
  MatrixHandle project_rank1(const Vec& u, const Vec& v) const;

  /// (Σ cₖ P⁽ᵏ⁾) x and its transpose.
  Vec apply(const Vec& coords, const Vec& x) const;
  Vec apply_transpose(const Vec& coords, const Vec& y) const;

  Vec apply_M(const Vec& v, const Vec& x) const { return apply(x, v); }
  Vec apply_Mt(const Vec& v, const Vec& y) const { return rank1_coordinates(y, v); }
  Vec apply_N(const Vec& u, const Vec& x) const { return apply_transpose(x, u); }
  Vec apply_Nt(const Vec& u, const Vec& y) const { return rank1_coordinates(u, y); }

  /// Dense M(v) (rows x p) and N(u) (cols x p), column k = P⁽ᵏ⁾v resp. P⁽ᵏ⁾ᵀu.
  Mat assemble_M(const Vec& v) const;
  Mat assemble_N(const Vec& u) const;

  /// Only for Full and Pattern; throws std::logic_error for basis structures.
  GramDiagonals gram_diagonals(const Vec& u, const Vec& v) const;
  /// M(v)M(v)ᵀ for any structure (rows x rows).
  Mat gram_M(const Vec& v) const;

 private:
  void check_coords(const Vec& coords) const;

  std::variant<FullStructure, SparsityPattern, BasisStructure> rep_;
};

}  // namespace singdist
