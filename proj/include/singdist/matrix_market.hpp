#pragma once

#include <filesystem>
#include <iosfwd>

#include "singdist/matrix.hpp"
#include "singdist/structure.hpp"

namespace singdist::mm {

/// Reads a real Matrix Market file. Coordinate files (real, integer or
/// pattern) come back sparse, array files dense. Symmetric and
/// skew-symmetric storage is expanded. Complex and hermitian files are
/// rejected with InputError.
MatrixHandle read_matrix(std::istream& in);
MatrixHandle read_matrix(const std::filesystem::path& path);

/// Positions of a coordinate file; values (if any) are ignored.
SparsityPattern read_pattern(std::istream& in);
SparsityPattern read_pattern(const std::filesystem::path& path);

/// Dense or n x 1 / 1 x n array file as a vector.
Vec read_vector(const std::filesystem::path& path);

/// A basis directory holds `manifest.txt` (one Matrix Market file name per
/// line, blank lines and '#' comments skipped) and the listed matrices, in
/// that order.
BasisStructure read_basis(const std::filesystem::path& dir);

/// Dense handles are written in array format, sparse ones as coordinate
/// real general. Values use 17 significant digits, so reads are exact.
void write_matrix(std::ostream& out, const MatrixHandle& m);
void write_matrix(const std::filesystem::path& path, const MatrixHandle& m);
void write_vector(const std::filesystem::path& path, const Vec& v);
void write_pattern(const std::filesystem::path& path, const SparsityPattern& p);

}  // namespace singdist::mm
