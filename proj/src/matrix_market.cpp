#include "singdist/matrix_market.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace singdist::mm {

namespace {

enum class Format { Coordinate, Array };
enum class Field { Real, Integer, Pattern };
enum class Symmetry { General, Symmetric, Skew };

struct Header {
  Format format;
  Field field;
  Symmetry symmetry;
};

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

Header parse_banner(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InputError("Matrix Market: empty input");
  std::istringstream ss(line);
  std::string banner, object, format, field, symmetry;
  ss >> banner >> object >> format >> field >> symmetry;
  if (banner != "%%MatrixMarket") throw InputError("Matrix Market: missing %%MatrixMarket banner");
  if (lower(object) != "matrix") throw InputError("Matrix Market: only 'matrix' objects are supported");
  Header h{};
  format = lower(format);
  if (format == "coordinate") h.format = Format::Coordinate;
  else if (format == "array") h.format = Format::Array;
  else throw InputError("Matrix Market: unknown format '" + format + "'");
  field = lower(field);
  if (field == "real" || field == "double") h.field = Field::Real;
  else if (field == "integer") h.field = Field::Integer;
  else if (field == "pattern") h.field = Field::Pattern;
  else if (field == "complex") throw InputError("Matrix Market: complex matrices are not supported");
  else throw InputError("Matrix Market: unknown field '" + field + "'");
  symmetry = lower(symmetry);
  if (symmetry == "general") h.symmetry = Symmetry::General;
  else if (symmetry == "symmetric") h.symmetry = Symmetry::Symmetric;
  else if (symmetry == "skew-symmetric") h.symmetry = Symmetry::Skew;
  else if (symmetry == "hermitian") throw InputError("Matrix Market: hermitian matrices are not supported");
  else throw InputError("Matrix Market: unknown symmetry '" + symmetry + "'");
  if (h.format == Format::Array && h.field == Field::Pattern) {
    throw InputError("Matrix Market: array format cannot carry a pattern field");
  }
  return h;
}

// Next non-comment, non-blank line.
bool data_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    auto pos = line.find_first_not_of(" \t\r");
    if (pos == std::string::npos || line[pos] == '%') continue;
    return true;
  }
  return false;
}

struct Coordinate {
  Index rows = 0, cols = 0;
  std::vector<Eigen::Triplet<double>> entries;
};

Coordinate read_coordinate(std::istream& in, const Header& h) {
  std::string line;
  if (!data_line(in, line)) throw InputError("Matrix Market: missing size line");
  Coordinate c;
  long long nnz = 0;
  {
    std::istringstream ss(line);
    if (!(ss >> c.rows >> c.cols >> nnz) || c.rows <= 0 || c.cols <= 0 || nnz < 0) {
      throw InputError("Matrix Market: bad size line '" + line + "'");
    }
  }
  c.entries.reserve(static_cast<std::size_t>(nnz) * (h.symmetry == Symmetry::General ? 1 : 2));
  for (long long k = 0; k < nnz; ++k) {
    if (!data_line(in, line)) throw InputError("Matrix Market: fewer entries than declared");
    std::istringstream ss(line);
    long long i = 0, j = 0;
    double value = 1.0;
    if (!(ss >> i >> j)) throw InputError("Matrix Market: bad entry line '" + line + "'");
    if (h.field != Field::Pattern && !(ss >> value)) {
      throw InputError("Matrix Market: missing value in '" + line + "'");
    }
    if (i < 1 || i > c.rows || j < 1 || j > c.cols) throw InputError("Matrix Market: index out of range");
    c.entries.emplace_back(i - 1, j - 1, value);
    if (h.symmetry != Symmetry::General && i != j) {
      c.entries.emplace_back(j - 1, i - 1, h.symmetry == Symmetry::Skew ? -value : value);
    }
  }
  return c;
}

Mat read_array(std::istream& in, const Header& h) {
  std::string line;
  if (!data_line(in, line)) throw InputError("Matrix Market: missing size line");
  Index rows = 0, cols = 0;
  {
    std::istringstream ss(line);
    if (!(ss >> rows >> cols) || rows <= 0 || cols <= 0) {
      throw InputError("Matrix Market: bad array size line '" + line + "'");
    }
  }
  Mat m = Mat::Zero(rows, cols);
  // Values may share lines, so read token-wise.
  std::istringstream tokens;
  auto read_value = [&]() {
    double x;
    while (!(tokens >> x)) {
      if (!data_line(in, line)) throw InputError("Matrix Market: fewer array values than declared");
      tokens.clear();
      tokens.str(line);
    }
    return x;
  };
  for (Index j = 0; j < cols; ++j) {
    const Index start = h.symmetry == Symmetry::General ? 0 : (h.symmetry == Symmetry::Skew ? j + 1 : j);
    for (Index i = start; i < rows; ++i) {
      m(i, j) = read_value();
      if (h.symmetry == Symmetry::Symmetric) m(j, i) = m(i, j);
      if (h.symmetry == Symmetry::Skew) m(j, i) = -m(i, j);
    }
  }
  return m;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw InputError("cannot open '" + path.string() + "'");
  return f;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) throw InputError("cannot write '" + path.string() + "'");
  return f;
}

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x + 0.0);  // no "-0"
  return buf;
}

}  // namespace

MatrixHandle read_matrix(std::istream& in) {
  const Header h = parse_banner(in);
  if (h.format == Format::Array) return MatrixHandle(read_array(in, h));
  Coordinate c = read_coordinate(in, h);
  SparseCSR s(c.rows, c.cols);
  s.setFromTriplets(c.entries.begin(), c.entries.end());  // duplicates are summed
  s.makeCompressed();
  return MatrixHandle(std::move(s));
}

MatrixHandle read_matrix(const std::filesystem::path& path) {
  auto f = open_in(path);
  return read_matrix(f);
}

SparsityPattern read_pattern(std::istream& in) {
  const Header h = parse_banner(in);
  if (h.format != Format::Coordinate) throw InputError("pattern files must use coordinate format");
  Coordinate c = read_coordinate(in, h);
  std::vector<Entry> entries;
  entries.reserve(c.entries.size());
  for (const auto& t : c.entries) entries.push_back({t.row(), t.col()});
  std::sort(entries.begin(), entries.end());
  entries.erase(std::unique(entries.begin(), entries.end()), entries.end());
  return SparsityPattern(c.rows, c.cols, std::move(entries));
}

SparsityPattern read_pattern(const std::filesystem::path& path) {
  auto f = open_in(path);
  return read_pattern(f);
}

Vec read_vector(const std::filesystem::path& path) {
  Mat m = read_matrix(path).to_dense();
  if (m.cols() == 1) return m.col(0);
  if (m.rows() == 1) return m.row(0).transpose();
  throw InputError("'" + path.string() + "' is not a vector");
}

BasisStructure read_basis(const std::filesystem::path& dir) {
  auto manifest = open_in(dir / "manifest.txt");
  std::vector<SparseCSR> basis;
  Index rows = -1, cols = -1;
  std::string line;
  while (std::getline(manifest, line)) {
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    auto last = line.find_last_not_of(" \t\r");
    const std::string name = line.substr(first, last - first + 1);
    SparseCSR m = read_matrix(dir / name).to_sparse();
    if (rows < 0) {
      rows = m.rows();
      cols = m.cols();
    }
    basis.push_back(std::move(m));
  }
  if (basis.empty()) throw InputError("basis manifest lists no matrices");
  return BasisStructure(rows, cols, std::move(basis));
}

void write_matrix(std::ostream& out, const MatrixHandle& m) {
  if (!m.is_sparse()) {
    const Mat& d = m.dense();
    out << "%%MatrixMarket matrix array real general\n" << d.rows() << ' ' << d.cols() << '\n';
    for (Index j = 0; j < d.cols(); ++j)
      for (Index i = 0; i < d.rows(); ++i) out << fmt17(d(i, j)) << '\n';
    return;
  }
  const SparseCSR& s = m.sparse();
  out << "%%MatrixMarket matrix coordinate real general\n"
      << s.rows() << ' ' << s.cols() << ' ' << s.nonZeros() << '\n';
  for (Index i = 0; i < s.outerSize(); ++i)
    for (SparseCSR::InnerIterator it(s, i); it; ++it)
      out << i + 1 << ' ' << it.col() + 1 << ' ' << fmt17(it.value()) << '\n';
}

void write_matrix(const std::filesystem::path& path, const MatrixHandle& m) {
  auto f = open_out(path);
  write_matrix(f, m);
}

void write_vector(const std::filesystem::path& path, const Vec& v) {
  write_matrix(path, MatrixHandle(Mat(v)));
}

void write_pattern(const std::filesystem::path& path, const SparsityPattern& p) {
  auto f = open_out(path);
  f << "%%MatrixMarket matrix coordinate pattern general\n"
    << p.rows() << ' ' << p.cols() << ' ' << p.size() << '\n';
  for (const auto& e : p.entries()) f << e.row + 1 << ' ' << e.col + 1 << '\n';
}

}  // namespace singdist::mm
