#include "orthonet/matrix_io.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "orthonet/errors.hpp"

namespace orthonet {
namespace {

void write_rows(std::ostream& out, const Matrix& m) {
  std::ostringstream buffer;
  buffer.imbue(std::locale::classic());
  buffer << std::setprecision(17);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j > 0) buffer << ' ';
      buffer << m(i, j);
    }
    buffer << '\n';
  }
  out << buffer.str();
}

long read_extent(std::istream& in, const char* what) {
  long n = 0;
  if (!(in >> n) || n < 1) {
    throw InvalidInput(std::string("matrix text: bad ") + what);
  }
  return n;
}

Matrix read_rows(std::istream& in, long rows, long cols) {
  Matrix m(rows, cols);
  for (long i = 0; i < rows; ++i) {
    for (long j = 0; j < cols; ++j) {
      // operator>> rejects "nan"/"inf"; read tokens so they give a clear error.
      std::string token;
      if (!(in >> token)) {
        throw InvalidInput("matrix text: truncated at row " + std::to_string(i));
      }
      // strtod rather than stod: subnormal values set ERANGE but are valid.
      char* end = nullptr;
      const double value = std::strtod(token.c_str(), &end);
      if (end != token.c_str() + token.size() || !std::isfinite(value)) {
        throw InvalidInput("matrix text: invalid entry '" + token + "'");
      }
      m(i, j) = value;
    }
  }
  return m;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path.string());
  return in;
}

}  // namespace

void write_matrix(std::ostream& out, const Matrix& m) {
  require_square_finite(m, "write_matrix");
  out << m.rows() << '\n';
  write_rows(out, m);
}

Matrix read_matrix(std::istream& in) {
  const long p = read_extent(in, "dimension");
  return read_rows(in, p, p);
}

void save_matrix(const std::filesystem::path& path, const Matrix& m) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write " + path.string());
  write_matrix(out, m);
}

Matrix load_matrix(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_matrix(in);
}

void write_data_matrix(std::ostream& out, const Matrix& m) {
  out << m.rows() << ' ' << m.cols() << '\n';
  write_rows(out, m);
}

Matrix read_data_matrix(std::istream& in) {
  const long rows = read_extent(in, "row count");
  const long cols = read_extent(in, "column count");
  return read_rows(in, rows, cols);
}

Matrix load_data_matrix(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_data_matrix(in);
}

}  // namespace orthonet
