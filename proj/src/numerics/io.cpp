#include "ripalm/numerics/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

#include "ripalm/error.hpp"

namespace ripalm::io {
namespace {

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

double parse_double(const std::string& token, const std::filesystem::path& path) {
  char* end = nullptr;
  const double value = std::strtod(token.c_str(), &end);
  if (end == token.c_str() || *end != '\0') {
    throw InputError("'" + path.string() + "': malformed number '" + token + "'");
  }
  if (!std::isfinite(value)) {
    throw InputError("'" + path.string() + "': non-finite entry '" + token + "'");
  }
  return value;
}

long parse_count(const std::string& token, const std::filesystem::path& path) {
  char* end = nullptr;
  const long value = std::strtol(token.c_str(), &end, 10);
  if (end == token.c_str() || *end != '\0' || value < 0) {
    throw InputError("'" + path.string() + "': malformed size '" + token + "'");
  }
  return value;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> tokens;
  std::string current;
  for (char c : line) {
    if (c == ',' || c == ' ' || c == '\t' || c == '\r') {
      if (!current.empty()) tokens.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

}  // namespace

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void write_vector(const std::filesystem::path& path, const Vector& v) {
  auto out = open_out(path);
  out << v.size() << '\n';
  for (Index i = 0; i < v.size(); ++i) out << format_double(v[i]) << '\n';
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

Vector read_vector(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::string token;
  if (!(in >> token)) throw InputError("'" + path.string() + "': missing length header");
  const long len = parse_count(token, path);
  Vector v(len);
  for (long i = 0; i < len; ++i) {
    if (!(in >> token)) throw InputError("'" + path.string() + "': fewer entries than declared");
    v[i] = parse_double(token, path);
  }
  if (in >> token) throw InputError("'" + path.string() + "': more entries than declared");
  return v;
}

void write_matrix(const std::filesystem::path& path, const Matrix& a) {
  auto out = open_out(path);
  out << a.rows() << ' ' << a.cols() << '\n';
  std::string line;
  for (Index i = 0; i < a.rows(); ++i) {
    line.clear();
    for (Index j = 0; j < a.cols(); ++j) {
      if (j) line.push_back(' ');
      line += format_double(a(i, j));
    }
    out << line << '\n';
  }
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

Matrix read_matrix(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::string tok_rows, tok_cols, token;
  if (!(in >> tok_rows >> tok_cols)) {
    throw InputError("'" + path.string() + "': missing '<rows> <cols>' header");
  }
  const long rows = parse_count(tok_rows, path);
  const long cols = parse_count(tok_cols, path);
  Matrix a(rows, cols);
  for (long i = 0; i < rows; ++i) {
    for (long j = 0; j < cols; ++j) {
      if (!(in >> token)) throw InputError("'" + path.string() + "': fewer entries than declared");
      a(i, j) = parse_double(token, path);
    }
  }
  if (in >> token) throw InputError("'" + path.string() + "': more entries than declared");
  return a;
}

Matrix read_grid(const std::filesystem::path& path) {
  std::vector<std::vector<std::string>> rows;
  {
    auto in = open_in(path);
    std::string line;
    while (std::getline(in, line)) {
      auto tokens = split(line);
      if (!tokens.empty()) rows.push_back(std::move(tokens));
    }
  }
  if (rows.empty()) throw InputError("'" + path.string() + "': empty grid");
  // A two-integer first line whose product matches the remaining entry count
  // is a matrix-format header.
  if (rows.size() > 1 && rows.front().size() == 2) {
    std::size_t rest = 0;
    for (std::size_t r = 1; r < rows.size(); ++r) rest += rows[r].size();
    char* e1 = nullptr;
    char* e2 = nullptr;
    const long r0 = std::strtol(rows[0][0].c_str(), &e1, 10);
    const long c0 = std::strtol(rows[0][1].c_str(), &e2, 10);
    if (*e1 == '\0' && *e2 == '\0' && r0 > 0 && c0 > 0 &&
        static_cast<std::size_t>(r0 * c0) == rest) {
      return read_matrix(path);
    }
  }
  const std::size_t cols = rows.front().size();
  Matrix a(rows.size(), cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != cols) {
      throw InputError("'" + path.string() + "': ragged grid at row " + std::to_string(i));
    }
    for (std::size_t j = 0; j < cols; ++j) a(i, j) = parse_double(rows[i][j], path);
  }
  return a;
}

}  // namespace ripalm::io
