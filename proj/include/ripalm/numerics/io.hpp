#pragma once

#include <filesystem>
#include <string>

#include "ripalm/numerics/dense.hpp"

namespace ripalm::io {

// Text formats. Values are written with 17 significant digits, so reading a
// file back reproduces every double bit-for-bit.
//
//   vector file:  first line "<len>", then one value per line.
//   matrix file:  first line "<rows> <cols>", then one line per row with
//                 `cols` whitespace-separated values (row-major on disk; the
//                 in-memory Matrix stays column-major).
//
// Readers reject NaN/Inf entries and any count mismatch with InputError;
// unreadable files raise IoError.

void write_vector(const std::filesystem::path& path, const Vector& v);
Vector read_vector(const std::filesystem::path& path);

void write_matrix(const std::filesystem::path& path, const Matrix& a);
Matrix read_matrix(const std::filesystem::path& path);

/// Reads a grayscale grid: either the matrix format above, or a headerless
/// grid with one row per line and values separated by commas or whitespace.
Matrix read_grid(const std::filesystem::path& path);

std::string format_double(double x);

}  // namespace ripalm::io
