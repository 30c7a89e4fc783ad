#pragma once

#include <filesystem>
#include <iosfwd>

#include "orthonet/matrix_types.hpp"

namespace orthonet {

// Plain-text matrix format: a first line holding p, then p lines of p
// space-separated values printed with 17 significant digits, which round-trips
// every finite double exactly.

void write_matrix(std::ostream& out, const Matrix& m);
Matrix read_matrix(std::istream& in);

void save_matrix(const std::filesystem::path& path, const Matrix& m);
Matrix load_matrix(const std::filesystem::path& path);

/// Rectangular variant used for data matrices (regression inputs/targets):
/// first line `rows cols`, then the rows.
void write_data_matrix(std::ostream& out, const Matrix& m);
Matrix read_data_matrix(std::istream& in);
Matrix load_data_matrix(const std::filesystem::path& path);

}  // namespace orthonet
