#pragma once

#include "kc/numcore/matrix.hpp"

#include <filesystem>
#include <iosfwd>

namespace kc {

// KCMX: "KCMX", u32 rows, u32 cols, rows*cols little-endian float64, row-major.

void write_kcmx(std::ostream& out, const Matrix& m);
Matrix read_kcmx(std::istream& in);

void save_kcmx(const std::filesystem::path& path, const Matrix& m);
Matrix load_kcmx(const std::filesystem::path& path);

}  // namespace kc
