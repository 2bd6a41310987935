#include "kc/numcore/kcmx.hpp"

#include "kc/numcore/error.hpp"
#include "kc/numcore/io.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace kc {
namespace {

constexpr std::array<char, 4> kMagic{'K', 'C', 'M', 'X'};

static_assert(std::endian::native == std::endian::little, "KCMX I/O assumes a little-endian host");

void put_u32(std::ostream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint32_t get_u32(std::istream& in) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw Error(ErrorCode::FormatError, "KCMX: truncated header");
  return v;
}

}  // namespace

void write_kcmx(std::ostream& out, const Matrix& m) {
  if (m.rows() > std::numeric_limits<std::uint32_t>::max() ||
      m.cols() > std::numeric_limits<std::uint32_t>::max()) {
    throw Error(ErrorCode::InvalidArgument, "KCMX: matrix too large");
  }
  out.write(kMagic.data(), kMagic.size());
  put_u32(out, static_cast<std::uint32_t>(m.rows()));
  put_u32(out, static_cast<std::uint32_t>(m.cols()));
  out.write(reinterpret_cast<const char*>(m.data()),
            static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(m.size())));
  if (!out) throw Error(ErrorCode::IoError, "KCMX: write failed");
}

Matrix read_kcmx(std::istream& in) {
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw Error(ErrorCode::FormatError, "KCMX: bad magic bytes");
  const std::uint32_t rows = get_u32(in);
  const std::uint32_t cols = get_u32(in);
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  const auto bytes = static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(m.size()));
  in.read(reinterpret_cast<char*>(m.data()), bytes);
  if (in.gcount() != bytes) throw Error(ErrorCode::FormatError, "KCMX: truncated payload");
  return m;
}

void save_kcmx(const std::filesystem::path& path, const Matrix& m) {
  std::ostringstream buf(std::ios::binary);
  write_kcmx(buf, m);
  write_file_atomic(path, buf.str());
}

Matrix load_kcmx(const std::filesystem::path& path) {
  std::istringstream in(read_file(path), std::ios::binary);
  return read_kcmx(in);
}

}  // namespace kc
