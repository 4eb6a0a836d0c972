#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "ldl/error.hpp"
#include "ldl/linalg.hpp"

namespace ldl::io {

static_assert(std::endian::native == std::endian::little, "binary matrix format assumes little-endian hosts");

inline constexpr char kMatrixMagic[4] = {'L', 'D', 'L', 'M'};

/// Dense binary matrix: magic, u64 rows, u64 cols, row-major float64.
inline void write_matrix(std::ostream& os, const Matrix& m) {
  os.write(kMatrixMagic, 4);
  const std::uint64_t dims[2] = {static_cast<std::uint64_t>(m.rows()), static_cast<std::uint64_t>(m.cols())};
  os.write(reinterpret_cast<const char*>(dims), sizeof dims);
  os.write(reinterpret_cast<const char*>(m.data()), static_cast<std::streamsize>(sizeof(double) * m.size()));
  if (!os) throw Error("io", "failed to write matrix");
}

inline Matrix read_matrix(std::istream& is) {
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, kMatrixMagic, 4) != 0) throw ParseError("not a binary matrix");
  std::uint64_t dims[2];
  if (!is.read(reinterpret_cast<char*>(dims), sizeof dims)) throw ParseError("truncated matrix header");
  Matrix m(static_cast<Eigen::Index>(dims[0]), static_cast<Eigen::Index>(dims[1]));
  if (!is.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(sizeof(double) * m.size())))
    throw ParseError("truncated matrix body");
  return m;
}

}  // namespace ldl::io
