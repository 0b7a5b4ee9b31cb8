#include "radarfm/matrix.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace radarfm {

namespace {

constexpr char kMagic[8] = {'R', 'F', 'M', 'M', 'A', 'T', '0', '1'};

static_assert(std::endian::native == std::endian::little,
              "matrix io assumes a little-endian host");

void write_u64(std::ofstream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint64_t read_u64(std::ifstream& in) {
  std::uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  return v;
}

}  // namespace

Matrix Matrix::transposed() const {
  Matrix t(cols, rows);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      t.at(j, i) = at(i, j);
    }
  }
  return t;
}

void write_matrix(const Matrix& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot open " + path.string() + " for writing");
  }
  out.write(kMagic, sizeof kMagic);
  write_u64(out, m.rows);
  write_u64(out, m.cols);
  out.write(reinterpret_cast<const char*>(m.data.data()),
            static_cast<std::streamsize>(m.data.size() * sizeof(double)));
  if (!out) {
    throw std::runtime_error("failed writing matrix to " + path.string());
  }
}

Matrix read_matrix(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open " + path.string());
  }
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    throw std::runtime_error(path.string() + " is not a matrix file");
  }
  const std::uint64_t rows = read_u64(in);
  const std::uint64_t cols = read_u64(in);
  Matrix m(rows, cols);
  in.read(reinterpret_cast<char*>(m.data.data()),
          static_cast<std::streamsize>(m.data.size() * sizeof(double)));
  if (!in) {
    throw std::runtime_error("truncated matrix file: " + path.string());
  }
  return m;
}

}  // namespace radarfm
