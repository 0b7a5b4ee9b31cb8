#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

namespace radarfm {

// Dense row-major matrix of doubles.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  double* row(std::size_t i) { return data.data() + i * cols; }
  const double* row(std::size_t i) const { return data.data() + i * cols; }

  Matrix transposed() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;
};

// Binary matrix file: 8-byte magic "RFMMAT01", then rows and cols as
// little-endian uint64, then rows*cols little-endian float64 values in
// row-major order.
void write_matrix(const Matrix& m, const std::filesystem::path& path);
Matrix read_matrix(const std::filesystem::path& path);

}  // namespace radarfm
