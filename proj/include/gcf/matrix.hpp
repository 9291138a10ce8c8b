#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace gcf {

// Non-owning row-major matrix view.
struct MatrixView {
  std::span<const double> data;
  std::size_t rows = 0;
  std::size_t cols = 0;

  std::span<const double> row(std::size_t i) const {
    return data.subspan(i * cols, cols);
  }
  double operator()(std::size_t i, std::size_t j) const {
    return data[i * cols + j];
  }
};

struct Matrix {
  std::vector<double> data;
  std::size_t rows = 0;
  std::size_t cols = 0;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : data(r * c, fill), rows(r), cols(c) {}

  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const {
    return data[i * cols + j];
  }
  std::span<double> row(std::size_t i) { return {data.data() + i * cols, cols}; }
  std::span<const double> row(std::size_t i) const {
    return {data.data() + i * cols, cols};
  }
  MatrixView view() const { return {data, rows, cols}; }
};

}  // namespace gcf
