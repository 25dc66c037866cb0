#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace eegminer {

// Dense row-major real matrix. Rows are channels throughout this project.
struct Mat {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> v;

  Mat() = default;
  Mat(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), v(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return v[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return v[r * cols + c]; }
  double* row(std::size_t r) { return v.data() + r * cols; }
  const double* row(std::size_t r) const { return v.data() + r * cols; }
  std::size_t size() const { return v.size(); }
};

// Dense row-major complex matrix.
struct CMat {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::complex<double>> v;

  CMat() = default;
  CMat(std::size_t r, std::size_t c) : rows(r), cols(c), v(r * c) {}

  std::complex<double>& operator()(std::size_t r, std::size_t c) { return v[r * cols + c]; }
  std::complex<double> operator()(std::size_t r, std::size_t c) const { return v[r * cols + c]; }
  std::complex<double>* row(std::size_t r) { return v.data() + r * cols; }
  const std::complex<double>* row(std::size_t r) const { return v.data() + r * cols; }
  std::size_t size() const { return v.size(); }
};

}  // namespace eegminer
