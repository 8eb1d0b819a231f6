#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace lagsynth {

// Dense row-major matrix of doubles. Deliberately minimal: the numerics live
// in free functions, this only owns storage and bounds-checked indexing in
// debug builds.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) {
    return data[r * cols + c];
  }
  double operator()(std::size_t r, std::size_t c) const {
    return data[r * cols + c];
  }
  double* row(std::size_t r) { return data.data() + r * cols; }
  const double* row(std::size_t r) const { return data.data() + r * cols; }
  std::size_t size() const { return data.size(); }
};

[[noreturn]] inline void fail(const std::string& where,
                              const std::string& what) {
  throw std::runtime_error(where + ": " + what);
}

inline void require(bool cond, const std::string& where,
                    const std::string& what) {
  if (!cond) fail(where, what);
}

}  // namespace lagsynth
