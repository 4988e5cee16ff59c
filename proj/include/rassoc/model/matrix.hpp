#pragma once

#include <cassert>
#include <cstddef>
#include <span>
#include <vector>

namespace rassoc {

// Dense row-major matrix. Rows can be appended one at a time, which is how the
// decoder grows its caches during incremental decoding.
template <typename T>
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<T> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, T fill = T(0)) : rows(r), cols(c), data(r * c, fill) {}

  T* row(std::size_t i) { return data.data() + i * cols; }
  const T* row(std::size_t i) const { return data.data() + i * cols; }
  std::span<T> row_span(std::size_t i) { return {row(i), cols}; }
  std::span<const T> row_span(std::size_t i) const { return {row(i), cols}; }
  T& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  const T& operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  T* append_row() {
    data.resize(data.size() + cols, T(0));
    return row(rows++);
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;
};

// out[n x m] (+)= a[n x k] * b[k x m]
template <typename T>
void gemm_nn(const T* a, const T* b, T* out, std::size_t n, std::size_t k, std::size_t m,
             bool accumulate) {
  for (std::size_t i = 0; i < n; ++i) {
    T* o = out + i * m;
    if (!accumulate) {
      for (std::size_t j = 0; j < m; ++j) o[j] = T(0);
    }
    const T* ai = a + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const T s = ai[p];
      const T* bp = b + p * m;
      for (std::size_t j = 0; j < m; ++j) o[j] += s * bp[j];
    }
  }
}

// out[k x m] += a[n x k]^T * b[n x m]
template <typename T>
void gemm_tn_acc(const T* a, const T* b, T* out, std::size_t n, std::size_t k, std::size_t m) {
  for (std::size_t i = 0; i < n; ++i) {
    const T* ai = a + i * k;
    const T* bi = b + i * m;
    for (std::size_t p = 0; p < k; ++p) {
      const T s = ai[p];
      T* o = out + p * m;
      for (std::size_t j = 0; j < m; ++j) o[j] += s * bi[j];
    }
  }
}

// out[n x k] += a[n x m] * b[k x m]^T
template <typename T>
void gemm_nt_acc(const T* a, const T* b, T* out, std::size_t n, std::size_t m, std::size_t k) {
  for (std::size_t i = 0; i < n; ++i) {
    const T* ai = a + i * m;
    T* o = out + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const T* bp = b + p * m;
      T s = T(0);
      for (std::size_t j = 0; j < m; ++j) s += ai[j] * bp[j];
      o[p] += s;
    }
  }
}

}  // namespace rassoc
