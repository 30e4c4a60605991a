#pragma once

#include <complex>
#include <cstddef>
#include <map>
#include <mutex>
#include <stdexcept>
#include <vector>

namespace finfty {
namespace detail {

using cplx = std::complex<double>;

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// Twiddle table for a given transform length, built once and shared.
// Entries are exp(-2*pi*i*j/n) for j in [0, n/2).
inline const std::vector<cplx>& twiddles(std::size_t n) {
  static std::mutex mu;
  static std::map<std::size_t, std::vector<cplx>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  std::vector<cplx> w(n / 2);
  const double step = -2.0 * 3.14159265358979323846 / static_cast<double>(n);
  for (std::size_t j = 0; j < n / 2; ++j)
    w[j] = std::polar(1.0, step * static_cast<double>(j));
  return cache.emplace(n, std::move(w)).first->second;
}

// In-place radix-2 transform over a strided view.  sign=-1 forward, +1 inverse
// (inverse leaves out the 1/n factor; callers apply their own normalization).
inline void fft_strided(cplx* data, std::size_t n, std::size_t stride, int sign) {
  if (!is_pow2(n)) throw std::invalid_argument("fft: length must be a power of two");
  if (n == 1) return;
  // bit-reversal permutation
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(data[i * stride], data[j * stride]);
  }
  const auto& w = twiddles(n);
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len >> 1;
    const std::size_t tstep = n / len;
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t j = 0; j < half; ++j) {
        cplx tw = w[j * tstep];
        if (sign > 0) tw = std::conj(tw);
        cplx* a = data + (i + j) * stride;
        cplx* b = data + (i + j + half) * stride;
        const cplx t = *b * tw;
        *b = *a - t;
        *a += t;
      }
    }
  }
}

// d-dimensional transform on a row-major cube with n samples per axis.
inline void fft_nd(std::vector<cplx>& v, int dim, std::size_t n, int sign) {
  if (dim == 1) {
    fft_strided(v.data(), n, 1, sign);
    return;
  }
  if (dim != 2 || v.size() != n * n)
    throw std::invalid_argument("fft_nd: dim must be 1 or 2 with matching size");
  for (std::size_t row = 0; row < n; ++row) fft_strided(v.data() + row * n, n, 1, sign);
  for (std::size_t col = 0; col < n; ++col) fft_strided(v.data() + col, n, n, sign);
}

}  // namespace detail
}  // namespace finfty
