#pragma once

#include <span>

#include "adasamp/image.hpp"

namespace adasamp {

enum class FftDirection { forward, inverse };

// In-place orthonormal DFT over a row-major grid (1/sqrt(N) in both
// directions). Unshifted layout: DC at flat index 0. Thread-safe.
void fft_inplace(std::span<cplx> data, const Shape &shape, FftDirection dir);

inline void fft_forward(std::span<cplx> data, const Shape &shape) {
  fft_inplace(data, shape, FftDirection::forward);
}
inline void fft_inverse(std::span<cplx> data, const Shape &shape) {
  fft_inplace(data, shape, FftDirection::inverse);
}

// Signed frequency of bin k on an axis of length n: k for k <= n/2, else k - n.
inline long signed_frequency(std::size_t k, std::size_t n) {
  return (2 * k <= n) ? static_cast<long>(k)
                      : static_cast<long>(k) - static_cast<long>(n);
}

} // namespace adasamp
