#pragma once

#include <span>

#include "ptycho/field.hpp"

namespace ptycho::fft {

// Plain (uncentered) transforms backed by FFTW. Forward is unnormalized,
// backward divides by the number of elements so backward(forward(x)) == x.
// Safe to call concurrently; plans are cached per shape.

void forward_inplace(ComplexField2D& field);
void backward_inplace(ComplexField2D& field);
ComplexField2D forward(const ComplexField2D& field);
ComplexField2D backward(const ComplexField2D& field);

void forward_1d_inplace(std::span<Complex> line);
void backward_1d_inplace(std::span<Complex> line);

/// Signed frequency index for bin k of an n-point transform: [-n/2, n/2).
inline double signed_frequency(std::size_t k, std::size_t n) noexcept {
  const auto ki = static_cast<double>(k);
  const auto ni = static_cast<double>(n);
  return k >= (n + 1) / 2 ? ki - ni : ki;
}

}  // namespace ptycho::fft
