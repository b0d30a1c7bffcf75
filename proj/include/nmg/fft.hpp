#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace nmg {

using cplx = std::complex<double>;
using ComplexVec = std::vector<cplx>;

/// Column-major complex matrix, element (i, j) stored at i + j * rows.
struct ComplexMat {
  std::size_t rows = 0;
  std::size_t cols = 0;
  ComplexVec data;

  ComplexMat() = default;
  ComplexMat(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c) {}

  cplx& operator()(std::size_t i, std::size_t j) { return data[i + j * rows]; }
  const cplx& operator()(std::size_t i, std::size_t j) const { return data[i + j * rows]; }
};

// Unnormalized forward transform X[k] = sum_j x[j] exp(-2 pi i jk / n); the
// inverse divides by n. Power-of-two lengths use an iterative radix-2 kernel,
// every other length goes through Bluestein's chirp-z reduction.
ComplexVec dft1(std::span<const cplx> v);
ComplexVec idft1(std::span<const cplx> v);
ComplexVec dft1_real(std::span<const double> v);

/// In-place variants, used on hot paths to avoid reallocations.
void dft1_inplace(std::span<cplx> v);
void idft1_inplace(std::span<cplx> v);

ComplexMat dft2(const ComplexMat& m);
ComplexMat idft2(const ComplexMat& m);

/// 2D transforms over a column-major buffer of shape (rows, cols).
void dft2_inplace(std::span<cplx> data, std::size_t rows, std::size_t cols);
void idft2_inplace(std::span<cplx> data, std::size_t rows, std::size_t cols);

/// Angular frequency of natural-order bin j on an n-point grid, wrapped to (-pi, pi].
double bin_frequency(std::size_t j, std::size_t n);

/// Natural bin held at centered position c. Centered order lists bins by
/// ascending angular frequency, so the Nyquist bin (phi = pi) of an even
/// grid comes last.
std::size_t centered_to_natural(std::size_t c, std::size_t n);
std::size_t natural_to_centered(std::size_t j, std::size_t n);

/// Reorders natural-order data into centered order (and back).
template <typename T>
std::vector<T> center_shift(std::span<const T> v) {
  std::vector<T> out(v.size());
  for (std::size_t c = 0; c < v.size(); ++c) out[c] = v[centered_to_natural(c, v.size())];
  return out;
}

template <typename T>
std::vector<T> uncenter_shift(std::span<const T> v) {
  std::vector<T> out(v.size());
  for (std::size_t c = 0; c < v.size(); ++c) out[centered_to_natural(c, v.size())] = v[c];
  return out;
}

bool is_power_of_two(std::size_t n);
std::size_t next_power_of_two(std::size_t n);

}  // namespace nmg
