#pragma once

#include <cmath>
#include <complex>
#include <random>
#include <span>
#include <vector>

#include "nmg/dense.hpp"

namespace nmg::test {

inline std::vector<double> random_vector(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist;
  std::vector<double> v(n);
  for (auto& x : v) x = dist(rng);
  return v;
}

inline DenseMatrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  auto v = random_vector(rows * cols, seed);
  DenseMatrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = v[i * cols + j];
  return m;
}

inline double rel_error(std::span<const double> got, std::span<const double> want) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < got.size(); ++i) {
    num += (got[i] - want[i]) * (got[i] - want[i]);
    den += want[i] * want[i];
  }
  return std::sqrt(num) / std::max(std::sqrt(den), 1e-300);
}

inline double rel_error(std::span<const std::complex<double>> got, std::span<const std::complex<double>> want) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < got.size(); ++i) {
    num += std::norm(got[i] - want[i]);
    den += std::norm(want[i]);
  }
  return std::sqrt(num) / std::max(std::sqrt(den), 1e-300);
}

/// Brute-force O(n^2) DFT, X[k] = sum_j x[j] exp(-2 pi i jk / n).
inline std::vector<std::complex<double>> direct_dft(std::span<const std::complex<double>> x) {
  const std::size_t n = x.size();
  std::vector<std::complex<double>> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<double> s{0.0, 0.0};
    for (std::size_t j = 0; j < n; ++j) {
      const double a = -2.0 * M_PI * static_cast<double>((j * k) % n) / static_cast<double>(n);
      s += x[j] * std::complex<double>(std::cos(a), std::sin(a));
    }
    out[k] = s;
  }
  return out;
}

}  // namespace nmg::test
