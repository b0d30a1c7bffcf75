#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "nmg/fft.hpp"

namespace nmg {

/// n x n Toeplitz matrix T(i, j) = first_col[i - j] for i >= j and
/// first_row[j - i] for j > i.
struct ToeplitzKernel {
  std::vector<double> first_col;
  std::vector<double> first_row;

  ToeplitzKernel() = default;
  ToeplitzKernel(std::vector<double> col, std::vector<double> row);

  std::size_t n() const { return first_col.size(); }
  double at(std::size_t i, std::size_t j) const {
    return i >= j ? first_col[i - j] : first_row[j - i];
  }
  bool symmetric() const { return first_col == first_row; }
  /// True when T is circulant, i.e. first_row[j] == first_col[(n - j) % n].
  bool circulant() const;
};

/// T x through circulant embedding of size next_power_of_two(2n - 1).
std::vector<double> toeplitz_matvec(const ToeplitzKernel& t, std::span<const double> x);

/// Cached embedding of a Toeplitz kernel, reused across matvecs.
class ToeplitzMatvec {
 public:
  explicit ToeplitzMatvec(const ToeplitzKernel& t);

  std::size_t n() const { return n_; }
  void apply(std::span<const double> x, std::span<double> y) const;

 private:
  std::size_t n_ = 0;
  std::size_t embed_ = 0;
  ComplexVec spectrum_;
};

}  // namespace nmg
