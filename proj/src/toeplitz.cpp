#include "nmg/toeplitz.hpp"

#include <stdexcept>

namespace nmg {

ToeplitzKernel::ToeplitzKernel(std::vector<double> col, std::vector<double> row)
    : first_col(std::move(col)), first_row(std::move(row)) {
  if (first_col.empty() || first_col.size() != first_row.size())
    throw std::invalid_argument("toeplitz kernel: first_col and first_row must have equal positive length");
  if (first_col[0] != first_row[0]) throw std::invalid_argument("toeplitz kernel: first_row[0] != first_col[0]");
}

bool ToeplitzKernel::circulant() const {
  const std::size_t size = n();
  for (std::size_t j = 1; j < size; ++j)
    if (first_row[j] != first_col[size - j]) return false;
  return true;
}

ToeplitzMatvec::ToeplitzMatvec(const ToeplitzKernel& t) : n_(t.n()) {
  if (n_ == 0) throw std::invalid_argument("empty vector");
  embed_ = next_power_of_two(2 * n_ - 1);
  spectrum_.assign(embed_, cplx{0.0, 0.0});
  for (std::size_t i = 0; i < n_; ++i) spectrum_[i] = t.first_col[i];
  for (std::size_t j = 1; j < n_; ++j) spectrum_[embed_ - j] = t.first_row[j];
  dft1_inplace(spectrum_);
}

void ToeplitzMatvec::apply(std::span<const double> x, std::span<double> y) const {
  if (x.size() != n_ || y.size() != n_) throw std::invalid_argument("dimension mismatch");
  ComplexVec work(embed_, cplx{0.0, 0.0});
  for (std::size_t i = 0; i < n_; ++i) work[i] = x[i];
  dft1_inplace(work);
  for (std::size_t k = 0; k < embed_; ++k) work[k] *= spectrum_[k];
  idft1_inplace(work);
  for (std::size_t i = 0; i < n_; ++i) y[i] = work[i].real();
}

std::vector<double> toeplitz_matvec(const ToeplitzKernel& t, std::span<const double> x) {
  if (x.size() != t.n()) throw std::invalid_argument("dimension mismatch");
  std::vector<double> y(x.size());
  ToeplitzMatvec(t).apply(x, y);
  return y;
}

}  // namespace nmg
