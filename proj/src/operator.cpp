#include "nmg/operator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "nmg/transfer.hpp"

namespace nmg {

void LinearOperator::check_sizes(std::span<const double> x, std::span<const double> y) const {
  if (x.size() != size() || y.size() != size())
    throw std::invalid_argument("dimension mismatch: operator of size " + std::to_string(size()) +
                                " applied to vector of size " + std::to_string(x.size()));
}

std::vector<double> LinearOperator::apply(std::span<const double> x) const {
  std::vector<double> y(size());
  apply(x, y);
  return y;
}

void LinearOperator::apply_transpose(std::span<const double> x, std::span<double> y) const {
  if (!symmetric_) throw std::logic_error("apply_transpose not available for this operator");
  apply(x, y);
}

std::vector<double> LinearOperator::diagonal() const {
  const std::size_t n = size();
  std::vector<double> d(n), e(n, 0.0), col(n);
  for (std::size_t i = 0; i < n; ++i) {
    e[i] = 1.0;
    apply(e, col);
    d[i] = col[i];
    e[i] = 0.0;
  }
  return d;
}

DenseMatrix LinearOperator::densify(std::size_t cap) const {
  const std::size_t n = size();
  DenseMatrix m(n, n, cap);
  std::vector<double> e(n, 0.0), col(n);
  for (std::size_t j = 0; j < n; ++j) {
    e[j] = 1.0;
    apply(e, col);
    for (std::size_t i = 0; i < n; ++i) m(i, j) = col[i];
    e[j] = 0.0;
  }
  return m;
}

OperatorPtr LinearOperator::coarsen() const {
  auto galerkin = std::make_shared<GalerkinOperator>(shared_from_this());
  if (grid().dims == 1 && galerkin->size() <= kMaterializeCap) return materialize(*galerkin);
  return galerkin;
}

// ---------------------------------------------------------------------------

ToeplitzOperator::ToeplitzOperator(ToeplitzKernel kernel, Grid grid, bool spd)
    : LinearOperator(grid, kernel.symmetric(), spd),
      kernel_(std::move(kernel)),
      matvec_(kernel_),
      transpose_matvec_(ToeplitzKernel(kernel_.first_row, kernel_.first_col)) {
  if (grid.dims != 1 || kernel_.n() != grid.size()) throw std::invalid_argument("toeplitz operator: grid mismatch");
  if (kernel_.circulant() && is_power_of_two(kernel_.n())) {
    circulant_spectrum_ = dft1_real(kernel_.first_col);
  }
}

void ToeplitzOperator::apply(std::span<const double> x, std::span<double> y) const {
  check_sizes(x, y);
  if (circulant_spectrum_.empty()) {
    matvec_.apply(x, y);
    return;
  }
  ComplexVec work(x.begin(), x.end());
  dft1_inplace(work);
  for (std::size_t k = 0; k < work.size(); ++k) work[k] *= circulant_spectrum_[k];
  idft1_inplace(work);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = work[i].real();
}

void ToeplitzOperator::apply_transpose(std::span<const double> x, std::span<double> y) const {
  check_sizes(x, y);
  if (symmetric()) {
    apply(x, y);
    return;
  }
  transpose_matvec_.apply(x, y);
}

std::vector<double> ToeplitzOperator::diagonal() const { return std::vector<double>(size(), kernel_.first_col[0]); }

// ---------------------------------------------------------------------------

TridiagonalOperator::TridiagonalOperator(std::vector<double> lower, std::vector<double> diag,
                                         std::vector<double> upper, Grid grid, bool periodic, bool symmetric,
                                         bool spd)
    : LinearOperator(grid, symmetric, spd),
      lower_(std::move(lower)),
      diag_(std::move(diag)),
      upper_(std::move(upper)),
      periodic_(periodic) {
  if (grid.dims != 1 || diag_.size() != grid.size() || lower_.size() != diag_.size() || upper_.size() != diag_.size())
    throw std::invalid_argument("tridiagonal operator: size mismatch");
}

void TridiagonalOperator::apply(std::span<const double> x, std::span<double> y) const {
  check_sizes(x, y);
  const std::size_t n = size();
  for (std::size_t i = 0; i < n; ++i) {
    double s = diag_[i] * x[i];
    if (i > 0)
      s += lower_[i] * x[i - 1];
    else if (periodic_)
      s += lower_[i] * x[n - 1];
    if (i + 1 < n)
      s += upper_[i] * x[i + 1];
    else if (periodic_)
      s += upper_[i] * x[0];
    y[i] = s;
  }
}

void TridiagonalOperator::apply_transpose(std::span<const double> x, std::span<double> y) const {
  check_sizes(x, y);
  const std::size_t n = size();
  // (A^T x)[j] = sum_i A(i, j) x[i]; A(i, i-1) = lower[i], A(i, i+1) = upper[i].
  for (std::size_t j = 0; j < n; ++j) y[j] = diag_[j] * x[j];
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0)
      y[i - 1] += lower_[i] * x[i];
    else if (periodic_)
      y[n - 1] += lower_[i] * x[i];
    if (i + 1 < n)
      y[i + 1] += upper_[i] * x[i];
    else if (periodic_)
      y[0] += upper_[i] * x[i];
  }
}

// ---------------------------------------------------------------------------

DenseOperator::DenseOperator(DenseMatrix m, Grid grid, bool symmetric, bool spd)
    : LinearOperator(grid, symmetric, spd), m_(std::move(m)) {
  if (m_.rows() != grid.size() || m_.cols() != grid.size()) throw std::invalid_argument("dense operator: size mismatch");
}

void DenseOperator::apply(std::span<const double> x, std::span<double> y) const {
  check_sizes(x, y);
  m_.matvec(x, y);
}

void DenseOperator::apply_transpose(std::span<const double> x, std::span<double> y) const {
  check_sizes(x, y);
  m_.matvec_transpose(x, y);
}

std::vector<double> DenseOperator::diagonal() const {
  std::vector<double> d(size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = m_(i, i);
  return d;
}

DenseMatrix DenseOperator::densify(std::size_t cap) const {
  if (size() > cap) throw std::length_error("dense matrix exceeds cap");
  return m_;
}

// ---------------------------------------------------------------------------

ScaledIdentity::ScaledIdentity(double scale, Grid grid) : LinearOperator(grid, true, scale > 0.0), scale_(scale) {}

void ScaledIdentity::apply(std::span<const double> x, std::span<double> y) const {
  check_sizes(x, y);
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = scale_ * x[i];
}

std::vector<double> ScaledIdentity::diagonal() const { return std::vector<double>(size(), scale_); }

// ---------------------------------------------------------------------------

namespace {
bool all_symmetric(const std::vector<LinearCombination::Term>& terms) {
  return std::all_of(terms.begin(), terms.end(), [](const auto& t) { return t.op->symmetric(); });
}
Grid common_grid(const std::vector<LinearCombination::Term>& terms) {
  if (terms.empty()) throw std::invalid_argument("linear combination needs at least one term");
  for (const auto& t : terms)
    if (!(t.op->grid() == terms.front().op->grid())) throw std::invalid_argument("linear combination: grid mismatch");
  return terms.front().op->grid();
}
}  // namespace

LinearCombination::LinearCombination(std::vector<Term> terms, bool spd)
    : LinearOperator(common_grid(terms), all_symmetric(terms), spd), terms_(std::move(terms)) {}

void LinearCombination::apply(std::span<const double> x, std::span<double> y) const {
  check_sizes(x, y);
  std::fill(y.begin(), y.end(), 0.0);
  std::vector<double> tmp(size());
  for (const auto& t : terms_) {
    t.op->apply(x, tmp);
    for (std::size_t i = 0; i < tmp.size(); ++i) y[i] += t.coeff * tmp[i];
  }
}

void LinearCombination::apply_transpose(std::span<const double> x, std::span<double> y) const {
  check_sizes(x, y);
  std::fill(y.begin(), y.end(), 0.0);
  std::vector<double> tmp(size());
  for (const auto& t : terms_) {
    t.op->apply_transpose(x, tmp);
    for (std::size_t i = 0; i < tmp.size(); ++i) y[i] += t.coeff * tmp[i];
  }
}

std::vector<double> LinearCombination::diagonal() const {
  std::vector<double> d(size(), 0.0);
  for (const auto& t : terms_) {
    const auto td = t.op->diagonal();
    for (std::size_t i = 0; i < d.size(); ++i) d[i] += t.coeff * td[i];
  }
  return d;
}

// ---------------------------------------------------------------------------

GalerkinOperator::GalerkinOperator(OperatorPtr fine)
    : LinearOperator(fine->grid().coarse(), fine->symmetric(), fine->spd()), fine_(std::move(fine)) {}

void GalerkinOperator::apply(std::span<const double> x, std::span<double> y) const {
  check_sizes(x, y);
  const TransferPair t(fine_->grid());
  const auto px = t.interpolate(x);
  const auto apx = fine_->apply(px);
  const auto r = t.restrict(apx);
  std::copy(r.begin(), r.end(), y.begin());
}

void GalerkinOperator::apply_transpose(std::span<const double> x, std::span<double> y) const {
  // (R A P)^T = P^T A^T R^T = (2^d R) A^T (P / 2^d) = R A^T P.
  check_sizes(x, y);
  const TransferPair t(fine_->grid());
  const auto px = t.interpolate(x);
  std::vector<double> apx(px.size());
  fine_->apply_transpose(px, apx);
  const auto r = t.restrict(apx);
  std::copy(r.begin(), r.end(), y.begin());
}

// ---------------------------------------------------------------------------

namespace {
bool kron_symmetric(const std::vector<KroneckerSumOperator::Term>& terms) {
  return std::all_of(terms.begin(), terms.end(), [](const auto& t) { return t.a->symmetric() && t.b->symmetric(); });
}

// y = sum_t coeff * B X A^T (transposed factors when `transpose`).
void kron_apply(const std::vector<KroneckerSumOperator::Term>& terms, std::size_t rows, std::size_t cols,
                std::span<const double> x, std::span<double> y, bool transpose) {
  std::fill(y.begin(), y.end(), 0.0);
  std::vector<double> bx(rows * cols), line_in(cols), line_out(cols);
  for (const auto& t : terms) {
    for (std::size_t j = 0; j < cols; ++j) {
      auto in = x.subspan(j * rows, rows);
      auto out = std::span<double>(bx).subspan(j * rows, rows);
      if (transpose)
        t.b->apply_transpose(in, out);
      else
        t.b->apply(in, out);
    }
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t j = 0; j < cols; ++j) line_in[j] = bx[i + j * rows];
      if (transpose)
        t.a->apply_transpose(line_in, line_out);
      else
        t.a->apply(line_in, line_out);
      for (std::size_t j = 0; j < cols; ++j) y[i + j * rows] += t.coeff * line_out[j];
    }
  }
}
}  // namespace

KroneckerSumOperator::KroneckerSumOperator(std::vector<Term> terms, Grid grid, bool spd)
    : LinearOperator(grid, kron_symmetric(terms), spd), terms_(std::move(terms)) {
  if (grid.dims != 2) throw std::invalid_argument("kronecker operator needs a 2D grid");
  for (const auto& t : terms_) {
    if (t.a->size() != grid.cols || t.b->size() != grid.rows)
      throw std::invalid_argument("dimension mismatch in kronecker term");
  }
}

void KroneckerSumOperator::apply(std::span<const double> x, std::span<double> y) const {
  check_sizes(x, y);
  kron_apply(terms_, grid().rows, grid().cols, x, y, false);
}

void KroneckerSumOperator::apply_transpose(std::span<const double> x, std::span<double> y) const {
  check_sizes(x, y);
  kron_apply(terms_, grid().rows, grid().cols, x, y, true);
}

std::vector<double> KroneckerSumOperator::diagonal() const {
  const std::size_t rows = grid().rows, cols = grid().cols;
  std::vector<double> d(size(), 0.0);
  for (const auto& t : terms_) {
    const auto da = t.a->diagonal();
    const auto db = t.b->diagonal();
    for (std::size_t j = 0; j < cols; ++j)
      for (std::size_t i = 0; i < rows; ++i) d[i + j * rows] += t.coeff * da[j] * db[i];
  }
  return d;
}

DenseMatrix KroneckerSumOperator::densify(std::size_t cap) const {
  const std::size_t rows = grid().rows, cols = grid().cols;
  DenseMatrix m(size(), size(), cap);
  for (const auto& t : terms_) {
    const auto a = t.a->densify(cap);
    const auto b = t.b->densify(cap);
    // (A kron B)((j, i), (l, k)) = A(j, l) B(i, k) with Vec index i + j * rows.
    for (std::size_t j = 0; j < cols; ++j)
      for (std::size_t l = 0; l < cols; ++l) {
        const double ajl = t.coeff * a(j, l);
        if (ajl == 0.0) continue;
        for (std::size_t i = 0; i < rows; ++i)
          for (std::size_t k = 0; k < rows; ++k) m(i + j * rows, k + l * rows) += ajl * b(i, k);
      }
  }
  return m;
}

OperatorPtr KroneckerSumOperator::coarsen() const {
  std::vector<Term> coarse;
  coarse.reserve(terms_.size());
  for (const auto& t : terms_) {
    Term c{t.coeff, t.a->coarsen(), t.a == t.b ? nullptr : t.b->coarsen()};
    if (!c.b) c.b = c.a;
    coarse.push_back(std::move(c));
  }
  return std::make_shared<KroneckerSumOperator>(std::move(coarse), grid().coarse(), spd());
}

// ---------------------------------------------------------------------------

std::vector<double> kron_matvec(const LinearOperator& a, const LinearOperator& b, std::span<const double> x) {
  const std::size_t n = b.size();
  if (a.size() != n || x.size() != n * n) throw std::invalid_argument("dimension mismatch");
  std::vector<double> bx(n * n), y(n * n), line_in(n), line_out(n);
  for (std::size_t j = 0; j < n; ++j) b.apply(x.subspan(j * n, n), std::span<double>(bx).subspan(j * n, n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) line_in[j] = bx[i + j * n];
    a.apply(line_in, line_out);
    for (std::size_t j = 0; j < n; ++j) y[i + j * n] = line_out[j];
  }
  return y;
}

OperatorPtr materialize(const LinearOperator& op) {
  if (op.grid().dims != 1) throw std::invalid_argument("materialize expects a 1D operator");
  DenseMatrix m = op.densify();
  const std::size_t n = m.rows();
  double scale = 0.0;
  for (double v : m.data()) scale = std::max(scale, std::abs(v));
  const double tol = 1e-13 * std::max(scale, 1e-300);
  bool toeplitz = n >= 2;
  for (std::size_t i = 1; i < n && toeplitz; ++i)
    for (std::size_t j = 1; j < n; ++j)
      if (std::abs(m(i, j) - m(i - 1, j - 1)) > tol) {
        toeplitz = false;
        break;
      }
  if (toeplitz) {
    std::vector<double> col(n), row(n);
    for (std::size_t i = 0; i < n; ++i) {
      col[i] = m(i, 0);
      row[i] = m(0, i);
    }
    if (op.symmetric()) {
      for (std::size_t i = 0; i < n; ++i) col[i] = row[i] = 0.5 * (col[i] + row[i]);
      bool wraps = true;
      for (std::size_t j = 1; j < n && wraps; ++j) wraps = std::abs(col[j] - col[n - j]) <= tol;
      if (wraps) {
        for (std::size_t j = 1; 2 * j <= n; ++j) {
          const double v = 0.5 * (col[j] + col[n - j]);
          col[j] = row[j] = col[n - j] = row[n - j] = v;
        }
      }
    }
    ToeplitzKernel k(std::move(col), std::move(row));
    return std::make_shared<ToeplitzOperator>(std::move(k), op.grid(), op.spd());
  }
  if (op.symmetric()) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) m(i, j) = m(j, i) = 0.5 * (m(i, j) + m(j, i));
  }
  return std::make_shared<DenseOperator>(std::move(m), op.grid(), op.symmetric(), op.spd());
}

}  // namespace nmg
