#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace nmg {

/// Largest row/column count a DenseMatrix may have unless the caller raises it.
inline constexpr std::size_t kDefaultDenseCap = 4096;

/// Row-major real matrix. Only used where structure is unavailable: coarsest
/// levels, Galerkin materialization and small diagnostics.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, std::size_t cap = kDefaultDenseCap);

  static DenseMatrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }

  void matvec(std::span<const double> x, std::span<double> y) const;
  std::vector<double> matvec(std::span<const double> x) const;
  void matvec_transpose(std::span<const double> x, std::span<double> y) const;

  DenseMatrix multiply(const DenseMatrix& other) const;
  DenseMatrix transpose() const;

  double frobenius_norm() const;
  /// Largest |A(i,j) - A(j,i)|.
  double asymmetry() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// LU factorization with partial pivoting, PA = LU.
class LuFactorization {
 public:
  LuFactorization() = default;
  explicit LuFactorization(DenseMatrix a);

  std::size_t size() const { return lu_.rows(); }
  bool empty() const { return lu_.rows() == 0; }

  std::vector<double> solve(std::span<const double> b) const;
  /// Solves A^T x = b with the same factors.
  std::vector<double> solve_transpose(std::span<const double> b) const;

 private:
  DenseMatrix lu_;
  std::vector<std::size_t> perm_;
};

/// Solves Ax = b by LU with partial pivoting. Throws when a pivot vanishes.
std::vector<double> lu_solve(const DenseMatrix& a, std::span<const double> b);

struct SymmetricEigen {
  std::vector<double> values;  // ascending
  DenseMatrix vectors;         // column i pairs with values[i]
};

/// Cyclic Jacobi eigensolver for small symmetric matrices (diagnostics only).
SymmetricEigen eig_sym(const DenseMatrix& a, double symmetry_tol = 1e-10);

}  // namespace nmg
