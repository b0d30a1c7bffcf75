#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "nmg/dense.hpp"
#include "nmg/grid.hpp"
#include "nmg/toeplitz.hpp"

namespace nmg {

class LinearOperator;
using OperatorPtr = std::shared_ptr<const LinearOperator>;

/// Matrix-free linear operator on the unknowns of a Grid.
class LinearOperator : public std::enable_shared_from_this<LinearOperator> {
 public:
  LinearOperator(Grid grid, bool symmetric, bool spd) : grid_(grid), symmetric_(symmetric), spd_(spd) {}
  virtual ~LinearOperator() = default;

  const Grid& grid() const { return grid_; }
  std::size_t size() const { return grid_.size(); }
  bool symmetric() const { return symmetric_; }
  bool spd() const { return spd_; }

  virtual void apply(std::span<const double> x, std::span<double> y) const = 0;
  std::vector<double> apply(std::span<const double> x) const;

  /// A^T x. Symmetric operators reuse apply.
  virtual void apply_transpose(std::span<const double> x, std::span<double> y) const;

  virtual std::vector<double> diagonal() const;

  /// Dense copy obtained by probing basis vectors; refused above `cap` unknowns.
  virtual DenseMatrix densify(std::size_t cap = kDefaultDenseCap) const;

  /// Galerkin coarse operator R A P on grid().coarse().
  virtual OperatorPtr coarsen() const;

 protected:
  void check_sizes(std::span<const double> x, std::span<const double> y) const;

 private:
  Grid grid_;
  bool symmetric_;
  bool spd_;
};

/// Toeplitz (or circulant) operator applied by FFT.
class ToeplitzOperator final : public LinearOperator {
 public:
  ToeplitzOperator(ToeplitzKernel kernel, Grid grid, bool spd);

  const ToeplitzKernel& kernel() const { return kernel_; }
  void apply(std::span<const double> x, std::span<double> y) const override;
  void apply_transpose(std::span<const double> x, std::span<double> y) const override;
  std::vector<double> diagonal() const override;

 private:
  ToeplitzKernel kernel_;
  ToeplitzMatvec matvec_;
  ToeplitzMatvec transpose_matvec_;
  // Circulant kernels of power-of-two size skip the embedding.
  ComplexVec circulant_spectrum_;
};

/// Tridiagonal operator y[i] = lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1],
/// wrapping at the ends when `periodic`.
class TridiagonalOperator final : public LinearOperator {
 public:
  TridiagonalOperator(std::vector<double> lower, std::vector<double> diag, std::vector<double> upper,
                      Grid grid, bool periodic, bool symmetric, bool spd);

  void apply(std::span<const double> x, std::span<double> y) const override;
  void apply_transpose(std::span<const double> x, std::span<double> y) const override;
  std::vector<double> diagonal() const override { return diag_; }

 private:
  std::vector<double> lower_, diag_, upper_;
  bool periodic_;
};

class DenseOperator final : public LinearOperator {
 public:
  DenseOperator(DenseMatrix m, Grid grid, bool symmetric, bool spd);

  const DenseMatrix& matrix() const { return m_; }
  void apply(std::span<const double> x, std::span<double> y) const override;
  void apply_transpose(std::span<const double> x, std::span<double> y) const override;
  std::vector<double> diagonal() const override;
  DenseMatrix densify(std::size_t cap) const override;

 private:
  DenseMatrix m_;
};

/// scale * I
class ScaledIdentity final : public LinearOperator {
 public:
  ScaledIdentity(double scale, Grid grid);
  void apply(std::span<const double> x, std::span<double> y) const override;
  std::vector<double> diagonal() const override;

 private:
  double scale_;
};

/// sum_t coeff_t * A_t over operators sharing one grid.
class LinearCombination final : public LinearOperator {
 public:
  struct Term {
    double coeff;
    OperatorPtr op;
  };
  LinearCombination(std::vector<Term> terms, bool spd);

  void apply(std::span<const double> x, std::span<double> y) const override;
  void apply_transpose(std::span<const double> x, std::span<double> y) const override;
  std::vector<double> diagonal() const override;

 private:
  std::vector<Term> terms_;
};

/// Matrix-free Galerkin product R A P with the grid's transfer pair.
class GalerkinOperator final : public LinearOperator {
 public:
  explicit GalerkinOperator(OperatorPtr fine);

  const OperatorPtr& fine() const { return fine_; }
  void apply(std::span<const double> x, std::span<double> y) const override;
  void apply_transpose(std::span<const double> x, std::span<double> y) const override;

 private:
  OperatorPtr fine_;
};

/// sum_t coeff_t * (A_t kron B_t) acting on Vec(X) of a rows x cols matrix X,
/// i.e. X -> sum_t coeff_t * B_t X A_t^T. B_t acts along columns (rows
/// axis), A_t along rows.
class KroneckerSumOperator final : public LinearOperator {
 public:
  struct Term {
    double coeff;
    OperatorPtr a;  // cols x cols
    OperatorPtr b;  // rows x rows
  };
  KroneckerSumOperator(std::vector<Term> terms, Grid grid, bool spd);

  const std::vector<Term>& terms() const { return terms_; }
  void apply(std::span<const double> x, std::span<double> y) const override;
  void apply_transpose(std::span<const double> x, std::span<double> y) const override;
  std::vector<double> diagonal() const override;
  DenseMatrix densify(std::size_t cap) const override;
  /// Coarsens factor by factor: (R kron R)(A kron B)(P kron P) = RAP kron RBP.
  OperatorPtr coarsen() const override;

 private:
  std::vector<Term> terms_;
};

/// Mat((A kron B) Vec(X)) = B X A^T for square n x n X (column-major Vec).
std::vector<double> kron_matvec(const LinearOperator& a, const LinearOperator& b, std::span<const double> x);

/// Replaces a 1D operator by a stored equivalent: a Toeplitz operator when the
/// dense probe is Toeplitz to rounding, otherwise a dense operator.
OperatorPtr materialize(const LinearOperator& op);

/// Unknown counts at or below this are materialized after Galerkin coarsening.
inline constexpr std::size_t kMaterializeCap = 1024;

}  // namespace nmg
