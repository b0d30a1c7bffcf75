#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "nmg/operator.hpp"
#include "nmg/toeplitz.hpp"

namespace nmg {

enum class Regularization { tikhonov, anisotropic, pde };
enum class KernelBoundary { circulant, toeplitz_zero };
enum class SigmaUnits { mesh, physical };

std::string to_string(Regularization r);
std::string to_string(KernelBoundary b);
std::string to_string(SigmaUnits u);
Regularization regularization_from_string(const std::string& s);
KernelBoundary kernel_boundary_from_string(const std::string& s);
SigmaUnits sigma_units_from_string(const std::string& s);

/// Declarative description of one benchmark system.
struct ProblemSpec {
  int dimension = 1;
  std::size_t n = 256;  ///< cells per axis, power of two
  double alpha = 1e-4;
  double kernel_sigma = 1.5;
  SigmaUnits sigma_units = SigmaUnits::mesh;
  Regularization regularization = Regularization::tikhonov;
  KernelBoundary boundary = KernelBoundary::circulant;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
  /// Stable FNV-1a hash of the canonical text form, stored in checkpoints.
  std::uint64_t hash() const;
  std::string canonical() const;
};

/// Normalized Gaussian smoothing kernel. Entries follow
/// exp(-(d h)^2 / (2 sigma_phys^2)) times the quadrature weight h, then each
/// full row is scaled to sum to one. Circulant kernels wrap lags modulo n.
ToeplitzKernel build_gaussian_kernel(std::size_t n, double sigma, SigmaUnits units = SigmaUnits::mesh,
                                     KernelBoundary boundary = KernelBoundary::circulant);

/// alpha I + K (tikhonov) or alpha D + K (anisotropic), D = -(a u')' with
/// a(z) = 1 + 0.5 sin(2 pi z) sampled at cell midpoints.
OperatorPtr build_integral_1d(const ProblemSpec& spec);

/// alpha I - u'' on the n - 1 interior points of [0, 1] with u(0) = u(1) = 0.
OperatorPtr build_pde_1d(std::size_t n, double alpha);

/// alpha I kron I + K kron K, applied as X -> alpha X + K X K^T.
OperatorPtr build_integral_2d(std::size_t n, double alpha, double sigma = 1.5, SigmaUnits units = SigmaUnits::mesh,
                              KernelBoundary boundary = KernelBoundary::circulant);

/// Dispatches on spec.dimension and spec.regularization.
OperatorPtr build_problem(const ProblemSpec& spec);

/// Same as build_integral_1d/2d with the convolution replaced by `kernel`
/// (test hook: e.g. the zero kernel or the identity).
OperatorPtr build_integral_1d_with_kernel(const ProblemSpec& spec, const ToeplitzKernel& kernel);
OperatorPtr build_integral_2d_with_kernel(std::size_t n, double alpha, const ToeplitzKernel& kernel,
                                          KernelBoundary boundary = KernelBoundary::circulant);

/// The anisotropic regularization matrix D alone.
OperatorPtr build_anisotropic_d(std::size_t n, KernelBoundary boundary);

}  // namespace nmg
