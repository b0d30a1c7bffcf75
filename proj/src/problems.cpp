#include "nmg/problems.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace nmg {

std::string to_string(Regularization r) {
  switch (r) {
    case Regularization::tikhonov: return "tikhonov";
    case Regularization::anisotropic: return "anisotropic";
    case Regularization::pde: return "pde";
  }
  return "unknown";
}

std::string to_string(KernelBoundary b) { return b == KernelBoundary::circulant ? "circulant" : "toeplitz-zero"; }
std::string to_string(SigmaUnits u) { return u == SigmaUnits::mesh ? "mesh" : "physical"; }

Regularization regularization_from_string(const std::string& s) {
  if (s == "tikhonov") return Regularization::tikhonov;
  if (s == "anisotropic") return Regularization::anisotropic;
  if (s == "pde") return Regularization::pde;
  throw std::invalid_argument("unknown regularization '" + s + "'");
}

KernelBoundary kernel_boundary_from_string(const std::string& s) {
  if (s == "circulant") return KernelBoundary::circulant;
  if (s == "toeplitz-zero") return KernelBoundary::toeplitz_zero;
  throw std::invalid_argument("unknown boundary '" + s + "'");
}

SigmaUnits sigma_units_from_string(const std::string& s) {
  if (s == "mesh") return SigmaUnits::mesh;
  if (s == "physical") return SigmaUnits::physical;
  throw std::invalid_argument("unknown sigma_units '" + s + "'");
}

void ProblemSpec::validate() const {
  if (dimension != 1 && dimension != 2) throw std::invalid_argument("problem.dimension: must be 1 or 2");
  if (!is_power_of_two(n) || n < 8) throw std::invalid_argument("problem.n: must be a power of two >= 8");
  if (!(alpha > 0.0)) throw std::invalid_argument("problem.alpha: must be positive");
  if (!(kernel_sigma > 0.0)) throw std::invalid_argument("problem.kernel_sigma: must be positive");
  if (dimension == 2 && regularization != Regularization::tikhonov)
    throw std::invalid_argument("problem.regularization: " + to_string(regularization) + " is only valid in 1D");
}

std::string ProblemSpec::canonical() const {
  std::ostringstream os;
  os.precision(17);
  os << "dim=" << dimension << ";n=" << n << ";alpha=" << alpha << ";sigma=" << kernel_sigma
     << ";units=" << to_string(sigma_units) << ";reg=" << to_string(regularization)
     << ";boundary=" << to_string(boundary);
  return os.str();
}

std::uint64_t ProblemSpec::hash() const {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : canonical()) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

ToeplitzKernel build_gaussian_kernel(std::size_t n, double sigma, SigmaUnits units, KernelBoundary boundary) {
  if (!(sigma > 0.0)) throw std::invalid_argument("kernel sigma must be positive");
  if (n == 0) throw std::invalid_argument("kernel size must be positive");
  const double h = 1.0 / static_cast<double>(n);
  const double sigma_phys = units == SigmaUnits::mesh ? sigma * h : sigma;
  auto weight = [&](double lag) {
    const double d = lag * h;
    return h * std::exp(-(d * d) / (2.0 * sigma_phys * sigma_phys));
  };

  // Sum over lag images so the circulant kernel is the periodized Gaussian,
  // whose symbol is positive for every n (K stays PSD even on tiny grids).
  const double sigma_mesh = sigma_phys / h;
  const auto images = static_cast<long>(std::ceil(40.0 * sigma_mesh / static_cast<double>(n))) + 1;
  std::vector<double> col(n, 0.0);
  if (boundary == KernelBoundary::circulant) {
    for (std::size_t d = 0; d < n; ++d)
      for (long k = -images; k <= images; ++k)
        col[d] += weight(static_cast<double>(d) + static_cast<double>(k) * static_cast<double>(n));
  } else {
    for (std::size_t d = 0; d < n; ++d) col[d] = weight(static_cast<double>(d));
  }
  // Full (untruncated) row sum; rows of a toeplitz-zero kernel near the ends
  // lose the mass that falls outside the grid.
  double row_sum = 0.0;
  const auto reach = static_cast<long>(std::ceil(40.0 * sigma_mesh)) + 1;
  for (long d = -reach; d <= reach; ++d) row_sum += weight(static_cast<double>(d));
  for (auto& v : col) v /= row_sum;
  std::vector<double> row = col;
  return ToeplitzKernel(std::move(col), std::move(row));
}

namespace {

GridBoundary grid_boundary_for(KernelBoundary b) {
  return b == KernelBoundary::circulant ? GridBoundary::periodic : GridBoundary::zero;
}

}  // namespace

OperatorPtr build_anisotropic_d(std::size_t n, KernelBoundary boundary) {
  // Unknowns at cell centres, coefficients at the faces between them.
  const double h = 1.0 / static_cast<double>(n);
  auto a = [](double z) { return 1.0 + 0.5 * std::sin(2.0 * std::numbers::pi * z); };
  std::vector<double> lower(n), diag(n), upper(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double left = a(static_cast<double>(i) * h);
    const double right = a(static_cast<double>(i + 1) * h);
    lower[i] = -left;
    upper[i] = -right;
    diag[i] = left + right;
  }
  const bool periodic = boundary == KernelBoundary::circulant;
  return std::make_shared<TridiagonalOperator>(std::move(lower), std::move(diag), std::move(upper),
                                               Grid::line(n, grid_boundary_for(boundary)), periodic, true, false);
}

OperatorPtr build_integral_1d_with_kernel(const ProblemSpec& spec, const ToeplitzKernel& kernel) {
  if (spec.dimension != 1) throw std::invalid_argument("build_integral_1d: dimension must be 1");
  if (spec.regularization == Regularization::pde)
    throw std::invalid_argument("build_integral_1d: regularization 'pde' is not an integral problem");
  if (kernel.n() != spec.n) throw std::invalid_argument("build_integral_1d: kernel size mismatch");
  const Grid grid = Grid::line(spec.n, grid_boundary_for(spec.boundary));
  auto k = std::make_shared<ToeplitzOperator>(kernel, grid, false);
  if (spec.regularization == Regularization::tikhonov) {
    // alpha I + K as one Toeplitz kernel keeps the operator FFT-applicable.
    auto col = kernel.first_col;
    auto row = kernel.first_row;
    col[0] += spec.alpha;
    row[0] += spec.alpha;
    return std::make_shared<ToeplitzOperator>(ToeplitzKernel(std::move(col), std::move(row)), grid, true);
  }
  auto d = build_anisotropic_d(spec.n, spec.boundary);
  std::vector<LinearCombination::Term> terms{{spec.alpha, d}, {1.0, k}};
  return std::make_shared<LinearCombination>(std::move(terms), true);
}

OperatorPtr build_integral_1d(const ProblemSpec& spec) {
  spec.validate();
  if (spec.dimension != 1) throw std::invalid_argument("build_integral_1d: dimension must be 1");
  return build_integral_1d_with_kernel(spec, build_gaussian_kernel(spec.n, spec.kernel_sigma, spec.sigma_units,
                                                                   spec.boundary));
}

OperatorPtr build_pde_1d(std::size_t n, double alpha) {
  if (n < 8) throw std::invalid_argument("build_pde_1d: n must be >= 8");
  const std::size_t m = n - 1;
  const double inv_h2 = static_cast<double>(n) * static_cast<double>(n);
  std::vector<double> lower(m, -inv_h2), diag(m, alpha + 2.0 * inv_h2), upper(m, -inv_h2);
  lower[0] = 0.0;
  upper[m - 1] = 0.0;
  return std::make_shared<TridiagonalOperator>(std::move(lower), std::move(diag), std::move(upper),
                                               Grid::line(m, GridBoundary::dirichlet), false, true, alpha >= 0.0);
}

OperatorPtr build_integral_2d_with_kernel(std::size_t n, double alpha, const ToeplitzKernel& kernel,
                                          KernelBoundary boundary) {
  if (kernel.n() != n) throw std::invalid_argument("build_integral_2d: dimension mismatch");
  const GridBoundary gb = grid_boundary_for(boundary);
  auto identity = std::make_shared<ScaledIdentity>(1.0, Grid::line(n, gb));
  auto k = std::make_shared<ToeplitzOperator>(kernel, Grid::line(n, gb), false);
  std::vector<KroneckerSumOperator::Term> terms{{alpha, identity, identity}, {1.0, k, k}};
  return std::make_shared<KroneckerSumOperator>(std::move(terms), Grid::square(n, gb), alpha > 0.0);
}

OperatorPtr build_integral_2d(std::size_t n, double alpha, double sigma, SigmaUnits units, KernelBoundary boundary) {
  if (!is_power_of_two(n)) throw std::invalid_argument("build_integral_2d: n must be a power of two");
  if (!(alpha > 0.0)) throw std::invalid_argument("build_integral_2d: alpha must be positive");
  return build_integral_2d_with_kernel(n, alpha, build_gaussian_kernel(n, sigma, units, boundary), boundary);
}

OperatorPtr build_problem(const ProblemSpec& spec) {
  spec.validate();
  if (spec.dimension == 2)
    return build_integral_2d(spec.n, spec.alpha, spec.kernel_sigma, spec.sigma_units, spec.boundary);
  if (spec.regularization == Regularization::pde) return build_pde_1d(spec.n, spec.alpha);
  return build_integral_1d(spec);
}

}  // namespace nmg
