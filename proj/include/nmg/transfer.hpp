#pragma once

#include <span>
#include <vector>

#include "nmg/grid.hpp"

namespace nmg {

// Full-weighting restriction with stencil [1, 2, 1] / 4 centred on the fine
// point that coincides with each coarse point, and linear interpolation
// P = 2 R^T. Periodic grids wrap, zero grids drop out-of-range neighbours,
// dirichlet grids map 2m-1 interior points to m-1.
std::vector<double> restrict_1d(std::span<const double> fine, GridBoundary b = GridBoundary::periodic);
std::vector<double> interpolate_1d(std::span<const double> coarse, GridBoundary b = GridBoundary::periodic);

/// Tensor-product transfers on column-major rows x cols data (fine shape).
std::vector<double> restrict_2d(std::span<const double> fine, std::size_t rows, std::size_t cols,
                                GridBoundary b = GridBoundary::periodic);
std::vector<double> interpolate_2d(std::span<const double> coarse, std::size_t coarse_rows,
                                   std::size_t coarse_cols, GridBoundary b = GridBoundary::periodic);

/// Variational transfer pair between `fine` and fine.coarse().
struct TransferPair {
  Grid fine;
  Grid coarse;

  explicit TransferPair(Grid fine_grid);

  std::vector<double> restrict(std::span<const double> v) const;
  std::vector<double> interpolate(std::span<const double> v) const;
  /// P^T v, equal to 2^dims * restrict(v).
  std::vector<double> interpolate_adjoint(std::span<const double> v) const;
  /// The constant c in <R u, v> = c <u, P v>.
  double adjoint_scale() const { return fine.dims == 1 ? 0.5 : 0.25; }
};

}  // namespace nmg
