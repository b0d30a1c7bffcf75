#pragma once

#include <cstddef>
#include <string>

namespace nmg {

/// How a grid closes at its ends. Determines the transfer stencils.
enum class GridBoundary {
  periodic,   ///< n cells, indices wrap modulo n
  zero,       ///< n cells, values outside the grid are zero
  dirichlet,  ///< 2m-1 interior vertices of an m-interval grid
};

std::string to_string(GridBoundary b);
GridBoundary grid_boundary_from_string(const std::string& s);

/// Shape of the unknowns on one multigrid level. 2D data is stored
/// column-major: entry (i, j) lives at i + j * rows.
struct Grid {
  int dims = 1;
  std::size_t rows = 0;
  std::size_t cols = 1;
  GridBoundary boundary = GridBoundary::periodic;

  static Grid line(std::size_t n, GridBoundary b = GridBoundary::periodic) { return {1, n, 1, b}; }
  static Grid square(std::size_t n, GridBoundary b = GridBoundary::periodic) { return {2, n, n, b}; }

  std::size_t size() const { return rows * cols; }
  /// The grid one level coarser; throws if this grid cannot be halved.
  Grid coarse() const;
  bool can_coarsen() const;

  friend bool operator==(const Grid&, const Grid&) = default;
};

/// Points along one axis after halving, or 0 when the axis cannot be halved.
std::size_t coarse_axis_length(std::size_t n, GridBoundary b);

}  // namespace nmg
