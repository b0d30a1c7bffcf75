#include "nmg/transfer.hpp"

#include <stdexcept>
#include <string>

namespace nmg {

std::string to_string(GridBoundary b) {
  switch (b) {
    case GridBoundary::periodic: return "periodic";
    case GridBoundary::zero: return "zero";
    case GridBoundary::dirichlet: return "dirichlet";
  }
  return "unknown";
}

GridBoundary grid_boundary_from_string(const std::string& s) {
  if (s == "periodic") return GridBoundary::periodic;
  if (s == "zero") return GridBoundary::zero;
  if (s == "dirichlet") return GridBoundary::dirichlet;
  throw std::invalid_argument("unknown grid boundary '" + s + "'");
}

std::size_t coarse_axis_length(std::size_t n, GridBoundary b) {
  if (b == GridBoundary::dirichlet) return (n >= 3 && n % 2 == 1) ? (n - 1) / 2 : 0;
  return (n >= 2 && n % 2 == 0) ? n / 2 : 0;
}

bool Grid::can_coarsen() const {
  if (coarse_axis_length(rows, boundary) == 0) return false;
  return dims == 1 || coarse_axis_length(cols, boundary) != 0;
}

Grid Grid::coarse() const {
  if (!can_coarsen()) {
    if (boundary == GridBoundary::dirichlet)
      throw std::invalid_argument("grid of " + std::to_string(rows) + " interior points cannot be coarsened");
    throw std::invalid_argument("odd length " + std::to_string(rows) + " cannot be coarsened");
  }
  Grid g = *this;
  g.rows = coarse_axis_length(rows, boundary);
  if (dims == 2) g.cols = coarse_axis_length(cols, boundary);
  return g;
}

namespace {

// Index of the fine point under coarse point j, and fetch with boundary rules.
std::size_t centre(std::size_t j, GridBoundary b) { return b == GridBoundary::dirichlet ? 2 * j + 1 : 2 * j; }

double fetch(std::span<const double> v, std::ptrdiff_t i, GridBoundary b) {
  const auto n = static_cast<std::ptrdiff_t>(v.size());
  if (b == GridBoundary::periodic) return v[static_cast<std::size_t>(((i % n) + n) % n)];
  if (i < 0 || i >= n) return 0.0;
  return v[static_cast<std::size_t>(i)];
}

void restrict_into(std::span<const double> fine, std::span<double> coarse, GridBoundary b) {
  for (std::size_t j = 0; j < coarse.size(); ++j) {
    const auto c = static_cast<std::ptrdiff_t>(centre(j, b));
    coarse[j] = 0.25 * fetch(fine, c - 1, b) + 0.5 * fine[static_cast<std::size_t>(c)] + 0.25 * fetch(fine, c + 1, b);
  }
}

void interpolate_into(std::span<const double> coarse, std::span<double> fine, GridBoundary b) {
  std::fill(fine.begin(), fine.end(), 0.0);
  const auto n = static_cast<std::ptrdiff_t>(fine.size());
  for (std::size_t j = 0; j < coarse.size(); ++j) {
    const auto c = static_cast<std::ptrdiff_t>(centre(j, b));
    const double v = coarse[j];
    fine[static_cast<std::size_t>(c)] += v;
    for (std::ptrdiff_t i : {c - 1, c + 1}) {
      if (b == GridBoundary::periodic)
        fine[static_cast<std::size_t>(((i % n) + n) % n)] += 0.5 * v;
      else if (i >= 0 && i < n)
        fine[static_cast<std::size_t>(i)] += 0.5 * v;
    }
  }
}

std::size_t fine_axis_length(std::size_t coarse, GridBoundary b) {
  return b == GridBoundary::dirichlet ? 2 * coarse + 1 : 2 * coarse;
}

}  // namespace

std::vector<double> restrict_1d(std::span<const double> fine, GridBoundary b) {
  const std::size_t nc = coarse_axis_length(fine.size(), b);
  if (nc == 0) throw std::invalid_argument("odd length " + std::to_string(fine.size()) + " cannot be restricted");
  std::vector<double> out(nc);
  restrict_into(fine, out, b);
  return out;
}

std::vector<double> interpolate_1d(std::span<const double> coarse, GridBoundary b) {
  if (coarse.empty()) throw std::invalid_argument("empty vector");
  std::vector<double> out(fine_axis_length(coarse.size(), b));
  interpolate_into(coarse, out, b);
  return out;
}

std::vector<double> restrict_2d(std::span<const double> fine, std::size_t rows, std::size_t cols, GridBoundary b) {
  if (fine.size() != rows * cols) throw std::invalid_argument("dimension mismatch");
  const std::size_t cr = coarse_axis_length(rows, b);
  const std::size_t cc = coarse_axis_length(cols, b);
  if (cr == 0 || cc == 0) throw std::invalid_argument("odd length cannot be restricted");
  // Columns first (rows axis), then rows.
  std::vector<double> half(cr * cols);
  for (std::size_t j = 0; j < cols; ++j)
    restrict_into(fine.subspan(j * rows, rows), std::span<double>(half).subspan(j * cr, cr), b);
  std::vector<double> out(cr * cc);
  std::vector<double> line(cols), line_c(cc);
  for (std::size_t i = 0; i < cr; ++i) {
    for (std::size_t j = 0; j < cols; ++j) line[j] = half[i + j * cr];
    restrict_into(line, line_c, b);
    for (std::size_t j = 0; j < cc; ++j) out[i + j * cr] = line_c[j];
  }
  return out;
}

std::vector<double> interpolate_2d(std::span<const double> coarse, std::size_t coarse_rows, std::size_t coarse_cols,
                                   GridBoundary b) {
  if (coarse.size() != coarse_rows * coarse_cols || coarse.empty()) throw std::invalid_argument("dimension mismatch");
  const std::size_t fr = fine_axis_length(coarse_rows, b);
  const std::size_t fc = fine_axis_length(coarse_cols, b);
  std::vector<double> half(fr * coarse_cols);
  for (std::size_t j = 0; j < coarse_cols; ++j)
    interpolate_into(coarse.subspan(j * coarse_rows, coarse_rows), std::span<double>(half).subspan(j * fr, fr), b);
  std::vector<double> out(fr * fc);
  std::vector<double> line(coarse_cols), line_f(fc);
  for (std::size_t i = 0; i < fr; ++i) {
    for (std::size_t j = 0; j < coarse_cols; ++j) line[j] = half[i + j * fr];
    interpolate_into(line, line_f, b);
    for (std::size_t j = 0; j < fc; ++j) out[i + j * fr] = line_f[j];
  }
  return out;
}

TransferPair::TransferPair(Grid fine_grid) : fine(fine_grid), coarse(fine_grid.coarse()) {}

std::vector<double> TransferPair::restrict(std::span<const double> v) const {
  if (v.size() != fine.size()) throw std::invalid_argument("dimension mismatch");
  if (fine.dims == 1) return restrict_1d(v, fine.boundary);
  return restrict_2d(v, fine.rows, fine.cols, fine.boundary);
}

std::vector<double> TransferPair::interpolate(std::span<const double> v) const {
  if (v.size() != coarse.size()) throw std::invalid_argument("dimension mismatch");
  if (fine.dims == 1) return interpolate_1d(v, fine.boundary);
  return interpolate_2d(v, coarse.rows, coarse.cols, fine.boundary);
}

std::vector<double> TransferPair::interpolate_adjoint(std::span<const double> v) const {
  auto out = restrict(v);
  const double s = fine.dims == 1 ? 2.0 : 4.0;
  for (auto& x : out) x *= s;
  return out;
}

}  // namespace nmg
