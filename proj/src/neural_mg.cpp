#include "nmg/neural_mg.hpp"

#include <chrono>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "nmg/transfer.hpp"
#include "nmg/vec.hpp"

namespace nmg {

namespace {

std::size_t slot(int level) { return static_cast<std::size_t>(level - 1); }

std::shared_ptr<const FrequencyMask> level_mask_for(const LevelHierarchy& hier, int level) {
  const Grid& g = hier.grid(level);
  return cached_mask(g.dims, level, hier.levels(), g.rows, g.cols, MaskVariant::level);
}

std::vector<double> fine_spectrum_magnitude(std::span<const double> e, int dims, std::size_t rows, std::size_t cols) {
  ComplexVec s(e.begin(), e.end());
  if (dims == 1)
    dft1_inplace(s);
  else
    dft2_inplace(s, rows, cols);
  std::vector<double> mag(s.size());
  for (std::size_t cj = 0; cj < cols; ++cj)
    for (std::size_t ci = 0; ci < rows; ++ci) {
      const std::size_t nat = centered_to_natural(ci, rows) + centered_to_natural(cj, cols) * rows;
      mag[ci + cj * rows] = std::abs(s[nat]);
    }
  return mag;
}

}  // namespace

void NeuralHierarchy::validate() const {
  if (!base) throw std::invalid_argument("neural hierarchy: missing base hierarchy");
  const auto expected = static_cast<std::size_t>(levels() - 1);
  if (!smoother_override && (configs.size() != expected || params.size() != expected))
    throw std::invalid_argument("neural hierarchy: expected " + std::to_string(expected) + " smoothers, found " +
                                std::to_string(params.size()));
  if (filtered && level_masks.size() != expected)
    throw std::invalid_argument("neural hierarchy: filtered cycle needs a mask on every smoothing level");
  for (std::size_t k = 0; k < configs.size() && k < expected; ++k) {
    const Grid& g = base->grid(static_cast<int>(k) + 1);
    if (configs[k].rows != g.rows || configs[k].cols != g.cols || configs[k].dims != g.dims)
      throw std::invalid_argument("neural hierarchy: smoother " + std::to_string(k + 1) +
                                  " shape does not match its level grid");
  }
}

std::vector<double> NeuralHierarchy::smooth(int level, std::span<const double> b) const {
  if (smoother_override) return smoother_override(level, b);
  if (level < 1 || slot(level) >= params.size())
    throw std::out_of_range("no smoother for level " + std::to_string(level));
  return fno_apply_normalized(params[slot(level)], configs[slot(level)], b);
}

std::vector<double> NeuralHierarchy::apply_filter(int level, std::span<const double> v) const {
  if (!filtered) return {v.begin(), v.end()};
  if (level < 1 || slot(level) >= level_masks.size())
    throw std::out_of_range("no level mask for level " + std::to_string(level));
  return filter_level(v, *level_masks[slot(level)]);
}

std::vector<double> NeuralHierarchy::smooth_filtered(int level, std::span<const double> b) const {
  return apply_filter(level, smooth(level, b));
}

FnoConfig default_smoother_config(int /*level*/, const Grid& grid) {
  FnoConfig cfg;
  cfg.dims = grid.dims;
  cfg.rows = grid.rows;
  cfg.cols = grid.cols;
  cfg.channels = 16;
  cfg.layers = 3;
  cfg.modes = std::max<std::size_t>(1, std::min(grid.rows, grid.dims == 2 ? grid.cols : grid.rows) / 4);
  cfg.kernel_size = 5;
  return cfg;
}

NeuralHierarchy make_neural_hierarchy(std::shared_ptr<const LevelHierarchy> base,
                                      const std::function<FnoConfig(int, const Grid&)>& make_config,
                                      std::uint64_t seed, bool filtered) {
  NeuralHierarchy nh;
  nh.base = std::move(base);
  nh.filtered = filtered;
  for (int l = 1; l < nh.levels(); ++l) {
    nh.configs.push_back(make_config(l, nh.base->grid(l)));
    nh.params.push_back(fno_init(nh.configs.back(), seed + static_cast<std::uint64_t>(l)));
    nh.level_masks.push_back(level_mask_for(*nh.base, l));
  }
  nh.validate();
  return nh;
}

NeuralHierarchy neural_hierarchy_from_checkpoint(std::shared_ptr<const LevelHierarchy> base, const Checkpoint& ckpt,
                                                 bool filtered) {
  NeuralHierarchy nh;
  nh.base = std::move(base);
  nh.filtered = filtered;
  if (ckpt.hierarchy_levels != nh.levels())
    throw std::invalid_argument("checkpoint was trained with L=" + std::to_string(ckpt.hierarchy_levels) +
                                ", hierarchy has L=" + std::to_string(nh.levels()));
  for (int l = 1; l < nh.levels(); ++l) {
    const Checkpoint::Level* found = nullptr;
    for (const auto& lv : ckpt.levels)
      if (lv.level == l) found = &lv;
    if (!found) throw std::invalid_argument("checkpoint has no smoother for level " + std::to_string(l));
    nh.configs.push_back(found->config);
    nh.params.push_back(found->params);
    nh.level_masks.push_back(level_mask_for(*nh.base, l));
  }
  nh.validate();
  return nh;
}

Checkpoint to_checkpoint(const NeuralHierarchy& nh, std::uint64_t problem_hash, const std::string& problem,
                         std::uint64_t seed) {
  Checkpoint c;
  c.problem_hash = problem_hash;
  c.problem = problem;
  c.hierarchy_levels = nh.levels();
  c.seed = seed;
  c.extra["filtered"] = nh.filtered;
  for (std::size_t k = 0; k < nh.params.size(); ++k)
    c.levels.push_back({static_cast<int>(k) + 1, nh.configs[k], nh.params[k]});
  return c;
}

std::vector<double> nmg_cycle(const NeuralHierarchy& nh, std::span<const double> x, std::span<const double> y,
                              int level, int coarsest) {
  const int lc = coarsest == 0 ? nh.levels() : coarsest;
  if (lc < 2 || lc > nh.levels()) throw std::out_of_range("coarsest level L' must lie in [2, L]");
  if (level < 1 || level > lc) throw std::out_of_range("level " + std::to_string(level) + " out of range");
  const auto& a = *nh.base->op(level);
  if (x.size() != a.size() || y.size() != a.size()) throw std::invalid_argument("dimension mismatch");
  if (level == lc) return nh.base->coarse_solver(level).solve(y);

  std::vector<double> xl(x.begin(), x.end());
  const auto b = subtract(y, a.apply(xl));
  if (norm2(b) > 0.0) axpy(1.0, nh.smooth_filtered(level, b), xl);

  const auto t = nh.base->transfer(level);
  const auto y_coarse = t.restrict(subtract(y, a.apply(xl)));
  const std::vector<double> zero(y_coarse.size(), 0.0);
  const auto e = nmg_cycle(nh, zero, y_coarse, level + 1, lc);
  axpy(1.0, t.interpolate(e), xl);
  return xl;
}

SolveReport nmg_solve(const NeuralHierarchy& nh, std::span<const double> y, int coarsest, double tol,
                      int max_cycles) {
  if (max_cycles < 1) throw std::invalid_argument("max_cycles must be >= 1");
  const int lc = coarsest == 0 ? nh.levels() : coarsest;
  if (lc < 2 || lc > nh.levels()) throw std::out_of_range("coarsest level L' must lie in [2, L]");
  if (!nh.smoother_override && nh.params.size() < static_cast<std::size_t>(lc - 1))
    throw std::invalid_argument("missing smoother for a level above L'");
  const auto& a = *nh.base->op(1);
  SolveReport report;
  report.method = "nmg";
  report.solution.assign(a.size(), 0.0);
  const auto start = std::chrono::steady_clock::now();
  const double ynorm = norm2(y);
  if (ynorm == 0.0) {
    report.residual_history.push_back(0.0);
    report.converged = true;
    return report;
  }
  // x0 = 0, so the initial relative residual is 1.
  const double initial = 1.0;
  int above = 0;
  std::vector<double> ax(a.size());
  for (int cycle = 1; cycle <= max_cycles; ++cycle) {
    report.solution = nmg_cycle(nh, report.solution, y, 1, lc);
    a.apply(report.solution, ax);
    const double rel = norm2(subtract(y, ax)) / ynorm;
    if (!std::isfinite(rel))
      throw NumericalFailure("nmg diverged: non-finite residual at cycle " + std::to_string(cycle));
    report.residual_history.push_back(rel);
    report.iterations = cycle;
    if (rel <= tol) {
      report.converged = true;
      break;
    }
    above = rel > 10.0 * initial ? above + 1 : 0;
    if (above >= 5)
      throw NumericalFailure("nmg diverged: residual above 10x the initial value for 5 cycles (cycle " +
                             std::to_string(cycle) + ")");
  }
  report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

SmootherFn exact_band_smoother(const NeuralHierarchy& nh) {
  auto base = nh.base;
  auto masks = nh.level_masks;
  const bool filtered = nh.filtered;
  return [base, masks, filtered](int level, std::span<const double> b) {
    const auto fine_solve = base->coarse_solver(level).solve(b);
    const auto t = base->transfer(level);
    const auto coarse = t.interpolate(base->coarse_solver(level + 1).solve(t.restrict(b)));
    auto w = subtract(fine_solve, coarse);
    if (!filtered) return w;
    const auto& m = *masks[slot(level)];
    std::vector<double> inv(m.natural.size(), 0.0);
    for (std::size_t k = 0; k < inv.size(); ++k)
      if (m.natural[k] > 0.0) inv[k] = 1.0 / m.natural[k];
    return spectral_multiply(w, inv, m.dims, m.rows, m.cols);
  };
}

std::vector<double> interpolate_to_fine(const LevelHierarchy& hier, int level, std::span<const double> v) {
  std::vector<double> out(v.begin(), v.end());
  for (int l = level - 1; l >= 1; --l) out = hier.transfer(l).interpolate(out);
  return out;
}

std::vector<double> interpolate_to_fine_adjoint(const LevelHierarchy& hier, int level, std::span<const double> v) {
  std::vector<double> out(v.begin(), v.end());
  for (int l = 1; l < level; ++l) out = hier.transfer(l).interpolate_adjoint(out);
  return out;
}

ErrorSpectra error_spectra(const NeuralHierarchy& nh, std::span<const double> x_true, std::span<const double> y) {
  const auto& hier = *nh.base;
  const Grid& fine = hier.grid(1);
  if (x_true.size() != fine.size() || y.size() != fine.size()) throw std::invalid_argument("dimension mismatch");
  ErrorSpectra out;
  out.dims = fine.dims;
  out.rows = fine.rows;
  out.cols = fine.cols;

  std::vector<double> e(x_true.begin(), x_true.end());
  out.errors.push_back(e);
  // Walk the cycle from x = 0, peeling off each smoothing correction.
  std::vector<double> y_l(y.begin(), y.end());
  const int levels = hier.levels();
  for (int l = 1; l < levels; ++l) {
    const auto& a = *hier.op(l);
    const std::vector<double> u = norm2(y_l) > 0.0 ? nh.smooth_filtered(l, y_l) : std::vector<double>(y_l.size());
    axpy(-1.0, interpolate_to_fine(hier, l, u), e);
    out.errors.push_back(e);
    y_l = hier.transfer(l).restrict(subtract(y_l, a.apply(u)));
  }
  const auto x = nmg_cycle(nh, std::vector<double>(y.size(), 0.0), y);
  out.errors.push_back(subtract(x_true, x));
  for (const auto& err : out.errors) out.magnitudes.push_back(fine_spectrum_magnitude(err, out.dims, out.rows, out.cols));
  return out;
}

double band_energy(std::span<const double> spectrum, int level, int levels, int dims, std::size_t rows,
                   std::size_t cols) {
  if (spectrum.size() != rows * cols) throw std::invalid_argument("dimension mismatch");
  double acc = 0.0;
  for (std::size_t cj = 0; cj < cols; ++cj)
    for (std::size_t ci = 0; ci < rows; ++ci) {
      double phi = std::abs(bin_frequency(centered_to_natural(ci, rows), rows));
      if (dims == 2) phi = std::max(phi, std::abs(bin_frequency(centered_to_natural(cj, cols), cols)));
      if (in_band(phi, level, levels)) acc += spectrum[ci + cj * rows] * spectrum[ci + cj * rows];
    }
  return acc;
}

void write_spectra_csv(std::ostream& os, const ErrorSpectra& s) {
  os.precision(17);
  const std::size_t nl = s.magnitudes.size();
  os << (s.dims == 1 ? "phi" : "phi1,phi2");
  for (std::size_t l = 0; l < nl; ++l) os << ",e" << l;
  if (s.dims == 2)
    for (std::size_t l = 1; l < nl; ++l) os << ",d" << l;
  os << '\n';
  for (std::size_t cj = 0; cj < s.cols; ++cj)
    for (std::size_t ci = 0; ci < s.rows; ++ci) {
      const std::size_t k = ci + cj * s.rows;
      os << bin_frequency(centered_to_natural(ci, s.rows), s.rows);
      if (s.dims == 2) os << ',' << bin_frequency(centered_to_natural(cj, s.cols), s.cols);
      for (std::size_t l = 0; l < nl; ++l) os << ',' << s.magnitudes[l][k];
      if (s.dims == 2)
        for (std::size_t l = 1; l < nl; ++l) os << ',' << s.magnitudes[l - 1][k] - s.magnitudes[l][k];
      os << '\n';
    }
}

}  // namespace nmg
