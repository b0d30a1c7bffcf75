#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include "nmg/checkpoint.hpp"
#include "nmg/classical.hpp"
#include "nmg/fno.hpp"
#include "nmg/hierarchy.hpp"
#include "nmg/masks.hpp"

namespace nmg {

/// Replacement for the learned smoother on one level: maps the residual b_l
/// to the raw correction h_l (before the level filter).
using SmootherFn = std::function<std::vector<double>(int level, std::span<const double> b)>;

/// A Galerkin hierarchy with one FNO smoother per level 1..L-1.
struct NeuralHierarchy {
  std::shared_ptr<const LevelHierarchy> base;
  std::vector<FnoConfig> configs;  // [L - 1], entry l - 1 for level l
  std::vector<FnoParams> params;   // [L - 1]
  std::vector<std::shared_ptr<const FrequencyMask>> level_masks;  // m_l', [L - 1]
  /// Filtered cycle (smoother output passed through m_l') vs the plain one.
  bool filtered = true;
  /// Test hook; when set it replaces every network evaluation.
  SmootherFn smoother_override;

  int levels() const { return base->levels(); }
  /// Raw smoother output h_l = N_l(b / ||b||) ||b||, zero when b = 0.
  std::vector<double> smooth(int level, std::span<const double> b) const;
  /// h_l after the level filter (identity in unfiltered mode).
  std::vector<double> smooth_filtered(int level, std::span<const double> b) const;
  /// m_l'-filter of v on level l.
  std::vector<double> apply_filter(int level, std::span<const double> v) const;
  void validate() const;
};

/// Hierarchy with freshly initialized smoothers (seed + level) for `base`.
/// `make_config(level, grid)` supplies the architecture of each level.
NeuralHierarchy make_neural_hierarchy(std::shared_ptr<const LevelHierarchy> base,
                                      const std::function<FnoConfig(int, const Grid&)>& make_config,
                                      std::uint64_t seed, bool filtered = true);

/// The desk-scale architecture used by default on a level grid:
/// 16 channels, 3 layers, modes n_l / 4, kernel size 5.
FnoConfig default_smoother_config(int level, const Grid& grid);

/// Attaches the smoothers stored in a checkpoint.
NeuralHierarchy neural_hierarchy_from_checkpoint(std::shared_ptr<const LevelHierarchy> base, const Checkpoint& ckpt,
                                                 bool filtered = true);
Checkpoint to_checkpoint(const NeuralHierarchy& nh, std::uint64_t problem_hash, const std::string& problem,
                         std::uint64_t seed);

/// One neural V-cycle (Alg 2 when unfiltered, Alg 3/4 when filtered) from
/// `level` down to the coarsest level `coarsest` (L'; 0 means L) where the
/// Galerkin operator is solved densely. Works for 1D vectors and 2D
/// column-major matrices alike.
std::vector<double> nmg_cycle(const NeuralHierarchy& nh, std::span<const double> x, std::span<const double> y,
                              int level = 1, int coarsest = 0);

/// Repeated cycles from x = 0 until ||y - A x|| / ||y|| <= tol or the cap.
/// Throws NumericalFailure on a non-finite residual or when the relative
/// residual stays above 10x its initial value for 5 consecutive cycles.
SolveReport nmg_solve(const NeuralHierarchy& nh, std::span<const double> y, int coarsest = 0, double tol = 1e-6,
                      int max_cycles = 1000);

/// Smoother hook that makes one cycle exact on periodic grids: on level l it
/// returns F_l'^-1 (A_l^-1 b - P A_(l+1)^-1 R b) (mask inverted where nonzero),
/// so the smoothing step removes exactly what the coarse correction cannot.
SmootherFn exact_band_smoother(const NeuralHierarchy& nh);

/// Error after each stage of one cycle from x = 0:
///   e_0 = x_true, e_l = x_true - sum_{k<=l} I_k^1 F_k'(h_k) for l < L,
///   e_L = x_true - cycle output.
struct ErrorSpectra {
  int dims = 1;
  std::size_t rows = 0;
  std::size_t cols = 1;
  std::vector<std::vector<double>> errors;      // fine-grid errors e_0..e_L
  std::vector<std::vector<double>> magnitudes;  // |DFT(e_l)|, centered order
};

ErrorSpectra error_spectra(const NeuralHierarchy& nh, std::span<const double> x_true, std::span<const double> y);

/// Sum of |e_hat|^2 over fine-grid bins in band Phi_level (max-norm in 2D).
/// `spectrum` is a centered magnitude spectrum.
double band_energy(std::span<const double> spectrum, int level, int levels, int dims, std::size_t rows,
                   std::size_t cols);

/// CSV with columns phi (phi1, phi2 in 2D) followed by one magnitude column
/// per level (e0..eL); in 2D also the differences d1..dL = |E_(l-1)| - |E_l|.
void write_spectra_csv(std::ostream& os, const ErrorSpectra& spectra);

/// Applies I_level^1 (interpolation from `level` up to the finest grid).
std::vector<double> interpolate_to_fine(const LevelHierarchy& hier, int level, std::span<const double> v);
/// Applies (I_level^1)^T = P_1^T ... (fine vector down to `level`).
std::vector<double> interpolate_to_fine_adjoint(const LevelHierarchy& hier, int level, std::span<const double> v);

}  // namespace nmg
