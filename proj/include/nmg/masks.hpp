#pragma once

#include <cstddef>
#include <memory>
#include <ostream>
#include <span>
#include <vector>

#include "nmg/fft.hpp"

namespace nmg {

/// `fine` masks m_l live on the finest grid and cover the band
/// |phi| <= pi / 2^(l-1); `level` masks m_l' sample the same profile over the
/// full frequency axis of the level-l grid.
enum class MaskVariant { fine, level };

/// Nonnegative frequency weights, maximal (1) at the highest frequency visible
/// on level l and zero at phi = 0. `values` is in centered order (ascending
/// phi per axis, column-major in 2D); `natural` holds the same weights in DFT
/// storage order.
struct FrequencyMask {
  int dims = 1;
  std::size_t rows = 0;
  std::size_t cols = 1;
  int level = 1;
  MaskVariant variant = MaskVariant::fine;
  std::vector<double> values;
  std::vector<double> natural;

  std::size_t size() const { return rows * cols; }
  double max_value() const;
};

/// m_l(phi) = sqrt(|phi| / (pi / 2^(l-1))) inside the band, 0 outside.
double mask_profile(double phi, int level);
/// 2D profile using max(|phi1|, |phi2|).
double mask_profile_2d(double phi1, double phi2, int level);

FrequencyMask make_mask_1d(int level, int levels, std::size_t n, MaskVariant variant);
FrequencyMask make_mask_2d(int level, int levels, std::size_t rows, std::size_t cols, MaskVariant variant);

/// Shared immutable mask for (level, levels, shape, variant).
std::shared_ptr<const FrequencyMask> cached_mask(int dims, int level, int levels, std::size_t rows, std::size_t cols,
                                                 MaskVariant variant);

/// m_l (.) DFT(v), returned in centered order. Requires a fine-variant mask.
ComplexVec filter_fine(std::span<const double> v, const FrequencyMask& mask);

/// Re(IDFT(m_l' (.) DFT(v))). Requires a level-variant mask.
std::vector<double> filter_level(std::span<const double> v, const FrequencyMask& mask);

/// Re(IDFT(w (.) DFT(v))) with natural-order weights w; 2D when cols > 1 or dims == 2.
std::vector<double> spectral_multiply(std::span<const double> v, std::span<const double> natural_weights, int dims,
                                      std::size_t rows, std::size_t cols);

/// Whether angular frequency phi (max-norm in 2D) lies in band Phi_l of an
/// L-level decomposition: (pi/2^l, pi/2^(l-1)] for l < L, [0, pi/2^(L-1)] for l = L.
bool in_band(double phi_abs, int level, int levels);

/// Writes `phi, value` rows (1D) or `phi1, phi2, value` rows (2D), centered order.
void write_mask_csv(std::ostream& os, const FrequencyMask& mask);

}  // namespace nmg
