#include "nmg/masks.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <tuple>

namespace nmg {

namespace {

constexpr double kPi = std::numbers::pi;

double band_edge(int level) { return kPi / std::ldexp(1.0, level - 1); }

// Rounding guard so bins sitting exactly on pi / 2^(l-1) count as inside.
bool within(double phi_abs, double edge) { return phi_abs <= edge * (1.0 + 1e-12); }

void check_level(int level, int levels) {
  if (levels < 2 || level < 1 || level > levels - 1)
    throw std::out_of_range("mask level " + std::to_string(level) + " outside 1.." + std::to_string(levels - 1));
}

void fill_natural(FrequencyMask& m) {
  m.natural.assign(m.size(), 0.0);
  for (std::size_t cj = 0; cj < m.cols; ++cj) {
    const std::size_t nj = m.dims == 2 ? centered_to_natural(cj, m.cols) : 0;
    for (std::size_t ci = 0; ci < m.rows; ++ci) {
      const std::size_t ni = centered_to_natural(ci, m.rows);
      m.natural[ni + nj * m.rows] = m.values[ci + cj * m.rows];
    }
  }
}

}  // namespace

double FrequencyMask::max_value() const { return values.empty() ? 0.0 : *std::max_element(values.begin(), values.end()); }

double mask_profile(double phi, int level) {
  const double edge = band_edge(level);
  const double a = std::abs(phi);
  if (!within(a, edge)) return 0.0;
  return std::sqrt(std::min(a / edge, 1.0));
}

double mask_profile_2d(double phi1, double phi2, int level) {
  return mask_profile(std::max(std::abs(phi1), std::abs(phi2)), level);
}

FrequencyMask make_mask_1d(int level, int levels, std::size_t n, MaskVariant variant) {
  check_level(level, levels);
  if (n == 0) throw std::invalid_argument("empty vector");
  FrequencyMask m;
  m.dims = 1;
  m.rows = n;
  m.cols = 1;
  m.level = level;
  m.variant = variant;
  m.values.resize(n);
  for (std::size_t c = 0; c < n; ++c) {
    const double phi = bin_frequency(centered_to_natural(c, n), n);
    // The level grid sees frequency phi where the finest grid sees phi / 2^(l-1).
    m.values[c] = variant == MaskVariant::fine ? mask_profile(phi, level) : mask_profile(phi, 1);
  }
  fill_natural(m);
  return m;
}

FrequencyMask make_mask_2d(int level, int levels, std::size_t rows, std::size_t cols, MaskVariant variant) {
  check_level(level, levels);
  if (rows == 0 || cols == 0) throw std::invalid_argument("empty matrix");
  FrequencyMask m;
  m.dims = 2;
  m.rows = rows;
  m.cols = cols;
  m.level = level;
  m.variant = variant;
  m.values.resize(rows * cols);
  const int profile_level = variant == MaskVariant::fine ? level : 1;
  for (std::size_t cj = 0; cj < cols; ++cj) {
    const double p2 = bin_frequency(centered_to_natural(cj, cols), cols);
    for (std::size_t ci = 0; ci < rows; ++ci) {
      const double p1 = bin_frequency(centered_to_natural(ci, rows), rows);
      m.values[ci + cj * rows] = mask_profile_2d(p1, p2, profile_level);
    }
  }
  fill_natural(m);
  return m;
}

std::shared_ptr<const FrequencyMask> cached_mask(int dims, int level, int levels, std::size_t rows, std::size_t cols,
                                                 MaskVariant variant) {
  using Key = std::tuple<int, int, int, std::size_t, std::size_t, int>;
  static std::mutex mutex;
  static std::map<Key, std::shared_ptr<const FrequencyMask>> cache;
  const Key key{dims, level, levels, rows, cols, static_cast<int>(variant)};
  std::lock_guard lock(mutex);
  if (auto it = cache.find(key); it != cache.end()) return it->second;
  auto mask = std::make_shared<const FrequencyMask>(dims == 1 ? make_mask_1d(level, levels, rows, variant)
                                                              : make_mask_2d(level, levels, rows, cols, variant));
  cache.emplace(key, mask);
  return mask;
}

ComplexVec filter_fine(std::span<const double> v, const FrequencyMask& mask) {
  if (mask.variant != MaskVariant::fine) throw std::invalid_argument("filter_fine needs a fine-variant mask");
  if (v.size() != mask.size()) throw std::invalid_argument("dimension mismatch");
  ComplexVec spec(v.begin(), v.end());
  if (mask.dims == 1)
    dft1_inplace(spec);
  else
    dft2_inplace(spec, mask.rows, mask.cols);
  ComplexVec out(spec.size());
  for (std::size_t cj = 0; cj < mask.cols; ++cj) {
    const std::size_t nj = mask.dims == 2 ? centered_to_natural(cj, mask.cols) : 0;
    for (std::size_t ci = 0; ci < mask.rows; ++ci) {
      const std::size_t ni = centered_to_natural(ci, mask.rows);
      out[ci + cj * mask.rows] = mask.values[ci + cj * mask.rows] * spec[ni + nj * mask.rows];
    }
  }
  return out;
}

std::vector<double> spectral_multiply(std::span<const double> v, std::span<const double> natural_weights, int dims,
                                      std::size_t rows, std::size_t cols) {
  if (v.size() != rows * cols || natural_weights.size() != v.size()) throw std::invalid_argument("dimension mismatch");
  ComplexVec spec(v.begin(), v.end());
  if (dims == 1)
    dft1_inplace(spec);
  else
    dft2_inplace(spec, rows, cols);
  for (std::size_t k = 0; k < spec.size(); ++k) spec[k] *= natural_weights[k];
  if (dims == 1)
    idft1_inplace(spec);
  else
    idft2_inplace(spec, rows, cols);
  std::vector<double> out(v.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = spec[k].real();
  return out;
}

std::vector<double> filter_level(std::span<const double> v, const FrequencyMask& mask) {
  if (mask.variant != MaskVariant::level) throw std::invalid_argument("filter_level needs a level-variant mask");
  return spectral_multiply(v, mask.natural, mask.dims, mask.rows, mask.cols);
}

bool in_band(double phi_abs, int level, int levels) {
  const double upper = band_edge(level);
  if (level == levels) return within(phi_abs, upper);
  const double lower = band_edge(level + 1);
  return within(phi_abs, upper) && !within(phi_abs, lower);
}

void write_mask_csv(std::ostream& os, const FrequencyMask& mask) {
  os.precision(17);
  if (mask.dims == 1) {
    os << "phi,value\n";
    for (std::size_t c = 0; c < mask.rows; ++c)
      os << bin_frequency(centered_to_natural(c, mask.rows), mask.rows) << ',' << mask.values[c] << '\n';
    return;
  }
  os << "phi1,phi2,value\n";
  for (std::size_t cj = 0; cj < mask.cols; ++cj)
    for (std::size_t ci = 0; ci < mask.rows; ++ci)
      os << bin_frequency(centered_to_natural(ci, mask.rows), mask.rows) << ','
         << bin_frequency(centered_to_natural(cj, mask.cols), mask.cols) << ',' << mask.values[ci + cj * mask.rows]
         << '\n';
}

}  // namespace nmg
