#include "nmg/fft.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace nmg {

namespace {

struct Radix2Plan {
  std::size_t n = 0;
  std::vector<std::size_t> bitrev;
  std::vector<cplx> twiddle;  // exp(-2 pi i k / n), k < n/2
};

struct BluesteinPlan {
  std::size_t n = 0;
  std::size_t m = 0;
  std::vector<cplx> chirp;          // exp(-i pi k^2 / n)
  std::vector<cplx> filter_spectrum;  // DFT_m of the conjugate chirp, wrapped
};

std::mutex plan_mutex;
std::map<std::size_t, std::shared_ptr<const Radix2Plan>> radix2_plans;
std::map<std::size_t, std::shared_ptr<const BluesteinPlan>> bluestein_plans;

std::shared_ptr<const Radix2Plan> radix2_plan(std::size_t n) {
  std::lock_guard lock(plan_mutex);
  if (auto it = radix2_plans.find(n); it != radix2_plans.end()) return it->second;
  auto plan = std::make_shared<Radix2Plan>();
  plan->n = n;
  plan->bitrev.resize(n);
  std::size_t bits = 0;
  while ((std::size_t{1} << bits) < n) ++bits;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t r = 0;
    for (std::size_t b = 0; b < bits; ++b)
      if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (bits - 1 - b);
    plan->bitrev[i] = r;
  }
  plan->twiddle.resize(n / 2);
  for (std::size_t k = 0; k < n / 2; ++k) {
    const double a = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
    plan->twiddle[k] = {std::cos(a), std::sin(a)};
  }
  radix2_plans.emplace(n, plan);
  return plan;
}

// Forward radix-2 transform; the inverse is obtained by conjugation.
void radix2_forward(std::span<cplx> v, const Radix2Plan& plan) {
  const std::size_t n = plan.n;
  for (std::size_t i = 0; i < n; ++i)
    if (i < plan.bitrev[i]) std::swap(v[i], v[plan.bitrev[i]]);
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    const std::size_t stride = n / len;
    for (std::size_t start = 0; start < n; start += len) {
      for (std::size_t k = 0; k < half; ++k) {
        const cplx w = plan.twiddle[k * stride];
        const cplx a = v[start + k];
        const cplx b = v[start + k + half] * w;
        v[start + k] = a + b;
        v[start + k + half] = a - b;
      }
    }
  }
}

void forward_any(std::span<cplx> v);

std::shared_ptr<const BluesteinPlan> bluestein_plan(std::size_t n) {
  {
    std::lock_guard lock(plan_mutex);
    if (auto it = bluestein_plans.find(n); it != bluestein_plans.end()) return it->second;
  }
  auto plan = std::make_shared<BluesteinPlan>();
  plan->n = n;
  plan->m = next_power_of_two(2 * n - 1);
  plan->chirp.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    // k^2 mod 2n keeps the phase argument small for large k.
    const std::size_t k2 = (k * k) % (2 * n);
    const double a = -std::numbers::pi * static_cast<double>(k2) / static_cast<double>(n);
    plan->chirp[k] = {std::cos(a), std::sin(a)};
  }
  std::vector<cplx> filter(plan->m, cplx{0.0, 0.0});
  filter[0] = std::conj(plan->chirp[0]);
  for (std::size_t k = 1; k < n; ++k) {
    filter[k] = std::conj(plan->chirp[k]);
    filter[plan->m - k] = std::conj(plan->chirp[k]);
  }
  radix2_forward(filter, *radix2_plan(plan->m));
  plan->filter_spectrum = std::move(filter);
  std::lock_guard lock(plan_mutex);
  bluestein_plans.emplace(n, plan);
  return plan;
}

void bluestein_forward(std::span<cplx> v) {
  const auto plan = bluestein_plan(v.size());
  const auto inner = radix2_plan(plan->m);
  std::vector<cplx> work(plan->m, cplx{0.0, 0.0});
  for (std::size_t k = 0; k < plan->n; ++k) work[k] = v[k] * plan->chirp[k];
  radix2_forward(work, *inner);
  for (std::size_t k = 0; k < plan->m; ++k) work[k] = std::conj(work[k] * plan->filter_spectrum[k]);
  radix2_forward(work, *inner);
  const double scale = 1.0 / static_cast<double>(plan->m);
  for (std::size_t k = 0; k < plan->n; ++k) v[k] = std::conj(work[k]) * scale * plan->chirp[k];
}

void forward_any(std::span<cplx> v) {
  if (v.empty()) throw std::invalid_argument("empty vector");
  if (v.size() == 1) return;
  if (is_power_of_two(v.size()))
    radix2_forward(v, *radix2_plan(v.size()));
  else
    bluestein_forward(v);
}

void inverse_any(std::span<cplx> v) {
  for (auto& z : v) z = std::conj(z);
  forward_any(v);
  const double scale = 1.0 / static_cast<double>(v.size());
  for (auto& z : v) z = std::conj(z) * scale;
}

// Applies a 1D transform along both axes of a column-major (rows, cols) buffer.
template <typename Transform>
void separable(std::span<cplx> data, std::size_t rows, std::size_t cols, Transform&& t) {
  if (rows == 0 || cols == 0 || data.size() != rows * cols) throw std::invalid_argument("empty matrix");
  for (std::size_t j = 0; j < cols; ++j) t(data.subspan(j * rows, rows));
  std::vector<cplx> row(cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) row[j] = data[i + j * rows];
    t(std::span<cplx>(row));
    for (std::size_t j = 0; j < cols; ++j) data[i + j * rows] = row[j];
  }
}

}  // namespace

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::size_t next_power_of_two(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

void dft1_inplace(std::span<cplx> v) { forward_any(v); }

void idft1_inplace(std::span<cplx> v) {
  if (v.empty()) throw std::invalid_argument("empty vector");
  inverse_any(v);
}

ComplexVec dft1(std::span<const cplx> v) {
  ComplexVec out(v.begin(), v.end());
  forward_any(out);
  return out;
}

ComplexVec idft1(std::span<const cplx> v) {
  ComplexVec out(v.begin(), v.end());
  idft1_inplace(out);
  return out;
}

ComplexVec dft1_real(std::span<const double> v) {
  ComplexVec out(v.begin(), v.end());
  forward_any(out);
  return out;
}

void dft2_inplace(std::span<cplx> data, std::size_t rows, std::size_t cols) {
  separable(data, rows, cols, [](std::span<cplx> s) { forward_any(s); });
}

void idft2_inplace(std::span<cplx> data, std::size_t rows, std::size_t cols) {
  separable(data, rows, cols, [](std::span<cplx> s) { inverse_any(s); });
}

ComplexMat dft2(const ComplexMat& m) {
  ComplexMat out = m;
  dft2_inplace(out.data, out.rows, out.cols);
  return out;
}

ComplexMat idft2(const ComplexMat& m) {
  ComplexMat out = m;
  idft2_inplace(out.data, out.rows, out.cols);
  return out;
}

double bin_frequency(std::size_t j, std::size_t n) {
  const double two_pi = 2.0 * std::numbers::pi;
  if (2 * j <= n) return two_pi * static_cast<double>(j) / static_cast<double>(n);
  return two_pi * (static_cast<double>(j) - static_cast<double>(n)) / static_cast<double>(n);
}

std::size_t centered_to_natural(std::size_t c, std::size_t n) {
  // Bins with phi <= 0 excluding Nyquist come first: count = n - (n/2 + 1) negative bins.
  const std::size_t negatives = n - (n / 2 + 1);
  if (c < negatives) return n / 2 + 1 + c;
  return c - negatives;
}

std::size_t natural_to_centered(std::size_t j, std::size_t n) {
  const std::size_t negatives = n - (n / 2 + 1);
  if (j > n / 2) return j - (n / 2 + 1);
  return j + negatives;
}

}  // namespace nmg
