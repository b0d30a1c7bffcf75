#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nmg/fft.hpp"

namespace nmg {

enum class Activation { gelu, identity };
enum class ConvPadding { circular, zero };

std::string to_string(Activation a);
std::string to_string(ConvPadding p);
Activation activation_from_string(const std::string& s);
ConvPadding conv_padding_from_string(const std::string& s);

/// Architecture of one Fourier neural operator smoother.
///
/// In 1D the spectral branch keeps bins 0..modes-1. In 2D it keeps rows
/// {0..modes-1} and {rows-modes..rows-1} (both signs of the first frequency)
/// against columns 0..modes-1; the real part of the inverse transform supplies
/// the conjugate half.
struct FnoConfig {
  int dims = 1;
  std::size_t rows = 64;
  std::size_t cols = 1;
  int channels = 16;
  int layers = 3;
  std::size_t modes = 16;
  int kernel_size = 5;
  Activation activation = Activation::gelu;
  ConvPadding padding = ConvPadding::circular;

  void validate() const;
  std::size_t size() const { return rows * cols; }
  /// Number of retained spectral bins per channel pair.
  std::size_t retained_bins() const;
  /// Natural-order flat indices of the retained bins.
  std::vector<std::size_t> retained_indices() const;
  std::size_t kernel_taps() const;

  friend bool operator==(const FnoConfig&, const FnoConfig&) = default;
};

struct Tensor {
  std::string name;
  std::vector<std::size_t> shape;
  std::vector<double> data;
};

/// Named parameter tensors in a fixed order:
///   lift.weight [c], lift.bias [c],
///   layer{i}.spectral [c_out, c_in, bins, 2] (real, imag),
///   layer{i}.conv [c_out, c_in, taps], layer{i}.bias [c],
///   project.weight [c], project.bias [1].
struct FnoParams {
  std::vector<Tensor> tensors;
  /// Bumped by every in-place update so stale forward caches can be detected.
  std::uint64_t generation = 0;

  std::size_t count() const;
  Tensor& at(const std::string& name);
  const Tensor& at(const std::string& name) const;
  bool all_finite() const;
};

/// Tensors with the right names and shapes, all zero.
FnoParams fno_zero_params(const FnoConfig& cfg);
/// Seeded initialization: uniform fan-in scaling for lift, conv and project
/// weights, spectral entries uniform in [-s, s] with s = 1 / (c * modes),
/// zero biases.
FnoParams fno_init(const FnoConfig& cfg, std::uint64_t seed);
/// Gradient buffer with the shapes of `params`, zero-filled.
FnoParams fno_zero_like(const FnoParams& params);

struct FnoCache {
  const FnoParams* params = nullptr;
  std::uint64_t generation = 0;
  std::vector<double> input;
  std::vector<std::vector<double>> z;    // layer inputs, [layers + 1][c * N]
  std::vector<ComplexVec> z_hat;         // full spectra of layer inputs, [layers][c * N]
  std::vector<std::vector<double>> pre;  // pre-activations, [layers][c * N]
};

/// Forward pass. Throws on shape mismatch or non-finite values; the error
/// message names the offending stage.
std::vector<double> fno_forward(const FnoParams& params, const FnoConfig& cfg, std::span<const double> input,
                                FnoCache* cache = nullptr);

/// Reverse pass for d(loss)/d(output) = grad_out. Accumulates parameter
/// gradients into `grads` (shaped like params) and returns d(loss)/d(input).
std::vector<double> fno_backward(const FnoParams& params, const FnoConfig& cfg, const FnoCache& cache,
                                 std::span<const double> grad_out, FnoParams& grads);

/// x -> N(x / ||x||) * ||x||, with N(0) := 0 for x = 0.
std::vector<double> fno_apply_normalized(const FnoParams& params, const FnoConfig& cfg, std::span<const double> x);

}  // namespace nmg
