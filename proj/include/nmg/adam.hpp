#pragma once

#include <cstdint>
#include <vector>

#include "nmg/fno.hpp"

namespace nmg {

struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t step = 0;
  std::vector<std::vector<double>> m;  // one accumulator per tensor
  std::vector<std::vector<double>> v;
};

/// Zero moments shaped like `params`.
AdamState adam_init(const FnoParams& params);

/// One bias-corrected Adam update in place. Throws std::invalid_argument on a
/// shape mismatch or a non-finite gradient (parameters are left untouched).
void adam_step(AdamState& state, FnoParams& params, const FnoParams& grads, double lr);

}  // namespace nmg
