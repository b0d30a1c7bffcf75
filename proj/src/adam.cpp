#include "nmg/adam.hpp"

#include <cmath>
#include <stdexcept>

#include "nmg/vec.hpp"

namespace nmg {

AdamState adam_init(const FnoParams& params) {
  AdamState s;
  for (const auto& t : params.tensors) {
    s.m.emplace_back(t.data.size(), 0.0);
    s.v.emplace_back(t.data.size(), 0.0);
  }
  return s;
}

void adam_step(AdamState& state, FnoParams& params, const FnoParams& grads, double lr) {
  if (grads.tensors.size() != params.tensors.size() || state.m.size() != params.tensors.size())
    throw std::invalid_argument("adam: tensor count mismatch");
  for (std::size_t k = 0; k < params.tensors.size(); ++k) {
    if (grads.tensors[k].data.size() != params.tensors[k].data.size() ||
        state.m[k].size() != params.tensors[k].data.size())
      throw std::invalid_argument("adam: shape mismatch in '" + params.tensors[k].name + "'");
    if (!all_finite(grads.tensors[k].data))
      throw std::invalid_argument("adam: non-finite gradient in '" + params.tensors[k].name + "'");
  }
  ++state.step;
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (std::size_t k = 0; k < params.tensors.size(); ++k) {
    auto& p = params.tensors[k].data;
    const auto& g = grads.tensors[k].data;
    auto& m = state.m[k];
    auto& v = state.v[k];
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
      v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
      p[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + state.eps);
    }
  }
  ++params.generation;
}

}  // namespace nmg
