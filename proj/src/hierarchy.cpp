#include "nmg/hierarchy.hpp"

#include <stdexcept>
#include <string>

namespace nmg {

LevelHierarchy::LevelHierarchy(OperatorPtr fine, int levels, std::size_t dense_cap) : dense_cap_(dense_cap) {
  if (!fine) throw std::invalid_argument("hierarchy: null operator");
  if (levels < 1) throw std::invalid_argument("hierarchy: level count must be >= 1");
  ops_.push_back(std::move(fine));
  for (int l = 1; l < levels; ++l) {
    if (!ops_.back()->grid().can_coarsen())
      throw std::invalid_argument("hierarchy: grid of size " + std::to_string(ops_.back()->size()) +
                                  " not divisible for " + std::to_string(levels) + " levels");
    ops_.push_back(ops_.back()->coarsen());
  }
  if (ops_.back()->size() > dense_cap_)
    throw std::invalid_argument("hierarchy: coarsest level has " + std::to_string(ops_.back()->size()) +
                                " unknowns, above the dense cap " + std::to_string(dense_cap_));
  for (int l = 0; l < levels; ++l) lazy_.push_back(std::make_unique<LazyLevel>());
  coarse_solver(levels);
}

const OperatorPtr& LevelHierarchy::op(int level) const {
  if (level < 1 || level > levels()) throw std::out_of_range("level " + std::to_string(level) + " out of range");
  return ops_[static_cast<std::size_t>(level - 1)];
}

TransferPair LevelHierarchy::transfer(int level) const {
  if (level < 1 || level >= levels()) throw std::out_of_range("no transfer below level " + std::to_string(level));
  return TransferPair(grid(level));
}

const LuFactorization& LevelHierarchy::coarse_solver(int level) const {
  const auto& a = op(level);
  auto& lazy = *lazy_[static_cast<std::size_t>(level - 1)];
  std::call_once(lazy.lu_once, [&] { lazy.lu = LuFactorization(a->densify(dense_cap_)); });
  return lazy.lu;
}

const std::vector<double>& LevelHierarchy::diagonal(int level) const {
  const auto& a = op(level);
  auto& lazy = *lazy_[static_cast<std::size_t>(level - 1)];
  std::call_once(lazy.diag_once, [&] { lazy.diag = a->diagonal(); });
  return lazy.diag;
}

}  // namespace nmg
