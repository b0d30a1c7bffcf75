#pragma once

#include <memory>
#include <mutex>
#include <vector>

#include "nmg/dense.hpp"
#include "nmg/operator.hpp"
#include "nmg/transfer.hpp"

namespace nmg {

/// Galerkin level hierarchy A^(1) .. A^(L) with A^(l+1) = R A^(l) P.
/// Levels are numbered from 1 (finest). The coarsest level is densified and
/// LU-factorized at construction; intermediate levels are factorized on
/// first request so a cycle can stop early (coarsest level L' < L).
class LevelHierarchy {
 public:
  LevelHierarchy(OperatorPtr fine, int levels, std::size_t dense_cap = kDefaultDenseCap);

  int levels() const { return static_cast<int>(ops_.size()); }
  const OperatorPtr& op(int level) const;
  const Grid& grid(int level) const { return op(level)->grid(); }
  TransferPair transfer(int level) const;  // level -> level + 1

  /// Dense LU of A^(level); thread-safe lazy construction.
  const LuFactorization& coarse_solver(int level) const;
  /// diag(A^(level)), cached.
  const std::vector<double>& diagonal(int level) const;

 private:
  struct LazyLevel {
    std::once_flag lu_once;
    std::once_flag diag_once;
    LuFactorization lu;
    std::vector<double> diag;
  };

  std::vector<OperatorPtr> ops_;
  std::vector<std::unique_ptr<LazyLevel>> lazy_;
  std::size_t dense_cap_;
};

}  // namespace nmg
