#pragma once

#include <span>
#include <string>
#include <vector>

#include "nmg/hierarchy.hpp"
#include "nmg/operator.hpp"

namespace nmg {

/// Outcome of an iterative solve. residual_history holds ||y - A x||_2 / ||y||_2
/// after every iteration (a single 0 when y = 0).
struct SolveReport {
  int iterations = 0;
  std::vector<double> residual_history;
  bool converged = false;
  double wall_time = 0.0;
  std::string method;
  std::vector<double> solution;
};

/// JSON text with the fields iterations, residual_history, converged,
/// wall_time and method.
std::string to_json(const SolveReport& report);

/// Thrown when a solve produces a non-finite or exploding residual.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// nu sweeps of x <- x + omega D^-1 (y - A x).
void weighted_jacobi(const LinearOperator& op, std::span<const double> diag, std::span<double> x,
                     std::span<const double> y, int nu, double omega);

/// 1 - mu_phi = (omega / (2 + alpha)) (2 + alpha - 2 cos phi): the fraction of the
/// Fourier mode e_phi removed by one weighted Jacobi sweep on the periodic
/// model problem tridiag(-1, 2 + alpha, -1).
double jacobi_reduction_factor(double phi, double alpha, double omega);

struct MgParams {
  int pre_smooth = 5;   // nu1
  int post_smooth = 0;  // nu2; 0 gives the backslash cycle
  double omega = 0.5;
  /// Level where the exact solve happens; 0 means the hierarchy's coarsest.
  int coarsest = 0;
};

/// One V-cycle starting at `level`; returns the improved iterate.
std::vector<double> mg_cycle(const LevelHierarchy& hier, std::span<const double> x, std::span<const double> y,
                             const MgParams& params, int level = 1);

SolveReport mg_solve(const LevelHierarchy& hier, std::span<const double> y, const MgParams& params, double tol = 1e-6,
                     int max_cycles = 30000);

/// Conjugate gradients from x = 0. Requires op.spd().
SolveReport cg_solve(const LinearOperator& op, std::span<const double> y, double tol = 1e-6, int max_iter = 100000);

}  // namespace nmg
