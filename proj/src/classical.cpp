#include "nmg/classical.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "nmg/vec.hpp"

namespace nmg {

std::string to_json(const SolveReport& report) {
  nlohmann::json j;
  j["iterations"] = report.iterations;
  j["residual_history"] = report.residual_history;
  j["converged"] = report.converged;
  j["wall_time"] = report.wall_time;
  j["method"] = report.method;
  return j.dump();
}

void weighted_jacobi(const LinearOperator& op, std::span<const double> diag, std::span<double> x,
                     std::span<const double> y, int nu, double omega) {
  if (nu < 0) throw std::invalid_argument("jacobi: sweep count must be >= 0");
  if (diag.size() != op.size() || x.size() != op.size() || y.size() != op.size())
    throw std::invalid_argument("dimension mismatch");
  for (std::size_t i = 0; i < diag.size(); ++i)
    if (diag[i] == 0.0) throw std::invalid_argument("jacobi: zero diagonal entry at index " + std::to_string(i));
  std::vector<double> ax(op.size());
  for (int sweep = 0; sweep < nu; ++sweep) {
    op.apply(x, ax);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += omega * (y[i] - ax[i]) / diag[i];
  }
}

double jacobi_reduction_factor(double phi, double alpha, double omega) {
  return omega / (2.0 + alpha) * (2.0 + alpha - 2.0 * std::cos(phi));
}

std::vector<double> mg_cycle(const LevelHierarchy& hier, std::span<const double> x, std::span<const double> y,
                             const MgParams& params, int level) {
  const int coarsest = params.coarsest == 0 ? hier.levels() : params.coarsest;
  if (coarsest < 1 || coarsest > hier.levels()) throw std::out_of_range("coarsest level out of range");
  if (level < 1 || level > coarsest) throw std::out_of_range("level " + std::to_string(level) + " out of range");
  const auto& a = *hier.op(level);
  if (x.size() != a.size() || y.size() != a.size()) throw std::invalid_argument("dimension mismatch");

  if (level == coarsest) return hier.coarse_solver(level).solve(y);

  std::vector<double> xl(x.begin(), x.end());
  const auto& diag = hier.diagonal(level);
  weighted_jacobi(a, diag, xl, y, params.pre_smooth, params.omega);

  const auto t = hier.transfer(level);
  const auto residual = subtract(y, a.apply(xl));
  const auto y_coarse = t.restrict(residual);
  const std::vector<double> zero(y_coarse.size(), 0.0);
  const auto e_coarse = mg_cycle(hier, zero, y_coarse, params, level + 1);
  const auto correction = t.interpolate(e_coarse);
  axpy(1.0, correction, xl);

  weighted_jacobi(a, diag, xl, y, params.post_smooth, params.omega);
  return xl;
}

SolveReport mg_solve(const LevelHierarchy& hier, std::span<const double> y, const MgParams& params, double tol,
                     int max_cycles) {
  if (max_cycles < 1) throw std::invalid_argument("max_cycles must be >= 1");
  const auto& a = *hier.op(1);
  SolveReport report;
  report.method = "mg";
  report.solution.assign(a.size(), 0.0);
  const auto start = std::chrono::steady_clock::now();
  const double ynorm = norm2(y);
  if (ynorm == 0.0) {
    report.residual_history.push_back(0.0);
    report.converged = true;
    return report;
  }
  std::vector<double> ax(a.size());
  for (int cycle = 1; cycle <= max_cycles; ++cycle) {
    report.solution = mg_cycle(hier, report.solution, y, params, 1);
    a.apply(report.solution, ax);
    const double rel = norm2(subtract(y, ax)) / ynorm;
    if (!std::isfinite(rel)) throw NumericalFailure("mg diverged: non-finite residual at cycle " + std::to_string(cycle));
    report.residual_history.push_back(rel);
    report.iterations = cycle;
    if (rel <= tol) {
      report.converged = true;
      break;
    }
  }
  report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

SolveReport cg_solve(const LinearOperator& op, std::span<const double> y, double tol, int max_iter) {
  if (!op.spd()) throw std::invalid_argument("cg: operator is not flagged SPD");
  if (y.size() != op.size()) throw std::invalid_argument("dimension mismatch");
  SolveReport report;
  report.method = "cg";
  const auto start = std::chrono::steady_clock::now();
  const std::size_t n = op.size();
  std::vector<double> x(n, 0.0), r(y.begin(), y.end()), p = r, ap(n);
  const double ynorm = norm2(y);
  if (ynorm == 0.0) {
    report.residual_history.push_back(0.0);
    report.converged = true;
    report.solution = x;
    return report;
  }
  double rr = dot(r, r);
  for (int it = 1; it <= max_iter; ++it) {
    op.apply(p, ap);
    const double pap = dot(p, ap);
    if (!(pap > 0.0))
      throw NumericalFailure("cg breakdown: p^T A p = " + std::to_string(pap) + " at iteration " + std::to_string(it) +
                             " (operator not SPD in practice)");
    const double step = rr / pap;
    axpy(step, p, x);
    axpy(-step, ap, r);
    const double rr_new = dot(r, r);
    const double rel = std::sqrt(rr_new) / ynorm;
    if (!std::isfinite(rel)) throw NumericalFailure("cg: non-finite residual at iteration " + std::to_string(it));
    report.residual_history.push_back(rel);
    report.iterations = it;
    if (rel <= tol) {
      report.converged = true;
      break;
    }
    const double beta = rr_new / rr;
    rr = rr_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
  }
  report.solution = std::move(x);
  report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace nmg
